#include <cctype>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "foi/error.hpp"

namespace foi::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw Error(ErrorCode::InvalidArgument, key + ": not a number: " + value);
    return v;
}

long long to_integer(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw Error(ErrorCode::InvalidArgument, key + ": not an integer: " + value);
    return v;
}

}  // namespace

ConfigEntries parse_config(const std::string& text) {
    ConfigEntries entries;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(number) + ": expected key = value");
        }
        std::string key = trim(stripped.substr(0, eq));
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        entries.emplace(key, unquote(trim(stripped.substr(eq + 1))));
    }
    return entries;
}

ConfigEntries read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void apply_config(const ConfigEntries& entries, EditRequest& r) {
    bool subs_reset = false;
    for (const auto& [key, value] : entries) {
        if (key == "image") r.image_path = value;
        else if (key == "instruction") r.instruction = value;
        else if (key == "sub") {
            if (!subs_reset) {
                r.subs.clear();
                subs_reset = true;
            }
            r.subs.push_back(parse_sub_flag(value));
        }
        else if (key == "out") r.output_path = value;
        else if (key == "seed") r.seed = static_cast<std::uint64_t>(to_integer(key, value));
        else if (key == "backend") r.backend = value;
        else if (key == "steps") r.steps = static_cast<int>(to_integer(key, value));
        else if (key == "noise-start") r.noise_start = to_double(key, value);
        else if (key == "disentangle-frac") r.disentangle_fraction = to_double(key, value);
        else if (key == "si") r.guidance.image_scale = to_double(key, value);
        else if (key == "st") r.guidance.text_scale = to_double(key, value);
        else if (key == "gamma") r.extraction.gamma = static_cast<int>(to_integer(key, value));
        else if (key == "tau") r.extraction.tau = to_double(key, value);
        else if (key == "dump") r.dump_dir = value;
        else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
}

}  // namespace foi::cli
