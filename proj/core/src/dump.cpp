#include "foi/dump.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "foi/error.hpp"
#include "foi/image.hpp"
#include "json.hpp"

namespace foi {

namespace fs = std::filesystem;

void write_f32_le(const fs::path& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    std::vector<char> bytes(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
        for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<float> read_f32_le(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 4 != 0) throw Error(ErrorCode::Io, path.string() + " is not a float32 array");
    std::vector<float> values(bytes.size() / 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
        values[i] = std::bit_cast<float>(bits);
    }
    return values;
}

void write_attention_dump(const fs::path& dir, const std::string& stem, const AttentionRecord& record, bool modulated) {
    fs::create_directories(dir);
    const auto& probs = record.probs;
    const int r = record.layer.resolution;
    const int n = probs.tokens;

    std::vector<double> averaged(static_cast<std::size_t>(probs.pixels) * n, 0.0);
    for (int h = 0; h < probs.heads; ++h) {
        for (int p = 0; p < probs.pixels; ++p) {
            for (int j = 0; j < n; ++j) averaged[static_cast<std::size_t>(p) * n + j] += probs.at(h, p, j) / probs.heads;
        }
    }
    const double peak = std::max(1e-12, *std::max_element(averaged.begin(), averaged.end()));
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(r) * r * n);
    for (int y = 0; y < r; ++y) {
        for (int j = 0; j < n; ++j) {
            for (int x = 0; x < r; ++x) {
                const double v = averaged[static_cast<std::size_t>(y * r + x) * n + j] / peak;
                pixels[static_cast<std::size_t>(y) * r * n + static_cast<std::size_t>(j) * r + x] =
                    static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
            }
        }
    }
    write_png_gray((dir / (stem + ".png")).string(), r * n, r, pixels);
    write_f32_le(dir / (stem + "_probs.f32"), probs.data);
    write_f32_le(dir / (stem + "_logits.f32"), record.logits.data);

    nlohmann::json header = {
        {"layer", record.layer.name},
        {"branch", std::string(branch_name(record.branch))},
        {"heads", probs.heads},
        {"r", r},
        {"N", n},
        {"timestep", record.timestep_index},
        {"modulated", modulated},
        {"dtype", "float32-le"},
        {"layout", "heads x r*r x N"},
        {"probs", stem + "_probs.f32"},
        {"logits", stem + "_logits.f32"},
    };
    std::ofstream out(dir / (stem + ".json"));
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / (stem + ".json")).string());
    out << header.dump(2) << '\n';
}

std::string mask_filename(const KeywordMask& mask) {
    std::string safe;
    for (unsigned char c : mask.keyword) safe.push_back(std::isalnum(c) || c == '-' || c == '_' ? static_cast<char>(c) : '_');
    return "mask_" + std::to_string(mask.sub_index) + "_" + safe + ".png";
}

void write_mask_dump(const fs::path& dir, const std::vector<KeywordMask>& masks, const BinaryMask& union_mask) {
    fs::create_directories(dir);
    for (const auto& m : masks) write_mask_png((dir / mask_filename(m)).string(), m.values);
    write_mask_png((dir / "union_mask.png").string(), union_mask);
}

}  // namespace foi
