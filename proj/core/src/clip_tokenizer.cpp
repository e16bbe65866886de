#include <algorithm>
#include <array>
#include <cctype>
#include <climits>
#include <fstream>
#include <sstream>

#include "foi/error.hpp"
#include "foi/tokenizer.hpp"
#include "json.hpp"

namespace foi {

namespace {

std::string utf8(int codepoint) {
    std::string s;
    if (codepoint < 0x80) {
        s.push_back(static_cast<char>(codepoint));
    } else if (codepoint < 0x800) {
        s.push_back(static_cast<char>(0xC0 | (codepoint >> 6)));
        s.push_back(static_cast<char>(0x80 | (codepoint & 0x3F)));
    } else {
        s.push_back(static_cast<char>(0xE0 | (codepoint >> 12)));
        s.push_back(static_cast<char>(0x80 | ((codepoint >> 6) & 0x3F)));
        s.push_back(static_cast<char>(0x80 | (codepoint & 0x3F)));
    }
    return s;
}

// GPT-2/CLIP reversible byte -> printable unicode mapping.
const std::array<std::string, 256>& byte_encoder() {
    static const std::array<std::string, 256> table = [] {
        std::array<std::string, 256> t;
        std::array<bool, 256> direct{};
        for (int b = '!'; b <= '~'; ++b) direct[b] = true;
        for (int b = 0xA1; b <= 0xAC; ++b) direct[b] = true;
        for (int b = 0xAE; b <= 0xFF; ++b) direct[b] = true;
        int extra = 0;
        for (int b = 0; b < 256; ++b) t[b] = utf8(direct[b] ? b : 256 + extra++);
        return t;
    }();
    return table;
}

constexpr std::string_view kEndOfWord = "</w>";

std::size_t codepoints(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

bool is_letter(unsigned char c) { return std::isalpha(c) || c >= 0x80; }

struct Word {
    std::string text;
    std::size_t start;
};

// Mirrors the CLIP pre-tokenizer pattern for ASCII input:
// contractions | letter runs | single digits | runs of other non-space characters.
std::vector<Word> pre_tokenize(const std::string& lowered) {
    static constexpr std::array<std::string_view, 7> contractions = {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"};
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < lowered.size()) {
        auto c = static_cast<unsigned char>(lowered[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        bool matched = false;
        if (c == '\'') {
            for (auto con : contractions) {
                if (lowered.compare(i, con.size(), con) == 0) {
                    j = i + con.size();
                    matched = true;
                    break;
                }
            }
        }
        if (!matched) {
            if (is_letter(c)) {
                while (j < lowered.size() && is_letter(static_cast<unsigned char>(lowered[j]))) ++j;
            } else if (std::isdigit(c)) {
                j = i + 1;
            } else {
                while (j < lowered.size()) {
                    auto d = static_cast<unsigned char>(lowered[j]);
                    if (std::isspace(d) || is_letter(d) || std::isdigit(d)) break;
                    ++j;
                }
            }
        }
        words.push_back({lowered.substr(i, j - i), i});
        i = j;
    }
    return words;
}

}  // namespace

ClipBpeTokenizer::ClipBpeTokenizer(std::unordered_map<std::string, int> vocab,
                                   std::vector<std::pair<std::string, std::string>> merges, int length)
    : vocab_(std::move(vocab)), length_(length) {
    if (length_ < 2) throw Error(ErrorCode::InvalidArgument, "CLIP tokenizer length must be >= 2");
    for (std::size_t i = 0; i < merges.size(); ++i) {
        merge_rank_.emplace(merges[i].first + " " + merges[i].second, static_cast<int>(i));
    }
    auto find = [&](const char* tok) {
        auto it = vocab_.find(tok);
        if (it == vocab_.end()) throw Error(ErrorCode::InvalidArgument, std::string("vocabulary lacks ") + tok);
        return it->second;
    };
    bos_id_ = find("<|startoftext|>");
    eos_id_ = find("<|endoftext|>");
    pad_id_ = eos_id_;
}

ClipBpeTokenizer ClipBpeTokenizer::from_files(const std::string& vocab_json_path, const std::string& merges_path,
                                              int length) {
    std::ifstream vin(vocab_json_path);
    if (!vin) throw Error(ErrorCode::Io, "cannot open " + vocab_json_path);
    nlohmann::json j = nlohmann::json::parse(vin);
    std::unordered_map<std::string, int> vocab;
    for (auto it = j.begin(); it != j.end(); ++it) vocab.emplace(it.key(), it.value().get<int>());

    std::ifstream min(merges_path);
    if (!min) throw Error(ErrorCode::Io, "cannot open " + merges_path);
    std::vector<std::pair<std::string, std::string>> merges;
    std::string line;
    while (std::getline(min, line)) {
        if (line.empty() || line.rfind("#version", 0) == 0) continue;
        std::istringstream ls(line);
        std::string a, b;
        if (ls >> a >> b) merges.emplace_back(a, b);
    }
    return ClipBpeTokenizer(std::move(vocab), std::move(merges), length);
}

std::vector<std::string> ClipBpeTokenizer::bpe(const std::string& word) const {
    const auto& enc = byte_encoder();
    std::vector<std::string> symbols;
    for (unsigned char b : word) symbols.push_back(enc[b]);
    if (symbols.empty()) return symbols;
    symbols.back() += kEndOfWord;

    while (symbols.size() > 1) {
        int best_rank = INT_MAX;
        std::size_t best = 0;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            auto it = merge_rank_.find(symbols[i] + " " + symbols[i + 1]);
            if (it != merge_rank_.end() && it->second < best_rank) {
                best_rank = it->second;
                best = i;
            }
        }
        if (best_rank == INT_MAX) break;
        const std::string first = symbols[best];
        const std::string second = symbols[best + 1];
        std::vector<std::string> merged;
        merged.reserve(symbols.size());
        for (std::size_t i = 0; i < symbols.size();) {
            if (i + 1 < symbols.size() && symbols[i] == first && symbols[i + 1] == second) {
                merged.push_back(first + second);
                i += 2;
            } else {
                merged.push_back(symbols[i]);
                ++i;
            }
        }
        symbols = std::move(merged);
    }
    return symbols;
}

TokenizedText ClipBpeTokenizer::tokenize(std::string_view text) const {
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    TokenizedText out;
    out.ids.push_back(bos_id_);
    out.offsets.push_back({});
    const std::size_t content_limit = static_cast<std::size_t>(length_) - 1;

    for (const auto& word : pre_tokenize(lowered)) {
        std::size_t cursor = word.start;
        for (const auto& piece : bpe(word.text)) {
            auto it = vocab_.find(piece);
            if (it == vocab_.end()) throw Error(ErrorCode::InvalidArgument, "BPE piece '" + piece + "' not in vocabulary");
            std::size_t n = codepoints(piece);
            if (piece.size() >= kEndOfWord.size() &&
                piece.compare(piece.size() - kEndOfWord.size(), kEndOfWord.size(), kEndOfWord) == 0) {
                n -= kEndOfWord.size();
            }
            if (out.ids.size() < content_limit) {
                out.ids.push_back(it->second);
                out.offsets.push_back({cursor, cursor + n});
            }
            cursor += n;
        }
    }
    out.ids.push_back(eos_id_);
    out.offsets.push_back({});
    while (static_cast<int>(out.ids.size()) < length_) {
        out.ids.push_back(pad_id_);
        out.offsets.push_back({});
    }
    return out;
}

}  // namespace foi
