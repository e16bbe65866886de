#include "foi/tokenizer.hpp"

#include <cctype>
#include <cstdint>

#include "foi/error.hpp"

namespace foi {

WhitespaceHashTokenizer::WhitespaceHashTokenizer(int length, int vocab_size)
    : length_(length), vocab_size_(vocab_size) {
    if (length < 1 || vocab_size < 2) {
        throw Error(ErrorCode::InvalidArgument, "tokenizer needs length >= 1 and vocab_size >= 2");
    }
}

int WhitespaceHashTokenizer::word_id(std::string_view word) const {
    // FNV-1a over the lowercased alphanumerics; punctuation-only words hash as-is.
    std::string key;
    for (char c : word) {
        if (std::isalnum(static_cast<unsigned char>(c))) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (key.empty()) key = std::string(word);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return 1 + static_cast<int>(h % static_cast<std::uint64_t>(vocab_size_ - 1));
}

TokenizedText WhitespaceHashTokenizer::tokenize(std::string_view text) const {
    TokenizedText out;
    out.ids.reserve(length_);
    out.offsets.reserve(length_);
    std::size_t i = 0;
    while (i < text.size() && static_cast<int>(out.ids.size()) < length_) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        out.ids.push_back(word_id(text.substr(i, j - i)));
        out.offsets.push_back({i, j});
        i = j;
    }
    while (static_cast<int>(out.ids.size()) < length_) {
        out.ids.push_back(kPadId);
        out.offsets.push_back({});
    }
    return out;
}

}  // namespace foi
