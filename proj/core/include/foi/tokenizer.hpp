#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace foi {

// Half-open character range [start, end) into some text.
struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    bool empty() const { return end <= start; }
    bool intersects(const CharSpan& o) const { return !empty() && !o.empty() && start < o.end && o.start < end; }
    bool contains(const CharSpan& o) const { return start <= o.start && o.end <= end; }
    friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

// Fixed-length token sequence. Tokens that do not come from the text
// (sequence markers, padding) carry an empty offset span.
struct TokenizedText {
    std::vector<int> ids;
    std::vector<CharSpan> offsets;

    std::size_t size() const { return ids.size(); }
};

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual TokenizedText tokenize(std::string_view text) const = 0;
    virtual int length() const = 0;
};

// Lowercase whitespace tokenizer. Each word hashes into one of (vocab_size - 1)
// slots; id 0 is reserved for padding. No sequence markers.
class WhitespaceHashTokenizer final : public Tokenizer {
public:
    static constexpr int kPadId = 0;

    WhitespaceHashTokenizer(int length, int vocab_size);

    TokenizedText tokenize(std::string_view text) const override;
    int length() const override { return length_; }
    int vocab_size() const { return vocab_size_; }

    int word_id(std::string_view word) const;

private:
    int length_;
    int vocab_size_;
};

// Byte-level BPE tokenizer compatible with CLIP's text encoder vocabulary
// (HF layout: vocab.json + merges.txt). Output is
// [<|startoftext|>, tokens..., <|endoftext|>, pad...] of fixed length.
class ClipBpeTokenizer final : public Tokenizer {
public:
    ClipBpeTokenizer(std::unordered_map<std::string, int> vocab,
                     std::vector<std::pair<std::string, std::string>> merges,
                     int length = 77);

    static ClipBpeTokenizer from_files(const std::string& vocab_json_path,
                                       const std::string& merges_path,
                                       int length = 77);

    TokenizedText tokenize(std::string_view text) const override;
    int length() const override { return length_; }

    // BPE pieces for a single pre-tokenized word (with the trailing "</w>").
    std::vector<std::string> bpe(const std::string& word) const;

private:
    std::unordered_map<std::string, int> vocab_;
    std::unordered_map<std::string, int> merge_rank_;
    int length_;
    int bos_id_;
    int eos_id_;
    int pad_id_;
};

}  // namespace foi
