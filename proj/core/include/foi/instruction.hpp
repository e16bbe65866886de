#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foi/tokenizer.hpp"

namespace foi {

// Half-open token index range.
struct TokenRange {
    int start = 0;
    int end = 0;

    bool contains(int j) const { return start <= j && j < end; }
    friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

struct SubInstruction {
    std::string text;
    CharSpan char_span;
    std::string keyword;
    CharSpan keyword_char_span;
    double alpha = 1.0;
};

// A composite edit instruction split into sub-instructions. Token fields are
// empty until resolve_token_spans() runs.
struct Instruction {
    std::string composite_text;
    std::vector<SubInstruction> subs;

    std::vector<int> token_ids;
    std::vector<TokenRange> token_spans;
    std::vector<std::vector<int>> keyword_token_indices;
    int token_count = 0;

    bool resolved() const { return token_count > 0; }
};

// Length-N per-token intensity; zero outside every sub-instruction span.
struct AlphaVector {
    std::vector<double> values;
};

struct SubSpec {
    std::string text;
    std::string keyword;
    double alpha = 1.0;
};

Instruction parse_edit_request(std::string_view composite_text, const std::vector<SubSpec>& subs);

Instruction resolve_token_spans(Instruction instruction, const Tokenizer& tokenizer);

AlphaVector build_alpha_vector(const Instruction& instruction);

// Parses the command-line form "TEXT::KEYWORD[::ALPHA]".
SubSpec parse_sub_flag(std::string_view flag);

// Convenience splitter: sub-instructions end at '.' or ';', keyword is the
// last alphabetic word of each piece. Callers that know their keywords should
// pass explicit SubSpecs instead.
std::vector<SubSpec> split_instruction(std::string_view composite_text);

}  // namespace foi
