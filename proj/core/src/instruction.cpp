#include "foi/instruction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "foi/error.hpp"

namespace foi {

namespace {

bool overlaps_any(const CharSpan& span, const std::vector<SubInstruction>& taken) {
    return std::any_of(taken.begin(), taken.end(),
                       [&](const SubInstruction& s) { return s.char_span.intersects(span); });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<int> tokens_intersecting(const TokenizedText& tokens, const CharSpan& span) {
    std::vector<int> out;
    for (std::size_t j = 0; j < tokens.offsets.size(); ++j) {
        if (tokens.offsets[j].intersects(span)) out.push_back(static_cast<int>(j));
    }
    return out;
}

}  // namespace

Instruction parse_edit_request(std::string_view composite_text, const std::vector<SubSpec>& specs) {
    Instruction ins;
    ins.composite_text = std::string(composite_text);

    for (const auto& spec : specs) {
        if (spec.text.empty()) throw Error(ErrorCode::SubNotFound, "empty sub-instruction text");
        if (!(spec.alpha >= 0.0) || !std::isfinite(spec.alpha)) {
            throw Error(ErrorCode::InvalidArgument, "alpha must be a finite nonnegative number for '" + spec.text + "'");
        }

        // First occurrence that does not collide with an already placed sub.
        std::optional<CharSpan> placed;
        bool seen = false;
        for (auto pos = composite_text.find(spec.text); pos != std::string_view::npos;
             pos = composite_text.find(spec.text, pos + 1)) {
            seen = true;
            CharSpan candidate{pos, pos + spec.text.size()};
            if (!overlaps_any(candidate, ins.subs)) {
                placed = candidate;
                break;
            }
        }
        if (!seen) throw Error(ErrorCode::SubNotFound, "'" + spec.text + "' does not occur in the instruction");
        if (!placed) throw Error(ErrorCode::OverlappingSubs, "'" + spec.text + "' overlaps another sub-instruction");

        if (spec.keyword.empty()) throw Error(ErrorCode::KeywordNotFound, "empty keyword for '" + spec.text + "'");
        auto kpos = spec.text.find(spec.keyword);
        if (kpos == std::string::npos) {
            throw Error(ErrorCode::KeywordNotFound, "keyword '" + spec.keyword + "' not in '" + spec.text + "'");
        }

        SubInstruction sub;
        sub.text = spec.text;
        sub.char_span = *placed;
        sub.keyword = spec.keyword;
        sub.keyword_char_span = {placed->start + kpos, placed->start + kpos + spec.keyword.size()};
        sub.alpha = spec.alpha;
        ins.subs.push_back(std::move(sub));
    }
    return ins;
}

Instruction resolve_token_spans(Instruction ins, const Tokenizer& tokenizer) {
    TokenizedText tokens = tokenizer.tokenize(ins.composite_text);
    ins.token_ids = tokens.ids;
    ins.token_count = static_cast<int>(tokens.size());
    ins.token_spans.clear();
    ins.keyword_token_indices.clear();

    for (const auto& sub : ins.subs) {
        auto span_tokens = tokens_intersecting(tokens, sub.char_span);
        if (span_tokens.empty()) {
            throw Error(ErrorCode::SpanUnresolvable, "sub-instruction '" + sub.text + "' maps to no tokens");
        }
        auto keyword_tokens = tokens_intersecting(tokens, sub.keyword_char_span);
        if (keyword_tokens.empty()) {
            throw Error(ErrorCode::SpanUnresolvable, "keyword '" + sub.keyword + "' maps to no tokens");
        }
        TokenRange range{span_tokens.front(), span_tokens.back() + 1};
        for (const auto& other : ins.token_spans) {
            if (range.start < other.end && other.start < range.end) {
                throw Error(ErrorCode::OverlappingSubs, "sub-instruction '" + sub.text + "' shares tokens with another");
            }
        }
        ins.token_spans.push_back(range);
        ins.keyword_token_indices.push_back(std::move(keyword_tokens));
    }
    return ins;
}

AlphaVector build_alpha_vector(const Instruction& ins) {
    AlphaVector alpha;
    alpha.values.assign(static_cast<std::size_t>(ins.token_count), 0.0);
    for (std::size_t i = 0; i < ins.token_spans.size(); ++i) {
        const auto& range = ins.token_spans[i];
        for (int j = range.start; j < range.end; ++j) alpha.values[static_cast<std::size_t>(j)] = ins.subs[i].alpha;
    }
    return alpha;
}

SubSpec parse_sub_flag(std::string_view flag) {
    std::vector<std::string_view> parts;
    std::size_t begin = 0;
    for (auto pos = flag.find("::"); pos != std::string_view::npos; pos = flag.find("::", begin)) {
        parts.push_back(flag.substr(begin, pos - begin));
        begin = pos + 2;
    }
    parts.push_back(flag.substr(begin));

    if (parts.size() < 2 || parts.size() > 3 || parts[0].empty() || parts[1].empty()) {
        throw Error(ErrorCode::InvalidArgument, "expected TEXT::KEYWORD[::ALPHA], got '" + std::string(flag) + "'");
    }
    SubSpec spec{std::string(parts[0]), std::string(parts[1]), 1.0};
    if (parts.size() == 3) {
        std::string text(trim(parts[2]));
        std::size_t used = 0;
        try {
            spec.alpha = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size() || !std::isfinite(spec.alpha) || spec.alpha < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "bad alpha '" + std::string(parts[2]) + "'");
        }
    }
    return spec;
}

std::vector<SubSpec> split_instruction(std::string_view composite_text) {
    std::vector<SubSpec> out;
    std::size_t begin = 0;
    while (begin < composite_text.size()) {
        auto end = composite_text.find_first_of(".;", begin);
        end = (end == std::string_view::npos) ? composite_text.size() : end + 1;
        std::string_view piece = trim(composite_text.substr(begin, end - begin));
        begin = end;

        std::string_view keyword;
        for (std::size_t i = 0; i < piece.size();) {
            if (!std::isalpha(static_cast<unsigned char>(piece[i]))) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < piece.size() && std::isalpha(static_cast<unsigned char>(piece[j]))) ++j;
            keyword = piece.substr(i, j - i);
            i = j;
        }
        if (keyword.empty()) continue;
        out.push_back({std::string(piece), std::string(keyword), 1.0});
    }
    return out;
}

}  // namespace foi
