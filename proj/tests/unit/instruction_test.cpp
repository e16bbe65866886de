#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "foi/error.hpp"
#include "foi/instruction.hpp"
#include "foi/tokenizer.hpp"
#include "support.hpp"

namespace foi {
namespace {

using testing::code_of;

ClipBpeTokenizer tiny_clip_tokenizer(int length = 12) {
    std::unordered_map<std::string, int> vocab;
    int next = 0;
    auto add = [&](const std::string& s) { vocab.emplace(s, next++); };
    for (char c = 'a'; c <= 'z'; ++c) {
        add(std::string(1, c));
        add(std::string(1, c) + "</w>");
    }
    add(".</w>");
    for (const char* piece : {"su", "sun", "se", "set</w>", "ma", "mak", "make</w>", "it</w>"}) add(piece);
    add("<|startoftext|>");
    add("<|endoftext|>");
    std::vector<std::pair<std::string, std::string>> merges = {
        {"s", "u"}, {"su", "n"}, {"s", "e"}, {"se", "t</w>"}, {"m", "a"}, {"ma", "k"}, {"mak", "e</w>"}, {"i", "t</w>"},
    };
    return ClipBpeTokenizer(std::move(vocab), std::move(merges), length);
}

TEST(ParseEditRequest, TwoSubsGetDisjointSpans) {
    auto ins = parse_edit_request("add a hat. make it sunset.",
                                  {{"add a hat.", "hat", 1.0}, {"make it sunset.", "sunset", 1.0}});
    ASSERT_EQ(ins.subs.size(), 2u);
    EXPECT_EQ(ins.subs[0].char_span, (CharSpan{0, 10}));
    EXPECT_EQ(ins.subs[1].char_span, (CharSpan{11, 26}));
    EXPECT_FALSE(ins.subs[0].char_span.intersects(ins.subs[1].char_span));
    EXPECT_EQ(ins.subs[0].keyword_char_span, (CharSpan{6, 9}));
    EXPECT_EQ(ins.subs[1].keyword_char_span, (CharSpan{19, 25}));
    EXPECT_TRUE(ins.subs[1].char_span.contains(ins.subs[1].keyword_char_span));
    EXPECT_FALSE(ins.resolved());
}

TEST(ParseEditRequest, CarriesAlpha) {
    auto ins = parse_edit_request("turn sky purple", {{"turn sky purple", "sky", 2.0}});
    ASSERT_EQ(ins.subs.size(), 1u);
    EXPECT_DOUBLE_EQ(ins.subs[0].alpha, 2.0);
    EXPECT_EQ(ins.subs[0].keyword, "sky");
}

TEST(ParseEditRequest, Errors) {
    EXPECT_EQ(code_of([] { parse_edit_request("add a hat", {{"add a hat", "dog", 1.0}}); }), ErrorCode::KeywordNotFound);
    EXPECT_EQ(code_of([] { parse_edit_request("add a hat", {{"remove it", "it", 1.0}}); }), ErrorCode::SubNotFound);
    EXPECT_EQ(code_of([] { parse_edit_request("add a red hat", {{"add a red", "red", 1.0}, {"red hat", "hat", 1.0}}); }),
              ErrorCode::OverlappingSubs);
    EXPECT_EQ(code_of([] { parse_edit_request("add a hat", {{"add a hat", "hat", -1.0}}); }), ErrorCode::InvalidArgument);
}

TEST(ParseEditRequest, RepeatedTextTakesNextFreeOccurrence) {
    auto ins = parse_edit_request("add hat. add hat.", {{"add hat.", "hat", 1.0}, {"add hat.", "hat", 2.0}});
    EXPECT_EQ(ins.subs[0].char_span, (CharSpan{0, 8}));
    EXPECT_EQ(ins.subs[1].char_span, (CharSpan{9, 17}));
    EXPECT_EQ(ins.subs[1].keyword_char_span, (CharSpan{13, 16}));
}

TEST(ResolveTokenSpans, WhitespaceTokenizerSingleWord) {
    WhitespaceHashTokenizer tok(16, 1024);
    auto ins = resolve_token_spans(parse_edit_request("add hat", {{"add hat", "hat", 1.0}}), tok);
    ASSERT_TRUE(ins.resolved());
    EXPECT_EQ(ins.token_count, 16);
    EXPECT_EQ(ins.keyword_token_indices[0], std::vector<int>{1});
    EXPECT_EQ(ins.token_spans[0], (TokenRange{0, 2}));
}

TEST(ResolveTokenSpans, SubwordKeywordCoversTwoTokens) {
    auto tok = tiny_clip_tokenizer();
    // [bos, make</w>, it</w>, sun, set</w>, .</w>, eos, pad...]
    auto ins = resolve_token_spans(parse_edit_request("make it sunset.", {{"make it sunset.", "sunset", 1.0}}), tok);
    EXPECT_EQ(ins.keyword_token_indices[0], (std::vector<int>{3, 4}));
    EXPECT_EQ(ins.token_spans[0], (TokenRange{1, 6}));
}

TEST(ResolveTokenSpans, TruncatedKeywordIsUnresolvable) {
    WhitespaceHashTokenizer tok(3, 1024);
    auto parsed = parse_edit_request("please add a small hat", {{"please add a small hat", "hat", 1.0}});
    EXPECT_EQ(code_of([&] { resolve_token_spans(parsed, tok); }), ErrorCode::SpanUnresolvable);
}

TEST(ResolveTokenSpans, InvariantsHold) {
    WhitespaceHashTokenizer tok(16, 1024);
    auto ins = resolve_token_spans(
        parse_edit_request("add a hat and make it sunset", {{"add a hat", "hat", 1.0}, {"make it sunset", "sunset", 1.0}}),
        tok);
    for (std::size_t i = 0; i < ins.subs.size(); ++i) {
        ASSERT_FALSE(ins.keyword_token_indices[i].empty());
        for (int j : ins.keyword_token_indices[i]) {
            EXPECT_TRUE(ins.token_spans[i].contains(j));
            EXPECT_LT(j, ins.token_count);
        }
    }
    EXPECT_LE(ins.token_spans[0].end, ins.token_spans[1].start);
}

TEST(BuildAlphaVector, OneSubBroadcast) {
    Instruction ins;
    ins.token_count = 8;
    ins.subs.push_back({});
    ins.token_spans = {{1, 4}};
    ins.keyword_token_indices = {{2}};
    EXPECT_EQ(build_alpha_vector(ins).values, (std::vector<double>{0, 1, 1, 1, 0, 0, 0, 0}));
}

TEST(BuildAlphaVector, TwoSubsCarryTheirAlphas) {
    WhitespaceHashTokenizer tok(16, 1024);
    auto ins = resolve_token_spans(
        parse_edit_request("add a hat. make it sunset.", {{"add a hat.", "hat", 1.0}, {"make it sunset.", "sunset", 2.5}}),
        tok);
    auto alpha = build_alpha_vector(ins).values;
    ASSERT_EQ(alpha.size(), 16u);
    for (int j = 0; j < 16; ++j) {
        const double expected = ins.token_spans[0].contains(j) ? 1.0 : ins.token_spans[1].contains(j) ? 2.5 : 0.0;
        EXPECT_DOUBLE_EQ(alpha[static_cast<std::size_t>(j)], expected) << j;
    }
}

TEST(BuildAlphaVector, ZeroSubsAllZero) {
    Instruction ins;
    ins.token_count = 5;
    EXPECT_EQ(build_alpha_vector(ins).values, std::vector<double>(5, 0.0));
}

TEST(BuildAlphaVector, SubOrderDoesNotMatter) {
    std::mt19937 gen(3);
    for (int trial = 0; trial < 50; ++trial) {
        Instruction ins;
        ins.token_count = 20;
        int pos = 1;
        const int k = 1 + static_cast<int>(gen() % 4);
        for (int i = 0; i < k; ++i) {
            const int len = 1 + static_cast<int>(gen() % 3);
            SubInstruction sub;
            sub.alpha = static_cast<double>(gen() % 100) / 10.0;
            ins.subs.push_back(sub);
            ins.token_spans.push_back({pos, pos + len});
            ins.keyword_token_indices.push_back({pos});
            pos += len + static_cast<int>(gen() % 2);
        }
        auto base = build_alpha_vector(ins).values;
        std::vector<std::size_t> order(ins.subs.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), gen);
        Instruction perm = ins;
        for (std::size_t i = 0; i < order.size(); ++i) {
            perm.subs[i] = ins.subs[order[i]];
            perm.token_spans[i] = ins.token_spans[order[i]];
            perm.keyword_token_indices[i] = ins.keyword_token_indices[order[i]];
        }
        EXPECT_EQ(build_alpha_vector(perm).values, base);
    }
}

TEST(ParseSubFlag, Forms) {
    auto a = parse_sub_flag("add a hat.::hat");
    EXPECT_EQ(a.text, "add a hat.");
    EXPECT_EQ(a.keyword, "hat");
    EXPECT_DOUBLE_EQ(a.alpha, 1.0);
    auto b = parse_sub_flag("make it sunset.::sunset::2.5");
    EXPECT_DOUBLE_EQ(b.alpha, 2.5);
    EXPECT_EQ(code_of([] { parse_sub_flag("no separator"); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { parse_sub_flag("a::b::x"); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { parse_sub_flag("::b"); }), ErrorCode::InvalidArgument);
}

TEST(SplitInstruction, LastWordIsKeyword) {
    auto subs = split_instruction("add a hat. make it sunset; turn sky purple");
    ASSERT_EQ(subs.size(), 3u);
    EXPECT_EQ(subs[0].text, "add a hat.");
    EXPECT_EQ(subs[0].keyword, "hat");
    EXPECT_EQ(subs[1].keyword, "sunset");
    EXPECT_EQ(subs[2].text, "turn sky purple");
    EXPECT_EQ(subs[2].keyword, "purple");
    // The heuristic output must parse against its own source text.
    EXPECT_NO_THROW(parse_edit_request("add a hat. make it sunset; turn sky purple", subs));
}

}  // namespace
}  // namespace foi
