#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "foi/error.hpp"
#include "foi/mask.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace foi {
namespace {

using testing::code_of;

SaliencyMap from(int r, std::vector<double> v) {
    SaliencyMap m(r);
    m.values = std::move(v);
    return m;
}

SaliencyMap random_map(std::mt19937& gen, int r) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SaliencyMap m(r);
    for (auto& v : m.values) v = u(gen);
    return m;
}

BinaryMask bmask(int h, int w, std::vector<std::uint8_t> v) {
    BinaryMask m(h, w);
    m.values = std::move(v);
    return m;
}

TEST(GaussianSmooth, KernelOneIsIdentity) {
    std::mt19937 gen(5);
    auto m = random_map(gen, 6);
    normalize_min_max(m.values);
    auto s = gaussian_smooth(m, 1, 1.0);
    for (std::size_t i = 0; i < m.values.size(); ++i) EXPECT_NEAR(s.values[i], m.values[i], 1e-15);
}

TEST(GaussianSmooth, DeltaSpreadsToNeighborhood) {
    SaliencyMap m(5);
    m.at(2, 2) = 1.0;
    auto s = gaussian_smooth(m, 3, 1.0);
    const double edge = std::exp(-0.5), corner = std::exp(-1.0);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) {
            const int dy = std::abs(y - 2), dx = std::abs(x - 2);
            double expected = 0.0;
            if (dy <= 1 && dx <= 1) expected = dy + dx == 0 ? 1.0 : dy + dx == 1 ? edge : corner;
            EXPECT_NEAR(s.at(y, x), expected, 1e-12) << y << "," << x;
        }
    }
}

TEST(GaussianSmooth, MatchesDirectConvolutionIncludingBorders) {
    std::mt19937 gen(6);
    for (int r : {1, 2, 3, 7, 16}) {
        for (int k : {3, 5}) {
            auto m = random_map(gen, r);
            auto s = gaussian_smooth(m, k, 1.3);
            auto expected = oracle::gaussian_filter(m.values, r, k, 1.3);
            for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(s.values[i], expected[i], 1e-12);
        }
    }
}

TEST(GaussianSmooth, ConstantBecomesZero) {
    auto s = gaussian_smooth(SaliencyMap(4, 0.3), 3, 1.0);
    for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(GaussianSmooth, BadKernel) {
    SaliencyMap m(4);
    EXPECT_EQ(code_of([&] { gaussian_smooth(m, 2, 1.0); }), ErrorCode::BadKernel);
    EXPECT_EQ(code_of([&] { gaussian_smooth(m, 0, 1.0); }), ErrorCode::BadKernel);
    EXPECT_EQ(code_of([&] { gaussian_smooth(m, 3, 0.0); }), ErrorCode::BadKernel);
}

TEST(Enhance, SingleRoundExample) {
    auto e = enhance(from(2, {0.5, 1.0, 0.0, 0.25}), 1);
    EXPECT_EQ(e.values, (std::vector<double>{0.25, 1.0, 0.0, 0.0625}));
}

TEST(Enhance, BinaryMapsAreFixedPoints) {
    std::mt19937 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        SaliencyMap m(8);
        for (auto& v : m.values) v = static_cast<double>(gen() % 2);
        m.values[0] = 0.0;
        m.values[1] = 1.0;
        for (int gamma : {1, 3, 10}) EXPECT_EQ(enhance(m, gamma).values, m.values);
    }
}

TEST(Enhance, ConstantMapIsZero) {
    for (double v : enhance(SaliencyMap(3, 0.7), 3).values) EXPECT_EQ(v, 0.0);
}

TEST(Enhance, PreservesRankingAndRange) {
    std::mt19937 gen(8);
    for (int trial = 0; trial < 100; ++trial) {
        auto m = random_map(gen, 16);
        normalize_min_max(m.values);
        auto e = enhance(m, 3);
        EXPECT_DOUBLE_EQ(*std::max_element(e.values.begin(), e.values.end()), 1.0);
        EXPECT_DOUBLE_EQ(*std::min_element(e.values.begin(), e.values.end()), 0.0);
        const auto am = std::max_element(m.values.begin(), m.values.end()) - m.values.begin();
        const auto ae = std::max_element(e.values.begin(), e.values.end()) - e.values.begin();
        EXPECT_EQ(am, ae);
        for (std::size_t i = 1; i < m.values.size(); ++i) {
            if (m.values[i] >= m.values[i - 1]) EXPECT_GE(e.values[i], e.values[i - 1]);
            else EXPECT_LE(e.values[i], e.values[i - 1]);
        }
    }
}

TEST(Binarize, Example) {
    auto b = binarize(from(2, {0.25, 1.0, 0.0, 0.0625}), 0.5);
    EXPECT_EQ(b.values, (std::vector<std::uint8_t>{0, 1, 0, 0}));
}

TEST(Binarize, NonConstantEnhancedMapIsNonEmpty) {
    std::mt19937 gen(9);
    for (int trial = 0; trial < 20; ++trial) {
        auto e = enhance(random_map(gen, 8), 3);
        EXPECT_GT(binarize(e, 0.7).count(), 0u);
    }
    EXPECT_EQ(binarize(SaliencyMap(4), 0.4).count(), 0u);
}

TEST(Binarize, ShrinksAsTauGrows) {
    std::mt19937 gen(10);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        auto e = enhance(random_map(gen, 16), 3);
        double t1 = u(gen), t2 = u(gen);
        if (t1 > t2) std::swap(t1, t2);
        auto m1 = binarize(e, t1), m2 = binarize(e, t2);
        for (std::size_t i = 0; i < m1.values.size(); ++i) EXPECT_LE(m2.values[i], m1.values[i]);
    }
}

TEST(ChooseTaus, FixedSeededAndDefault) {
    ExtractionParams p;
    EXPECT_EQ(choose_taus(p, 2), (std::vector<double>{0.55, 0.55}));
    p.rng_seed = 11;
    auto a = choose_taus(p, 5);
    EXPECT_EQ(a, choose_taus(p, 5));
    for (double t : a) {
        EXPECT_GE(t, 0.4);
        EXPECT_LT(t, 0.7);
    }
    EXPECT_NE(a[0], a[1]);
    p.tau = 0.6;
    EXPECT_EQ(choose_taus(p, 3), (std::vector<double>{0.6, 0.6, 0.6}));
}

TEST(ExtractMasks, BlobMatchesOracle) {
    ExtractionParams params;
    params.tau = 0.55;
    const auto ins = oracle::single_keyword_instruction();
    for (auto [cy, cx] : std::vector<std::pair<double, double>>{{7.5, 7.5}, {3.2, 11.7}, {0.4, 0.0}, {12.0, 5.6}}) {
        const auto saliency = oracle::blob(16, cy, cx, 2.0);
        auto masks = extract_masks(oracle::saliency_session(saliency, 16), ins, params);
        ASSERT_EQ(masks.size(), 1u);
        EXPECT_EQ(masks[0].keyword, "hat");
        EXPECT_EQ(masks[0].tau, 0.55);
        auto normalized = saliency;
        oracle::min_max(normalized);
        auto expected = oracle::enhance_threshold(oracle::gaussian_filter(normalized, 16, 3, 1.0), 3, 0.55);
        EXPECT_EQ(masks[0].values.values, expected) << cy << "," << cx;
    }
}

TEST(ExtractMasks, OneMaskPerSubInOrderAndDeterministic) {
    std::mt19937 gen(12);
    AttentionRecord rec;
    rec.layer = {"l", 16};
    rec.probs = AttentionTensor(2, 256, 4);
    rec.logits = rec.probs;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int h = 0; h < 2; ++h)
        for (int p = 0; p < 256; ++p) {
            double sum = 0.0;
            for (int j = 0; j < 4; ++j) sum += rec.probs.at(h, p, j) = u(gen);
            for (int j = 0; j < 4; ++j) rec.probs.at(h, p, j) /= sum;
        }
    CaptureSession s({Branch::Full}, {16});
    s.observe(rec);
    Instruction ins;
    ins.subs.resize(2);
    ins.subs[0].keyword = "hat";
    ins.subs[1].keyword = "sunset";
    ins.token_count = 4;
    ins.token_spans = {{0, 2}, {2, 4}};
    ins.keyword_token_indices = {{1}, {3}};
    ExtractionParams params;
    params.rng_seed = 99;
    auto a = extract_masks(s, ins, params);
    auto b = extract_masks(s, ins, params);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].keyword, "hat");
    EXPECT_EQ(a[1].sub_index, 1);
    EXPECT_EQ(a[0].values, b[0].values);
    EXPECT_EQ(a[1].values, b[1].values);
    EXPECT_EQ(a[0].tau, b[0].tau);
}

TEST(ResizeNearest, UpsampleQuadrant) {
    auto r = resize_nearest(bmask(2, 2, {1, 0, 0, 0}), 4, 4);
    EXPECT_EQ(r.values, (std::vector<std::uint8_t>{1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}));
}

TEST(UnionAndUpsample, OrOfMasks) {
    std::vector<KeywordMask> masks = {{bmask(2, 2, {1, 0, 0, 0}), "a", 0, 0.5}, {bmask(2, 2, {0, 0, 0, 1}), "b", 1, 0.5}};
    EXPECT_EQ(union_and_upsample(masks, 2, 2).values, (std::vector<std::uint8_t>{1, 0, 0, 1}));
}

TEST(UnionAndUpsample, SingleMaskEqualsItsUpsample) {
    std::vector<KeywordMask> masks = {{bmask(2, 2, {1, 0, 0, 0}), "a", 0, 0.5}};
    EXPECT_EQ(union_and_upsample(masks, 4, 4), resize_nearest(masks[0].values, 4, 4));
}

TEST(UnionAndUpsample, OrderInvariantAndBinary) {
    std::mt19937 gen(13);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<KeywordMask> masks(3);
        for (auto& m : masks) {
            m.values = BinaryMask(16, 16);
            for (auto& v : m.values.values) v = gen() % 5 == 0;
        }
        auto a = union_and_upsample(masks, 32, 32);
        std::shuffle(masks.begin(), masks.end(), gen);
        EXPECT_EQ(union_and_upsample(masks, 32, 32), a);
        for (auto v : a.values) EXPECT_LE(v, 1);
    }
}

TEST(UnionAndUpsample, EmptyList) {
    EXPECT_EQ(code_of([] { union_and_upsample({}, 4, 4); }), ErrorCode::EmptyMaskList);
}

}  // namespace
}  // namespace foi
