#include "foi/mask.hpp"

#include <cmath>

#include "foi/error.hpp"
#include "foi/random.hpp"

namespace foi {

namespace {

// Mirror without repeating the edge sample: -1 -> 1, n -> n - 2.
int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

}  // namespace

void ExtractionParams::validate() const {
    if (gamma < 1) throw Error(ErrorCode::InvalidArgument, "gamma must be a positive integer");
    if (tau && !(*tau > 0.0 && *tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 1]");
    if (gaussian_kernel < 1 || gaussian_kernel % 2 == 0) throw Error(ErrorCode::BadKernel, "kernel must be odd and >= 1");
    if (!(gaussian_sigma > 0.0)) throw Error(ErrorCode::BadKernel, "sigma must be positive");
    if (resolution < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
}

SaliencyMap gaussian_smooth(const SaliencyMap& map, int kernel, double sigma) {
    if (kernel < 1 || kernel % 2 == 0) throw Error(ErrorCode::BadKernel, "kernel must be odd and >= 1");
    if (!(sigma > 0.0)) throw Error(ErrorCode::BadKernel, "sigma must be positive");

    const int radius = kernel / 2;
    std::vector<double> weights(static_cast<std::size_t>(kernel));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        weights[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        total += weights[static_cast<std::size_t>(i + radius)];
    }
    for (auto& w : weights) w /= total;

    const int n = map.side;
    SaliencyMap horizontal(n), out(n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += weights[static_cast<std::size_t>(i + radius)] * map.at(y, reflect_index(x + i, n));
            horizontal.at(y, x) = acc;
        }
    }
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += weights[static_cast<std::size_t>(i + radius)] * horizontal.at(reflect_index(y + i, n), x);
            out.at(y, x) = acc;
        }
    }
    normalize_min_max(out.values);
    return out;
}

SaliencyMap enhance(const SaliencyMap& map, int gamma) {
    if (gamma < 0) throw Error(ErrorCode::InvalidArgument, "gamma must be nonnegative");
    SaliencyMap out = map;
    for (int round = 0; round < gamma; ++round) {
        for (auto& v : out.values) v *= v;
        normalize_min_max(out.values);
    }
    return out;
}

BinaryMask binarize(const SaliencyMap& map, double tau) {
    BinaryMask mask(map.side, map.side);
    for (std::size_t i = 0; i < map.values.size(); ++i) mask.values[i] = map.values[i] >= tau ? 1 : 0;
    return mask;
}

std::vector<double> choose_taus(const ExtractionParams& params, std::size_t count) {
    if (params.tau) return std::vector<double>(count, *params.tau);
    if (!params.rng_seed) return std::vector<double>(count, kDeterministicTau);
    Rng rng(*params.rng_seed);
    std::vector<double> taus(count);
    for (auto& t : taus) t = rng.uniform(kTauRangeLow, kTauRangeHigh);
    return taus;
}

std::vector<KeywordMask> extract_masks(const CaptureSession& session, const Instruction& instruction,
                                       const ExtractionParams& params) {
    params.validate();
    if (instruction.keyword_token_indices.size() != instruction.subs.size()) {
        throw Error(ErrorCode::SpanUnresolvable, "instruction token spans are not resolved");
    }
    std::vector<KeywordMask> masks;
    if (instruction.subs.empty()) return masks;

    const AveragedMap averaged = averaged_map(session, params.resolution, Branch::Full);
    const auto taus = choose_taus(params, instruction.subs.size());
    for (std::size_t i = 0; i < instruction.subs.size(); ++i) {
        SaliencyMap saliency = keyword_map(averaged, instruction.keyword_token_indices[i]);
        saliency = gaussian_smooth(saliency, params.gaussian_kernel, params.gaussian_sigma);
        saliency = enhance(saliency, params.gamma);
        masks.push_back({binarize(saliency, taus[i]), instruction.subs[i].keyword, static_cast<int>(i), taus[i]});
    }
    return masks;
}

BinaryMask resize_nearest(const BinaryMask& mask, int height, int width) {
    if (height < 1 || width < 1) throw Error(ErrorCode::InvalidArgument, "target size must be positive");
    BinaryMask out(height, width);
    for (int y = 0; y < height; ++y) {
        const int sy = static_cast<int>(static_cast<long long>(y) * mask.height / height);
        for (int x = 0; x < width; ++x) {
            const int sx = static_cast<int>(static_cast<long long>(x) * mask.width / width);
            out.at(y, x) = mask.at(sy, sx);
        }
    }
    return out;
}

BinaryMask union_and_upsample(std::span<const KeywordMask> masks, int latent_height, int latent_width) {
    if (masks.empty()) throw Error(ErrorCode::EmptyMaskList, "union needs at least one mask");
    const BinaryMask& first = masks.front().values;
    BinaryMask combined(first.height, first.width);
    for (const auto& m : masks) {
        if (m.values.height != first.height || m.values.width != first.width) {
            throw Error(ErrorCode::ShapeMismatch, "keyword masks differ in size");
        }
        for (std::size_t i = 0; i < combined.values.size(); ++i) combined.values[i] |= m.values.values[i];
    }
    return resize_nearest(combined, latent_height, latent_width);
}

}  // namespace foi
