#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foi/capture.hpp"
#include "foi/instruction.hpp"
#include "foi/types.hpp"

namespace foi {

inline constexpr double kTauRangeLow = 0.4;
inline constexpr double kTauRangeHigh = 0.7;
inline constexpr double kDeterministicTau = 0.55;

struct KeywordMask {
    BinaryMask values;
    std::string keyword;
    int sub_index = 0;
    double tau = 0.0;
};

struct ExtractionParams {
    int gamma = 3;
    std::optional<double> tau;  // unset: sampled per keyword from [0.4, 0.7] when seeded, else 0.55
    int gaussian_kernel = 3;
    double gaussian_sigma = 1.0;
    std::optional<std::uint64_t> rng_seed;
    int resolution = 16;

    void validate() const;
};

// Separable Gaussian convolution with reflect padding, then min-max normalization.
SaliencyMap gaussian_smooth(const SaliencyMap& map, int kernel, double sigma);

// gamma rounds of (square, min-max normalize).
SaliencyMap enhance(const SaliencyMap& map, int gamma);

// 1 where value >= tau.
BinaryMask binarize(const SaliencyMap& map, double tau);

// Threshold per keyword, in sub order.
std::vector<double> choose_taus(const ExtractionParams& params, std::size_t count);

// keyword_map -> gaussian_smooth -> enhance -> binarize for each sub-instruction,
// from the FULL-branch maps at params.resolution for the session's current step.
std::vector<KeywordMask> extract_masks(const CaptureSession& session, const Instruction& instruction,
                                       const ExtractionParams& params);

BinaryMask resize_nearest(const BinaryMask& mask, int height, int width);

// Logical OR of all keyword masks, nearest-neighbor upsampled to latent size.
BinaryMask union_and_upsample(std::span<const KeywordMask> masks, int latent_height, int latent_width);

}  // namespace foi
