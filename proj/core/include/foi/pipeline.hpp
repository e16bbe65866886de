#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "foi/backend.hpp"
#include "foi/instruction.hpp"
#include "foi/mask.hpp"
#include "foi/sampling.hpp"

namespace foi {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct EditRequest {
    std::string image_path;
    std::string output_path;  // empty: do not write the output image
    std::string instruction;
    std::vector<SubSpec> subs;
    GuidanceParams guidance;
    ExtractionParams extraction;  // rng_seed defaults to `seed` when tau is unset
    int steps = 100;
    double noise_start = 0.8;
    double disentangle_fraction = 0.75;
    std::uint64_t seed = kDefaultSeed;
    std::string backend = "toy";
    std::optional<std::string> dump_dir;

    void validate() const;
};

struct EditResult {
    Image output;
    std::vector<KeywordMask> masks;
    BinaryMask union_mask;
    std::vector<StepRecord> steps;
    // Per sub-instruction: mean FULL-branch attention probability of its
    // keyword tokens over in-mask pixels (all layers and heads) at the first
    // modulated step. NaN when the mask is empty at every layer.
    std::vector<double> keyword_attention;
    int original_width = 0;
    int original_height = 0;
    int working_width = 0;
    int working_height = 0;
    double seconds = 0.0;
    std::vector<std::string> warnings;
};

// Builds the backend named in the request and runs the edit.
EditResult edit(const EditRequest& request);

// Reads request.image_path, resizes to the backend's native resolution, samples,
// decodes, restores the original size and writes request.output_path and dumps.
EditResult edit(const EditRequest& request, const DenoiserBackend& backend, SampleObserver* observer = nullptr);

// Same pipeline on an in-memory image; no output file is written.
EditResult edit_image(const Image& input, const EditRequest& request, const DenoiserBackend& backend,
                      SampleObserver* observer = nullptr);

}  // namespace foi
