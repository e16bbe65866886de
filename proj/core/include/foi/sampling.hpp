#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "foi/backend.hpp"
#include "foi/instruction.hpp"
#include "foi/mask.hpp"
#include "foi/types.hpp"

namespace foi {

struct NoiseTriple {
    Latent uncond;  // eps(z, t, null image, null text)
    Latent image;   // eps(z, t, image, null text)
    Latent full;    // eps(z, t, image, instruction)
};

struct GuidanceParams {
    double image_scale = 1.5;
    double text_scale = 7.5;
};

enum class Phase { Disentangle, Vanilla };

std::string_view phase_name(Phase phase);

struct Schedule {
    int configured_steps = 100;
    double noise_start_fraction = 0.8;
    double disentangle_fraction = 0.75;
    int effective_steps = 0;
    int disentangle_cutoff = 0;
    double max_timestep = 1000.0;
    std::vector<double> timesteps;  // effective_steps entries, descending
    std::vector<double> sigmas;     // effective_steps + 1 entries, last is 0

    Phase phase(int step) const { return step < disentangle_cutoff ? Phase::Disentangle : Phase::Vanilla; }
    double t_norm(int step) const { return timesteps[static_cast<std::size_t>(step)] / max_timestep; }
};

// uncond + image_scale (image - uncond) + text_scale (full - image)
Latent combine_vanilla(const NoiseTriple& triple, const GuidanceParams& guidance);

// uncond + image_scale (image - uncond) + text_scale (full - image) * mask, with the
// mask broadcast over channels.
Latent combine_disentangled(const NoiseTriple& triple, const GuidanceParams& guidance, const BinaryMask& union_mask);

// configured_steps timesteps spaced evenly over the training range; the last
// round(configured_steps * noise_start_fraction) are run, and the first
// floor(effective * disentangle_fraction) of those use the masked estimate.
Schedule make_schedule(int configured_steps, double noise_start_fraction, double disentangle_fraction,
                       const DenoiserBackend& backend);

struct StepRecord {
    int index = 0;
    double timestep = 0.0;
    double sigma = 0.0;
    double t_norm = 0.0;
    double xi = 0.0;
    Phase phase = Phase::Vanilla;
    bool modulated = false;
};

// Optional taps into a sampling run.
class SampleObserver {
public:
    virtual ~SampleObserver() = default;
    // Every cross-attention record of every branch; `modulated` is true for
    // FULL passes that ran with cross-condition modulation.
    virtual void on_attention(int /*step*/, const AttentionRecord& /*record*/, bool /*modulated*/) {}
    virtual void on_masks(const std::vector<KeywordMask>& /*masks*/, const BinaryMask& /*union_mask*/) {}
    virtual void on_estimate(int /*step*/, const NoiseTriple& /*triple*/, const Latent& /*combined*/) {}
};

struct SampleResult {
    Latent latent;
    std::vector<KeywordMask> masks;
    BinaryMask union_mask;
    std::vector<StepRecord> steps;
    std::vector<std::string> warnings;
};

// Euler-ancestral sampling from the image latent noised to the schedule's
// first sigma. Masks are extracted from an unmodulated FULL pass at step 0;
// from then on every FULL pass is modulated. An instruction without
// sub-instructions runs plain guidance with an all-ones union mask.
SampleResult sample(const DenoiserBackend& backend, const Latent& image_latent, const Instruction& instruction,
                    const Schedule& schedule, const GuidanceParams& guidance, const ExtractionParams& extraction,
                    std::uint64_t seed, SampleObserver* observer = nullptr);

}  // namespace foi
