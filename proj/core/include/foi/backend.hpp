#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foi/attention.hpp"
#include "foi/noise_schedule.hpp"
#include "foi/tokenizer.hpp"
#include "foi/types.hpp"

namespace foi {

// Called by the FULL branch at every cross-attention layer with the raw logits.
// Returning a tensor replaces the layer's attention probabilities.
using ModulationHook =
    std::function<std::optional<AttentionTensor>(const LayerKey& layer, const AttentionTensor& logits, double scale_dim)>;
using CaptureHook = std::function<void(const AttentionRecord&)>;

struct ForwardHooks {
    ModulationHook modulate;
    CaptureHook capture;
};

struct PredictRequest {
    Branch branch;
    const Latent& z;
    double timestep;
    double sigma;
    int step_index;
    const Latent& image_latent;
    std::span<const int> token_ids;
};

class DenoiserBackend {
public:
    virtual ~DenoiserBackend() = default;

    virtual std::string name() const = 0;
    virtual LatentShape latent_shape() const = 0;
    virtual int codec_factor() const = 0;
    int image_width() const { return latent_shape().width * codec_factor(); }
    int image_height() const { return latent_shape().height * codec_factor(); }

    virtual const Tokenizer& tokenizer() const = 0;
    int token_length() const { return tokenizer().length(); }
    // Training-schedule maximum used to normalize timesteps to [0, 1].
    virtual double max_timestep() const = 0;
    virtual const NoiseSchedule& noise_schedule() const = 0;
    virtual const std::vector<LayerKey>& cross_attention_layers() const = 0;

    virtual Latent encode_image(const Image& image) const = 0;
    virtual Image decode_latent(const Latent& latent) const = 0;

    // Deterministic noise estimate. UNCOND ignores image_latent and token_ids;
    // IMAGE_ONLY ignores token_ids (uses the null instruction).
    virtual Latent predict(const PredictRequest& request, const ForwardHooks& hooks) const = 0;

    bool has_resolution(int r) const;
};

std::unique_ptr<DenoiserBackend> make_backend(const std::string& name, std::uint64_t weight_seed = 0);

}  // namespace foi
