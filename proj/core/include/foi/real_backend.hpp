#pragma once

#include <optional>
#include <string>

#include "foi/backend.hpp"

namespace foi {

// Environment variable naming a local directory with pretrained
// instruction-editing weights in the diffusers layout (tokenizer/vocab.json,
// tokenizer/merges.txt, unet/, vae/, text_encoder/).
inline constexpr const char* kWeightsEnvVar = "FOI_IP2P_WEIGHTS";

std::optional<std::string> weights_dir_from_env();

// Adapter contract for a Stable-Diffusion-1.x instruction-editing UNet:
// 512x512 RGB in, 4x64x64 latents, 77 CLIP tokens, 1000 training timesteps,
// 16 cross-attention layers (8 heads each) at resolutions 64/32/16/8.
// Branch mapping: UNCOND = (zero image latent, empty prompt), IMAGE_ONLY =
// (image latent, empty prompt), FULL = (image latent, instruction).
//
// The tokenizer, schedule and layer enumeration are implemented here. The
// network forward passes need a UNet/VAE runtime, which this build does not
// link; encode/decode/predict raise BackendUnavailable.
class Ip2pAdapterBackend final : public DenoiserBackend {
public:
    explicit Ip2pAdapterBackend(const std::string& weights_dir);

    static std::vector<LayerKey> sd15_cross_attention_layers();
    static int head_dim_for(int resolution);

    std::string name() const override { return "real"; }
    LatentShape latent_shape() const override { return {4, 64, 64}; }
    int codec_factor() const override { return 8; }
    const Tokenizer& tokenizer() const override { return tokenizer_; }
    double max_timestep() const override { return 1000.0; }
    const NoiseSchedule& noise_schedule() const override { return schedule_; }
    const std::vector<LayerKey>& cross_attention_layers() const override { return layers_; }

    Latent encode_image(const Image& image) const override;
    Image decode_latent(const Latent& latent) const override;
    Latent predict(const PredictRequest& request, const ForwardHooks& hooks) const override;

private:
    std::string weights_dir_;
    ClipBpeTokenizer tokenizer_;
    NoiseSchedule schedule_;
    std::vector<LayerKey> layers_;
};

}  // namespace foi
