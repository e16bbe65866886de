#pragma once

#include <cstdint>
#include <vector>

#include "foi/backend.hpp"

namespace foi {

struct ToyBackendConfig {
    std::uint64_t seed = 0;
    LatentShape latent{4, 16, 16};
    int token_length = 16;
    int vocab_size = 1024;
    int heads = 2;
    int head_dim = 32;        // d in the 1/sqrt(d) attention scaling
    int value_dim = 16;
    int feature_dim = 32;
    int embed_dim = 32;
    int codec_factor = 8;
    double max_timestep = 1000.0;
};

// Desk-scale stand-in for an instruction-editing denoiser.
//
// Weights are drawn from Rng(config.seed) as standard normals in this order:
// token embeddings (vocab x E), positional embeddings (N x E), input
// projection (F x K, noisy-latent columns scaled by 0.1 and image columns
// by 2) and bias (F), then per cross-attention layer
// {Wq per head (d x F), Wk per head (d x E), Wv per head (dv x E), Wo (F x heads*dv)},
// and finally the output projection (C x F). Each matrix is scaled by a fixed
// gain / sqrt(fan_in).
//
// Forward pass for a latent z at noise level sigma:
//   f(p)  = [z(p) / sqrt(sigma^2 + 1), cond(p), 8 low-frequency positional features, sin/cos time]
//   h     = tanh(W_in f + b)                       at 16x16
//   h    += cross_attention_16(h, text)            layer "down.attn"
//   h    += upsample(cross_attention_8(pool(h)))   layer "mid.attn"
//   x0    = cond + 0.5 * tanh(W_out h)
//   eps   = 4 tanh((z - x0) / (4 sigma))
// cond is the image latent (zeros for UNCOND); text is the instruction's
// embedded token ids (the null instruction for UNCOND and IMAGE_ONLY).
//
// Codec: 8x average pooling of RGB mapped to [-1, 1]; channel 3 carries the
// mean of RGB. Decoding is nearest-neighbor upsampling of channels 0-2, so it
// is exact on 8x8 block-constant images.
class ToyBackend final : public DenoiserBackend {
public:
    explicit ToyBackend(ToyBackendConfig config = {});

    std::string name() const override { return "toy"; }
    LatentShape latent_shape() const override { return config_.latent; }
    int codec_factor() const override { return config_.codec_factor; }
    const Tokenizer& tokenizer() const override { return tokenizer_; }
    double max_timestep() const override { return config_.max_timestep; }
    const NoiseSchedule& noise_schedule() const override { return schedule_; }
    const std::vector<LayerKey>& cross_attention_layers() const override { return layers_; }

    Latent encode_image(const Image& image) const override;
    Image decode_latent(const Latent& latent) const override;
    Latent predict(const PredictRequest& request, const ForwardHooks& hooks) const override;

    const ToyBackendConfig& config() const { return config_; }

private:
    struct AttentionWeights {
        std::vector<double> wq, wk, wv, wo;
    };

    std::vector<double> embed_text(std::span<const int> ids) const;
    std::vector<double> cross_attention(std::size_t layer_index, const std::vector<double>& features, int side,
                                        const std::vector<double>& text, Branch branch, int step_index,
                                        const ForwardHooks& hooks) const;

    ToyBackendConfig config_;
    WhitespaceHashTokenizer tokenizer_;
    NoiseSchedule schedule_;
    std::vector<LayerKey> layers_;
    std::vector<int> null_ids_;

    int input_dim_ = 0;
    std::vector<double> token_embedding_;
    std::vector<double> position_embedding_;
    std::vector<double> w_in_, b_in_;
    std::vector<AttentionWeights> attention_;
    std::vector<double> w_out_;
};

}  // namespace foi
