#include "foi/real_backend.hpp"

#include <cstdlib>
#include <filesystem>

#include "foi/error.hpp"
#include "foi/toy_backend.hpp"

namespace foi {

namespace {

ClipBpeTokenizer load_tokenizer(const std::string& dir) {
    namespace fs = std::filesystem;
    fs::path root(dir);
    if (!fs::is_directory(root)) throw Error(ErrorCode::BackendUnavailable, "weights directory '" + dir + "' not found");
    return ClipBpeTokenizer::from_files((root / "tokenizer" / "vocab.json").string(),
                                        (root / "tokenizer" / "merges.txt").string(), 77);
}

[[noreturn]] void no_runtime(const char* what) {
    throw Error(ErrorCode::BackendUnavailable,
                std::string(what) + " needs a UNet/VAE inference runtime, which this build does not link");
}

}  // namespace

std::optional<std::string> weights_dir_from_env() {
    const char* v = std::getenv(kWeightsEnvVar);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

Ip2pAdapterBackend::Ip2pAdapterBackend(const std::string& weights_dir)
    : weights_dir_(weights_dir),
      tokenizer_(load_tokenizer(weights_dir)),
      schedule_(NoiseSchedule::scaled_linear(1000)),
      layers_(sd15_cross_attention_layers()) {}

std::vector<LayerKey> Ip2pAdapterBackend::sd15_cross_attention_layers() {
    return {
        {"down_blocks.0.attentions.0.transformer_blocks.0.attn2", 64},
        {"down_blocks.0.attentions.1.transformer_blocks.0.attn2", 64},
        {"down_blocks.1.attentions.0.transformer_blocks.0.attn2", 32},
        {"down_blocks.1.attentions.1.transformer_blocks.0.attn2", 32},
        {"down_blocks.2.attentions.0.transformer_blocks.0.attn2", 16},
        {"down_blocks.2.attentions.1.transformer_blocks.0.attn2", 16},
        {"mid_block.attentions.0.transformer_blocks.0.attn2", 8},
        {"up_blocks.1.attentions.0.transformer_blocks.0.attn2", 16},
        {"up_blocks.1.attentions.1.transformer_blocks.0.attn2", 16},
        {"up_blocks.1.attentions.2.transformer_blocks.0.attn2", 16},
        {"up_blocks.2.attentions.0.transformer_blocks.0.attn2", 32},
        {"up_blocks.2.attentions.1.transformer_blocks.0.attn2", 32},
        {"up_blocks.2.attentions.2.transformer_blocks.0.attn2", 32},
        {"up_blocks.3.attentions.0.transformer_blocks.0.attn2", 64},
        {"up_blocks.3.attentions.1.transformer_blocks.0.attn2", 64},
        {"up_blocks.3.attentions.2.transformer_blocks.0.attn2", 64},
    };
}

int Ip2pAdapterBackend::head_dim_for(int resolution) {
    // 320/640/1280/1280 channels split over 8 heads.
    switch (resolution) {
        case 64: return 40;
        case 32: return 80;
        case 16: return 160;
        case 8: return 160;
        default: throw Error(ErrorCode::UnsupportedResolution, "no SD1.x layer at r=" + std::to_string(resolution));
    }
}

Latent Ip2pAdapterBackend::encode_image(const Image&) const { no_runtime("encode_image"); }
Image Ip2pAdapterBackend::decode_latent(const Latent&) const { no_runtime("decode_latent"); }
Latent Ip2pAdapterBackend::predict(const PredictRequest&, const ForwardHooks&) const { no_runtime("predict"); }

std::unique_ptr<DenoiserBackend> make_backend(const std::string& name, std::uint64_t weight_seed) {
    if (name == "toy") {
        ToyBackendConfig config;
        config.seed = weight_seed;
        return std::make_unique<ToyBackend>(config);
    }
    if (name == "real") {
        auto dir = weights_dir_from_env();
        if (!dir) {
            throw Error(ErrorCode::BackendUnavailable,
                        std::string("the real backend needs ") + kWeightsEnvVar + " to point at local weights");
        }
        return std::make_unique<Ip2pAdapterBackend>(*dir);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown backend '" + name + "' (expected toy or real)");
}

}  // namespace foi
