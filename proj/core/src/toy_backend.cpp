#include "foi/toy_backend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "foi/error.hpp"
#include "foi/random.hpp"

namespace foi {

namespace {

constexpr int kPositionalFeatures = 8;
constexpr int kTimeFeatures = 2;
constexpr double kQueryGain = 3.0;
constexpr double kNoisyLatentGain = 0.1;
constexpr double kImageGain = 2.0;

std::vector<double> normal_matrix(Rng& rng, std::size_t rows, std::size_t cols, double gain) {
    std::vector<double> m(rows * cols);
    const double scale = gain / std::sqrt(static_cast<double>(cols));
    for (auto& v : m) v = rng.normal() * scale;
    return m;
}

// y (rows) = W (rows x cols) * x (cols)
void matvec(const std::vector<double>& w, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* wr = w.data() + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

}  // namespace

ToyBackend::ToyBackend(ToyBackendConfig config)
    : config_(config),
      tokenizer_(config.token_length, config.vocab_size),
      schedule_(NoiseSchedule::scaled_linear(static_cast<int>(config.max_timestep))) {
    const auto& lat = config_.latent;
    if (lat.height != lat.width || lat.height % 2 != 0 || lat.channels < 1) {
        throw Error(ErrorCode::InvalidArgument, "toy backend needs a square latent with even side");
    }
    layers_ = {{"down.attn", lat.height}, {"mid.attn", lat.height / 2}};
    null_ids_ = tokenizer_.tokenize("").ids;

    input_dim_ = 2 * lat.channels + kPositionalFeatures + kTimeFeatures;
    const std::size_t E = config_.embed_dim, F = config_.feature_dim, N = config_.token_length;
    const std::size_t H = config_.heads, D = config_.head_dim, DV = config_.value_dim;

    Rng rng(config_.seed);
    token_embedding_ = normal_matrix(rng, config_.vocab_size, E, std::sqrt(static_cast<double>(E)));
    position_embedding_ = normal_matrix(rng, N, E, std::sqrt(static_cast<double>(E)));
    w_in_ = normal_matrix(rng, F, input_dim_, 1.5);
    // Queries follow image content and position more than the noisy latent.
    for (std::size_t r = 0; r < F; ++r) {
        for (int c = 0; c < input_dim_; ++c) {
            const double gain = c < lat.channels ? kNoisyLatentGain : (c < 2 * lat.channels ? kImageGain : 1.0);
            w_in_[r * input_dim_ + static_cast<std::size_t>(c)] *= gain;
        }
    }
    b_in_ = normal_matrix(rng, F, 1, 0.5);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        AttentionWeights w;
        w.wq = normal_matrix(rng, H * D, F, kQueryGain);
        w.wk = normal_matrix(rng, H * D, E, 1.0);
        w.wv = normal_matrix(rng, H * DV, E, 1.0);
        w.wo = normal_matrix(rng, F, H * DV, 1.0);
        attention_.push_back(std::move(w));
    }
    w_out_ = normal_matrix(rng, lat.channels, F, 1.5);
}

std::vector<double> ToyBackend::embed_text(std::span<const int> ids) const {
    const std::size_t E = config_.embed_dim;
    std::vector<double> text(ids.size() * E);
    for (std::size_t j = 0; j < ids.size(); ++j) {
        if (ids[j] < 0 || ids[j] >= config_.vocab_size) {
            throw Error(ErrorCode::InvalidArgument, "token id " + std::to_string(ids[j]) + " outside toy vocabulary");
        }
        const double* tok = token_embedding_.data() + static_cast<std::size_t>(ids[j]) * E;
        const double* pos = position_embedding_.data() + j * E;
        for (std::size_t e = 0; e < E; ++e) text[j * E + e] = tok[e] + pos[e];
    }
    return text;
}

std::vector<double> ToyBackend::cross_attention(std::size_t layer_index, const std::vector<double>& features, int side,
                                                const std::vector<double>& text, Branch branch, int step_index,
                                                const ForwardHooks& hooks) const {
    const auto& w = attention_[layer_index];
    const std::size_t F = config_.feature_dim, E = config_.embed_dim;
    const std::size_t H = config_.heads, D = config_.head_dim, DV = config_.value_dim;
    const std::size_t N = config_.token_length;
    const std::size_t P = static_cast<std::size_t>(side) * side;

    std::vector<double> q(P * H * D), k(N * H * D), v(N * H * DV);
    for (std::size_t p = 0; p < P; ++p) matvec(w.wq, H * D, F, features.data() + p * F, q.data() + p * H * D);
    for (std::size_t j = 0; j < N; ++j) {
        matvec(w.wk, H * D, E, text.data() + j * E, k.data() + j * H * D);
        matvec(w.wv, H * DV, E, text.data() + j * E, v.data() + j * H * DV);
    }

    AttentionTensor logits(static_cast<int>(H), static_cast<int>(P), static_cast<int>(N));
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t p = 0; p < P; ++p) {
            const double* qp = q.data() + p * H * D + h * D;
            for (std::size_t j = 0; j < N; ++j) {
                const double* kj = k.data() + j * H * D + h * D;
                double acc = 0.0;
                for (std::size_t i = 0; i < D; ++i) acc += qp[i] * kj[i];
                logits.at(static_cast<int>(h), static_cast<int>(p), static_cast<int>(j)) = acc;
            }
        }
    }

    const LayerKey& key = layers_[layer_index];
    const double scale_dim = static_cast<double>(D);
    std::optional<AttentionTensor> modulated;
    if (branch == Branch::Full && hooks.modulate) {
        modulated = hooks.modulate(key, logits, scale_dim);
        if (modulated && !modulated->same_shape(logits)) {
            throw Error(ErrorCode::ShapeMismatch, "modulation hook returned wrong shape at " + key.name);
        }
    }
    AttentionTensor probs = modulated ? std::move(*modulated) : softmax_rows(logits, scale_dim);

    std::vector<double> mixed(P * H * DV, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t p = 0; p < P; ++p) {
            double* out = mixed.data() + p * H * DV + h * DV;
            for (std::size_t j = 0; j < N; ++j) {
                double a = probs.at(static_cast<int>(h), static_cast<int>(p), static_cast<int>(j));
                const double* vj = v.data() + j * H * DV + h * DV;
                for (std::size_t c = 0; c < DV; ++c) out[c] += a * vj[c];
            }
        }
    }
    std::vector<double> out(P * F);
    for (std::size_t p = 0; p < P; ++p) matvec(w.wo, F, H * DV, mixed.data() + p * H * DV, out.data() + p * F);

    if (hooks.capture) {
        AttentionRecord record{key, branch, step_index, std::move(logits), std::move(probs)};
        hooks.capture(record);
    }
    return out;
}

Latent ToyBackend::predict(const PredictRequest& req, const ForwardHooks& hooks) const {
    const LatentShape shape = config_.latent;
    if (!(req.z.shape == shape)) throw Error(ErrorCode::ShapeMismatch, "z does not match the toy latent shape");
    if (req.branch != Branch::Uncond && !(req.image_latent.shape == shape)) {
        throw Error(ErrorCode::ShapeMismatch, "image latent does not match the toy latent shape");
    }
    if (req.branch == Branch::Full && static_cast<int>(req.token_ids.size()) != config_.token_length) {
        throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(config_.token_length) + " token ids");
    }
    if (!(req.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");

    const int side = shape.height;
    const std::size_t P = static_cast<std::size_t>(side) * side;
    const std::size_t C = shape.channels, F = config_.feature_dim, K = input_dim_;
    const bool use_image = req.branch != Branch::Uncond;
    std::span<const int> ids = req.branch == Branch::Full ? req.token_ids : std::span<const int>(null_ids_);
    const std::vector<double> text = embed_text(ids);

    const double c_in = 1.0 / std::sqrt(req.sigma * req.sigma + 1.0);
    const double t_norm = req.timestep / config_.max_timestep;
    const double pi = std::numbers::pi;

    std::vector<double> h(P * F), f(K);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            std::size_t idx = 0;
            for (std::size_t c = 0; c < C; ++c) f[idx++] = req.z.at(static_cast<int>(c), y, x) * c_in;
            for (std::size_t c = 0; c < C; ++c) f[idx++] = use_image ? req.image_latent.at(static_cast<int>(c), y, x) : 0.0;
            const double u = (x + 0.5) / side, v = (y + 0.5) / side;
            for (double freq : {1.0, 2.0}) {
                f[idx++] = std::sin(freq * pi * u);
                f[idx++] = std::cos(freq * pi * u);
                f[idx++] = std::sin(freq * pi * v);
                f[idx++] = std::cos(freq * pi * v);
            }
            f[idx++] = std::sin(0.5 * pi * t_norm);
            f[idx++] = std::cos(0.5 * pi * t_norm);

            double* hp = h.data() + (static_cast<std::size_t>(y) * side + x) * F;
            matvec(w_in_, F, K, f.data(), hp);
            for (std::size_t i = 0; i < F; ++i) hp[i] = std::tanh(hp[i] + b_in_[i]);
        }
    }

    auto attn_full = cross_attention(0, h, side, text, req.branch, req.step_index, hooks);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += attn_full[i];

    const int half = side / 2;
    std::vector<double> pooled(static_cast<std::size_t>(half) * half * F, 0.0);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double* src = h.data() + (static_cast<std::size_t>(y) * side + x) * F;
            double* dst = pooled.data() + (static_cast<std::size_t>(y / 2) * half + x / 2) * F;
            for (std::size_t i = 0; i < F; ++i) dst[i] += 0.25 * src[i];
        }
    }
    auto attn_half = cross_attention(1, pooled, half, text, req.branch, req.step_index, hooks);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            double* dst = h.data() + (static_cast<std::size_t>(y) * side + x) * F;
            const double* src = attn_half.data() + (static_cast<std::size_t>(y / 2) * half + x / 2) * F;
            for (std::size_t i = 0; i < F; ++i) dst[i] += src[i];
        }
    }

    Latent eps(shape);
    std::vector<double> edit(C);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            matvec(w_out_, C, F, h.data() + (static_cast<std::size_t>(y) * side + x) * F, edit.data());
            for (std::size_t c = 0; c < C; ++c) {
                const int ci = static_cast<int>(c);
                double cond = use_image ? req.image_latent.at(ci, y, x) : 0.0;
                double x0 = cond + 0.5 * std::tanh(edit[c]);
                eps.at(ci, y, x) = 4.0 * std::tanh((req.z.at(ci, y, x) - x0) / (4.0 * req.sigma));
            }
        }
    }
    return eps;
}

Latent ToyBackend::encode_image(const Image& image) const {
    const int factor = config_.codec_factor;
    const LatentShape shape = config_.latent;
    if (image.width % factor != 0 || image.height % factor != 0 || image.width == 0 || image.height == 0) {
        throw Error(ErrorCode::BadDims, "image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                                            " is not divisible by " + std::to_string(factor));
    }
    const int lh = image.height / factor, lw = image.width / factor;
    Latent latent(LatentShape{shape.channels, lh, lw});
    const double inv_area = 1.0 / (factor * factor);
    for (int y = 0; y < lh; ++y) {
        for (int x = 0; x < lw; ++x) {
            double rgb[3] = {0.0, 0.0, 0.0};
            for (int dy = 0; dy < factor; ++dy) {
                for (int dx = 0; dx < factor; ++dx) {
                    for (int c = 0; c < 3; ++c) rgb[c] += image.at(y * factor + dy, x * factor + dx, c) / 127.5 - 1.0;
                }
            }
            for (int c = 0; c < 3; ++c) latent.at(c, y, x) = rgb[c] * inv_area;
            double mean = (latent.at(0, y, x) + latent.at(1, y, x) + latent.at(2, y, x)) / 3.0;
            for (int c = 3; c < shape.channels; ++c) latent.at(c, y, x) = mean;
        }
    }
    return latent;
}

Image ToyBackend::decode_latent(const Latent& latent) const {
    const int factor = config_.codec_factor;
    if (latent.shape.channels < 3) throw Error(ErrorCode::ShapeMismatch, "toy codec needs at least 3 channels");
    Image image(latent.shape.width * factor, latent.shape.height * factor);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double v = (latent.at(c, y / factor, x / factor) + 1.0) * 127.5;
                image.at(y, x, c) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return image;
}

bool DenoiserBackend::has_resolution(int r) const {
    const auto& layers = cross_attention_layers();
    return std::any_of(layers.begin(), layers.end(), [r](const LayerKey& k) { return k.resolution == r; });
}

}  // namespace foi
