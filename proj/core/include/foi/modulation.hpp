#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foi/attention.hpp"
#include "foi/backend.hpp"
#include "foi/instruction.hpp"
#include "foi/mask.hpp"

namespace foi {

// 0.05 t^4 for t normalized to [0, 1].
constexpr double timestep_weight(double t_norm) {
    const double t2 = t_norm * t_norm;
    return 0.05 * t2 * t2;
}

// Binary (side*side) x N mask, row-major by pixel. Column j is the keyword
// mask of the sub-instruction whose token span holds j, or all ones when j
// belongs to no sub-instruction.
struct TokenMask {
    int side = 0;
    int tokens = 0;
    std::vector<std::uint8_t> values;

    TokenMask() = default;
    TokenMask(int r, int n, std::uint8_t fill)
        : side(r), tokens(n), values(static_cast<std::size_t>(r) * r * n, fill) {}

    int pixels() const { return side * side; }
    std::uint8_t at(int pixel, int token) const { return values[static_cast<std::size_t>(pixel) * tokens + token]; }
    std::uint8_t& at(int pixel, int token) { return values[static_cast<std::size_t>(pixel) * tokens + token]; }
};

// With no masks the result is all ones at reference_side.
TokenMask build_token_mask(std::span<const KeywordMask> masks, const Instruction& instruction, int token_count,
                           int reference_side = 16);

// Nearest-neighbor resize of every column to layer_side x layer_side.
TokenMask interpolate_mask(const TokenMask& mask, int layer_side);

// alpha[j] * timestep_weight(t) * (max_h - X[h,p,j]), with max_h the maximum of X over all
// pixels and tokens of head h.
AttentionTensor delta_x(const AttentionTensor& logits, std::span<const double> alpha, double t_norm);

// softmax_tokens(((X + dX) * M + Y * (1 - M)) / sqrt(d))
AttentionTensor modulate(const AttentionTensor& instruction_logits, const AttentionTensor& null_logits,
                         const TokenMask& layer_mask, std::span<const double> alpha, double t_norm, double scale_dim);

// Run-scoped state for cross-condition modulation. Each denoising step the
// IMAGE_ONLY pass must run first so its per-layer logits are cached before the
// FULL pass asks for modulated probabilities.
class CrossConditionModulator {
public:
    CrossConditionModulator(TokenMask mask, AlphaVector alpha);

    void begin_step(double t_norm);
    void cache_null_logits(const AttentionRecord& record);
    AttentionTensor modulate_layer(const LayerKey& layer, const AttentionTensor& logits, double scale_dim);

    const TokenMask& layer_mask(int layer_side);
    double t_norm() const { return t_norm_; }
    const AlphaVector& alpha() const { return alpha_; }

    ModulationHook hook();

private:
    TokenMask mask_;
    AlphaVector alpha_;
    double t_norm_ = 0.0;
    std::map<int, TokenMask> resized_;
    std::map<std::string, AttentionTensor> null_logits_;
};

}  // namespace foi
