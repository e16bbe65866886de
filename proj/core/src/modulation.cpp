#include "foi/modulation.hpp"

#include <algorithm>
#include <cmath>

#include "foi/error.hpp"

namespace foi {

TokenMask build_token_mask(std::span<const KeywordMask> masks, const Instruction& instruction, int token_count,
                           int reference_side) {
    if (masks.size() != instruction.subs.size() || instruction.token_spans.size() != instruction.subs.size()) {
        throw Error(ErrorCode::LengthMismatch, "need one keyword mask per resolved sub-instruction");
    }
    if (token_count < 1) throw Error(ErrorCode::InvalidArgument, "token count must be positive");
    const int side = masks.empty() ? reference_side : masks.front().values.height;
    TokenMask out(side, token_count, 1);

    for (std::size_t i = 0; i < masks.size(); ++i) {
        const BinaryMask& m = masks[i].values;
        if (m.height != side || m.width != side) throw Error(ErrorCode::ShapeMismatch, "keyword masks differ in size");
        const TokenRange range = instruction.token_spans[i];
        if (range.start < 0 || range.end > token_count) {
            throw Error(ErrorCode::LengthMismatch, "token span exceeds token count");
        }
        for (int j = range.start; j < range.end; ++j) {
            for (int p = 0; p < out.pixels(); ++p) out.at(p, j) = m.values[static_cast<std::size_t>(p)];
        }
    }
    return out;
}

TokenMask interpolate_mask(const TokenMask& mask, int layer_side) {
    if (layer_side < 1) throw Error(ErrorCode::InvalidArgument, "layer side must be positive");
    if (layer_side == mask.side) return mask;
    TokenMask out(layer_side, mask.tokens, 0);
    for (int y = 0; y < layer_side; ++y) {
        const int sy = y * mask.side / layer_side;
        for (int x = 0; x < layer_side; ++x) {
            const int sx = x * mask.side / layer_side;
            const int src = sy * mask.side + sx;
            const int dst = y * layer_side + x;
            for (int j = 0; j < mask.tokens; ++j) out.at(dst, j) = mask.at(src, j);
        }
    }
    return out;
}

AttentionTensor delta_x(const AttentionTensor& logits, std::span<const double> alpha, double t_norm) {
    if (static_cast<int>(alpha.size()) != logits.tokens) {
        throw Error(ErrorCode::ShapeMismatch, "alpha length differs from token count");
    }
    AttentionTensor out(logits.heads, logits.pixels, logits.tokens);
    const double xi = timestep_weight(t_norm);
    const std::size_t slice = static_cast<std::size_t>(logits.pixels) * logits.tokens;
    for (int h = 0; h < logits.heads; ++h) {
        const double* x = logits.data.data() + static_cast<std::size_t>(h) * slice;
        double* o = out.data.data() + static_cast<std::size_t>(h) * slice;
        const double head_max = *std::max_element(x, x + slice);
        for (std::size_t i = 0; i < slice; ++i) {
            o[i] = alpha[i % static_cast<std::size_t>(logits.tokens)] * xi * (head_max - x[i]);
        }
    }
    return out;
}

AttentionTensor modulate(const AttentionTensor& x, const AttentionTensor& y, const TokenMask& mask,
                         std::span<const double> alpha, double t_norm, double scale_dim) {
    if (!x.same_shape(y)) throw Error(ErrorCode::ShapeMismatch, "instruction and null logits differ in shape");
    if (mask.pixels() != x.pixels || mask.tokens != x.tokens) {
        throw Error(ErrorCode::ShapeMismatch, "token mask does not match the layer's pixels x tokens");
    }
    AttentionTensor dx = delta_x(x, alpha, t_norm);
    AttentionTensor mixed(x.heads, x.pixels, x.tokens);
    const std::size_t slice = static_cast<std::size_t>(x.pixels) * x.tokens;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        mixed.data[i] = mask.values[i % slice] ? x.data[i] + dx.data[i] : y.data[i];
    }
    return softmax_rows(mixed, scale_dim);
}

CrossConditionModulator::CrossConditionModulator(TokenMask mask, AlphaVector alpha)
    : mask_(std::move(mask)), alpha_(std::move(alpha)) {
    if (static_cast<int>(alpha_.values.size()) != mask_.tokens) {
        throw Error(ErrorCode::LengthMismatch, "alpha vector length differs from token mask");
    }
}

void CrossConditionModulator::begin_step(double t_norm) {
    t_norm_ = t_norm;
    null_logits_.clear();
}

void CrossConditionModulator::cache_null_logits(const AttentionRecord& record) {
    if (record.branch != Branch::ImageOnly) return;
    null_logits_.insert_or_assign(record.layer.name, record.logits);
}

const TokenMask& CrossConditionModulator::layer_mask(int layer_side) {
    auto it = resized_.find(layer_side);
    if (it == resized_.end()) it = resized_.emplace(layer_side, interpolate_mask(mask_, layer_side)).first;
    return it->second;
}

AttentionTensor CrossConditionModulator::modulate_layer(const LayerKey& layer, const AttentionTensor& logits,
                                                        double scale_dim) {
    auto it = null_logits_.find(layer.name);
    if (it == null_logits_.end()) {
        throw Error(ErrorCode::MissingNullLogits,
                    "no IMAGE_ONLY logits cached for " + layer.name + "; run the image-only pass first");
    }
    return modulate(logits, it->second, layer_mask(layer.resolution), alpha_.values, t_norm_, scale_dim);
}

ModulationHook CrossConditionModulator::hook() {
    return [this](const LayerKey& layer, const AttentionTensor& logits, double scale_dim) -> std::optional<AttentionTensor> {
        return modulate_layer(layer, logits, scale_dim);
    };
}

}  // namespace foi
