#include "foi/attention.hpp"

#include <algorithm>
#include <cmath>

namespace foi {

std::string_view branch_name(Branch b) {
    switch (b) {
        case Branch::Uncond: return "uncond";
        case Branch::ImageOnly: return "image_only";
        case Branch::Full: return "full";
    }
    return "unknown";
}

AttentionTensor softmax_rows(const AttentionTensor& logits, double scale_dim) {
    AttentionTensor out(logits.heads, logits.pixels, logits.tokens);
    const double inv = 1.0 / std::sqrt(scale_dim);
    const auto n = static_cast<std::size_t>(logits.tokens);
    const std::size_t rows = static_cast<std::size_t>(logits.heads) * logits.pixels;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = logits.data.data() + r * n;
        double* o = out.data.data() + r * n;
        double mx = -INFINITY;
        for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, in[j] * inv);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            o[j] = std::exp(in[j] * inv - mx);
            sum += o[j];
        }
        for (std::size_t j = 0; j < n; ++j) o[j] /= sum;
    }
    return out;
}

}  // namespace foi
