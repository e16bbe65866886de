#pragma once

#include <string>
#include <string_view>

#include "foi/types.hpp"

namespace foi {

// The three conditioning configurations combined by guidance:
// UNCOND  eps(z, t, null image, null text)
// IMAGE_ONLY eps(z, t, image, null text)
// FULL    eps(z, t, image, instruction)
enum class Branch { Uncond, ImageOnly, Full };

std::string_view branch_name(Branch b);

struct LayerKey {
    std::string name;
    int resolution = 0;  // side of the square pixel grid

    friend bool operator==(const LayerKey&, const LayerKey&) = default;
};

struct AttentionRecord {
    LayerKey layer;
    Branch branch = Branch::Full;
    int timestep_index = 0;
    AttentionTensor logits;  // Q K^T before the 1/sqrt(d) scaling
    AttentionTensor probs;   // what the forward pass actually used
};

// Softmax over the token axis of logits / sqrt(scale_dim).
AttentionTensor softmax_rows(const AttentionTensor& logits, double scale_dim);

}  // namespace foi
