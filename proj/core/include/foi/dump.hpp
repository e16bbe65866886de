#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "foi/attention.hpp"
#include "foi/mask.hpp"

namespace foi {

// Writes <stem>.png (head-averaged probabilities, one r x r tile per token laid
// out left to right, 8-bit gray), <stem>_probs.f32 and <stem>_logits.f32 (raw
// float32 little-endian, heads x r*r x N) and <stem>.json with
// {layer, branch, heads, r, N, timestep, ...}.
void write_attention_dump(const std::filesystem::path& dir, const std::string& stem, const AttentionRecord& record,
                          bool modulated);

// mask_<sub>_<keyword>.png per keyword and union_mask.png, all 0/255.
void write_mask_dump(const std::filesystem::path& dir, const std::vector<KeywordMask>& masks,
                     const BinaryMask& union_mask);

std::string mask_filename(const KeywordMask& mask);

// Raw float32 little-endian serialization.
void write_f32_le(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<float> read_f32_le(const std::filesystem::path& path);

}  // namespace foi
