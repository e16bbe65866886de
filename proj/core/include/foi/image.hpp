#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "foi/types.hpp"

namespace foi {

// PNG or JPEG (detected from the file signature), converted to 8-bit RGB.
Image read_image(const std::string& path);

void write_png(const std::string& path, const Image& image);
void write_png_gray(const std::string& path, int width, int height, const std::vector<std::uint8_t>& pixels);

// Binary mask as 0/255 grayscale.
void write_mask_png(const std::string& path, const BinaryMask& mask);

// Bilinear resampling with half-pixel centers.
Image resize_bilinear(const Image& image, int width, int height);

}  // namespace foi
