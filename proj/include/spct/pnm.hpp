#pragma once

// Binary PGM (P5) / PPM (P6) reader and writer, maxval 255 only.

#include <string>
#include <variant>

#include "spct/imagecore.hpp"

namespace spct {

using LoadedImage = std::variant<GrayImage, ColorImage>;

// Reads a P5 or P6 file. Throws io_error on missing/truncated/malformed
// files and on maxval != 255.
LoadedImage load_image(const std::string& path);

// Convenience: load and convert to grayscale if the file is P6.
GrayImage load_gray(const std::string& path);

void save_image(const GrayImage& img, const std::string& path);
void save_image(const ColorImage& img, const std::string& path);

// Binary {0,1} mask saved as P5 with foreground = 255.
void save_mask(const std::vector<std::uint8_t>& mask, int w, int h, const std::string& path);

}  // namespace spct
