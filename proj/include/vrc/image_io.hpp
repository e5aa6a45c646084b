#pragma once

#include <string>
#include <vector>

#include "vrc/renderer.hpp"

namespace vrc {

// Little-endian color PFM, bottom row first as the format requires.
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);
// 8-bit binary PPM with a fixed 2.2 gamma and clamping at 1.
void write_ppm(const std::string& path, const Image& img);

// x,y,r,g,b[,single_*,multiple_*] per cell center.
void write_field_csv(const std::string& path, const FieldGrid& grid, const RenderOutput& out);
void write_gradient_csv(const std::string& path, const std::vector<GradientSample>& samples);

}  // namespace vrc
