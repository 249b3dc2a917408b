#pragma once

#include <string>

#include "snn/encoding.hpp"

namespace snn {

// 8-bit portable graymap (P2 or P5) mapped to [0, 1] by /255.
Image2d read_pgm(const std::string& path);

// Writes binary P5; values clamped to [0, 1] and scaled to [0, 255].
void write_pgm(const std::string& path, const Image2d& img);

}  // namespace snn
