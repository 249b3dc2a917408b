#pragma once

#include <vector>

#include "snn/spike_tensor.hpp"

namespace snn {

// Dense 2D grid of real values (a frame, or a signed filter response).
struct Image2d {
  int w = 0, h = 0;
  std::vector<double> v;

  double& at(int x, int y) { return v[std::size_t(y) * w + x]; }
  double at(int x, int y) const { return v[std::size_t(y) * w + x]; }
};

Image2d make_image(int w, int h, double fill = 0.0);

// Difference-of-Gaussians on/off-center filter parameters.
struct DogParams {
  int size = 7;
  double sigma_in = 1.0;
  double sigma_out = 4.0;
};

enum class NormalizationPolicy { per_sample_max };

struct CodingParams {
  bool on_off = true;  // emit separate on/off channels
  NormalizationPolicy normalization = NormalizationPolicy::per_sample_max;
};

// Keeps target_len frames, taking indices 0, skip+1, 2(skip+1), ...
// Throws if fewer than target_len*(skip+1) - skip frames are available.
FrameStack sample_frames(const FrameStack& frames, int target_len, int skip);

// 2x2 block averaging; output is (w/2, h/2) rounded down.
FrameStack downscale_half(const FrameStack& frames);

// Absolute difference of consecutive frames; td shrinks by one.
FrameStack background_subtract(const FrameStack& frames);

// Valid-only convolution with the unit-sum-normalized center minus
// surround Gaussian kernel; output shrinks by size-1 per dimension.
Image2d dog_filter(const Image2d& frame, const DogParams& params);

// Latency coding: per-sample max normalization, t = 1 - |r|/M, positive
// responses on channel 0, negative on channel 1, zero responses silent.
SpikeTensor latency_encode(const std::vector<Image2d>& responses,
                           const CodingParams& params);

// background_subtract (optional) -> per-frame DoG -> latency_encode.
SpikeTensor encode_sample(const FrameStack& frames, const DogParams& dog,
                          const CodingParams& coding,
                          bool background_subtraction);

}  // namespace snn
