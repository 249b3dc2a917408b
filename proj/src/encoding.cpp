#include "snn/encoding.hpp"

#include <cmath>
#include <stdexcept>

namespace snn {

Image2d make_image(int w, int h, double fill) {
  Image2d img;
  img.w = w;
  img.h = h;
  img.v.assign(std::size_t(w) * h, fill);
  return img;
}

FrameStack sample_frames(const FrameStack& frames, int target_len, int skip) {
  if (target_len < 1 || skip < 0) {
    throw std::invalid_argument("sample_frames: bad target_len/skip");
  }
  const int needed = target_len * (skip + 1) - skip;
  if (frames.td < needed) {
    throw std::runtime_error("insufficient frames: have " +
                             std::to_string(frames.td) + ", need " +
                             std::to_string(needed));
  }
  FrameStack out = make_frame_stack(frames.w, frames.h, target_len);
  for (int i = 0; i < target_len; ++i) {
    const int src = i * (skip + 1);
    for (int y = 0; y < frames.h; ++y) {
      for (int x = 0; x < frames.w; ++x) {
        out.at(x, y, i) = frames.at(x, y, src);
      }
    }
  }
  return out;
}

FrameStack downscale_half(const FrameStack& frames) {
  if (frames.w < 2 || frames.h < 2) {
    throw std::runtime_error("downscale_half: degenerate size " +
                             std::to_string(frames.w) + "x" +
                             std::to_string(frames.h));
  }
  const int ow = frames.w / 2;
  const int oh = frames.h / 2;
  FrameStack out = make_frame_stack(ow, oh, frames.td);
  for (int z = 0; z < frames.td; ++z) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        out.at(x, y, z) = 0.25 * (frames.at(2 * x, 2 * y, z) +
                                  frames.at(2 * x + 1, 2 * y, z) +
                                  frames.at(2 * x, 2 * y + 1, z) +
                                  frames.at(2 * x + 1, 2 * y + 1, z));
      }
    }
  }
  return out;
}

FrameStack background_subtract(const FrameStack& frames) {
  if (frames.td < 2) {
    throw std::runtime_error("background_subtract: need at least 2 frames");
  }
  FrameStack out = make_frame_stack(frames.w, frames.h, frames.td - 1);
  for (int z = 0; z + 1 < frames.td; ++z) {
    for (int y = 0; y < frames.h; ++y) {
      for (int x = 0; x < frames.w; ++x) {
        out.at(x, y, z) = std::abs(frames.at(x, y, z + 1) - frames.at(x, y, z));
      }
    }
  }
  return out;
}

namespace {

// Truncated centered Gaussian, normalized to unit sum.
Image2d gaussian_kernel(int size, double sigma) {
  Image2d k = make_image(size, size);
  const int r = size / 2;
  double sum = 0.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - r;
      const double dy = y - r;
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k.at(x, y) = v;
      sum += v;
    }
  }
  for (double& v : k.v) v /= sum;
  return k;
}

}  // namespace

Image2d dog_filter(const Image2d& frame, const DogParams& params) {
  if (params.size < 3 || params.size % 2 == 0) {
    throw std::invalid_argument("dog_filter: size must be odd and >= 3");
  }
  if (!(params.sigma_in > 0.0 && params.sigma_in < params.sigma_out)) {
    throw std::invalid_argument("dog_filter: need 0 < sigma_in < sigma_out");
  }
  if (frame.w < params.size || frame.h < params.size) {
    throw std::runtime_error("dog_filter: frame smaller than kernel");
  }
  const Image2d g_in = gaussian_kernel(params.size, params.sigma_in);
  const Image2d g_out = gaussian_kernel(params.size, params.sigma_out);
  Image2d dog = make_image(params.size, params.size);
  for (std::size_t i = 0; i < dog.v.size(); ++i) {
    dog.v[i] = g_in.v[i] - g_out.v[i];
  }
  // valid region only, no padding
  const int ow = frame.w - params.size + 1;
  const int oh = frame.h - params.size + 1;
  Image2d out = make_image(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < params.size; ++ky) {
        for (int kx = 0; kx < params.size; ++kx) {
          acc += dog.at(kx, ky) * frame.at(x + kx, y + ky);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

SpikeTensor latency_encode(const std::vector<Image2d>& responses,
                           const CodingParams& params) {
  SpikeTensor out;
  if (responses.empty()) return out;
  const int w = responses[0].w;
  const int h = responses[0].h;
  for (const Image2d& r : responses) {
    if (r.w != w || r.h != h) {
      throw std::invalid_argument("latency_encode: inconsistent frame sizes");
    }
  }
  out.shape = {w, h, int(responses.size()), params.on_off ? 2 : 1};
  double max_mag = 0.0;
  for (const Image2d& r : responses) {
    for (double v : r.v) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("latency_encode: non-finite response");
      }
      max_mag = std::max(max_mag, std::abs(v));
    }
  }
  if (max_mag == 0.0) return out;
  for (int z = 0; z < out.shape.td; ++z) {
    const Image2d& r = responses[std::size_t(z)];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = r.at(x, y);
        if (v == 0.0) continue;  // zero contrast carries no information
        const int k = (params.on_off && v < 0.0) ? 1 : 0;
        out.events.push_back({x, y, z, k, 1.0 - std::abs(v) / max_mag});
      }
    }
  }
  sort_events(out.events);
  return out;
}

SpikeTensor encode_sample(const FrameStack& frames, const DogParams& dog,
                          const CodingParams& coding,
                          bool background_subtraction) {
  const FrameStack* src = &frames;
  FrameStack motion;
  if (background_subtraction) {
    motion = background_subtract(frames);
    src = &motion;
  }
  std::vector<Image2d> responses;
  responses.reserve(std::size_t(src->td));
  for (int z = 0; z < src->td; ++z) {
    Image2d frame = make_image(src->w, src->h);
    for (int y = 0; y < src->h; ++y) {
      for (int x = 0; x < src->w; ++x) frame.at(x, y) = src->at(x, y, z);
    }
    responses.push_back(dog_filter(frame, dog));
  }
  return latency_encode(responses, coding);
}

}  // namespace snn
