#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace snn {

struct Shape4 {
  int w = 0, h = 0, td = 0, c = 0;
  std::int64_t volume() const {
    return std::int64_t(w) * h * td * c;
  }
  bool operator==(const Shape4&) const = default;
};

// A single spike at coordinate (x, y, z, k) with latency t in the
// normalized unit sample window [0, 1].
struct SpikeEvent {
  int x = 0, y = 0, z = 0, k = 0;
  double t = 0.0;
  bool operator==(const SpikeEvent&) const = default;
};

// Total order (t, z, y, x, k); ties in t are broken deterministically so
// WTA outcomes are reproducible.
bool event_less(const SpikeEvent& a, const SpikeEvent& b);

// Sparse single-spike-per-coordinate representation of one coded sample.
// Immutable by convention once built; safe to share read-only.
struct SpikeTensor {
  Shape4 shape;
  std::vector<SpikeEvent> events;  // sorted by event_less
};

void sort_events(std::vector<SpikeEvent>& events);

// nullopt when every invariant holds, otherwise a description of the first
// violation found (out-of-range coordinate, t outside [0,1], order
// violation, duplicate coordinate).
std::optional<std::string> validate_tensor(const SpikeTensor& tensor);

// One line per event: "x y z k t", t at 9 significant digits.
void dump_spikes(const SpikeTensor& tensor, std::ostream& out);

// Dense pre-coding form of a video: grayscale frames with values in [0, 1].
struct FrameStack {
  int w = 0, h = 0, td = 0;
  std::vector<double> data;  // (z, y, x) row-major

  double& at(int x, int y, int z) {
    return data[(std::size_t(z) * h + y) * w + x];
  }
  double at(int x, int y, int z) const {
    return data[(std::size_t(z) * h + y) * w + x];
  }
};

FrameStack make_frame_stack(int w, int h, int td, double fill = 0.0);

}  // namespace snn
