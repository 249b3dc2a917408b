#include "snn/spike_tensor.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <tuple>
#include <unordered_set>

namespace snn {

bool event_less(const SpikeEvent& a, const SpikeEvent& b) {
  return std::tie(a.t, a.z, a.y, a.x, a.k) < std::tie(b.t, b.z, b.y, b.x, b.k);
}

void sort_events(std::vector<SpikeEvent>& events) {
  std::stable_sort(events.begin(), events.end(), event_less);
}

namespace {

std::uint64_t coord_key(const Shape4& s, const SpikeEvent& e) {
  return ((std::uint64_t(e.z) * s.h + e.y) * s.w + e.x) * s.c + e.k;
}

}  // namespace

std::optional<std::string> validate_tensor(const SpikeTensor& tensor) {
  const Shape4& s = tensor.shape;
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(tensor.events.size());
  const SpikeEvent* prev = nullptr;
  for (std::size_t i = 0; i < tensor.events.size(); ++i) {
    const SpikeEvent& e = tensor.events[i];
    if (e.x < 0 || e.x >= s.w || e.y < 0 || e.y >= s.h || e.z < 0 ||
        e.z >= s.td || e.k < 0 || e.k >= s.c) {
      return "out-of-range coordinate at event " + std::to_string(i);
    }
    if (!(e.t >= 0.0 && e.t <= 1.0)) {
      return "timestamp outside [0,1] at event " + std::to_string(i);
    }
    if (prev != nullptr && event_less(e, *prev)) {
      return "order violation at event " + std::to_string(i);
    }
    if (!seen.insert(coord_key(s, e)).second) {
      return "duplicate coordinate at event " + std::to_string(i);
    }
    prev = &e;
  }
  return std::nullopt;
}

void dump_spikes(const SpikeTensor& tensor, std::ostream& out) {
  char buf[96];
  for (const SpikeEvent& e : tensor.events) {
    std::snprintf(buf, sizeof(buf), "%d %d %d %d %.9g\n", e.x, e.y, e.z, e.k,
                  e.t);
    out << buf;
  }
}

FrameStack make_frame_stack(int w, int h, int td, double fill) {
  FrameStack f;
  f.w = w;
  f.h = h;
  f.td = td;
  f.data.assign(std::size_t(w) * h * td, fill);
  return f;
}

}  // namespace snn
