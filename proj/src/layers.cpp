#include "snn/layers.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "snn/image_io.hpp"

namespace snn {

namespace {

int out_dim(int in, int f, int stride, const char* what) {
  if (f > in) {
    throw std::runtime_error(std::string(what) + ": filter larger than input (" +
                             std::to_string(f) + " > " + std::to_string(in) +
                             ")");
  }
  return (in - f) / stride + 1;
}

}  // namespace

Shape4 output_shape(const ConvGeometry& g, const Shape4& in) {
  if (in.c != g.c_in) {
    throw std::runtime_error("conv: channel mismatch, input " +
                             std::to_string(in.c) + " vs c_in " +
                             std::to_string(g.c_in));
  }
  return {out_dim(in.w, g.f_w, g.stride_w, "conv"),
          out_dim(in.h, g.f_h, g.stride_h, "conv"),
          out_dim(in.td, g.f_td, g.stride_td, "conv"), g.n_filters};
}

Shape4 output_shape(const PoolGeometry& g, const Shape4& in) {
  return {out_dim(in.w, g.p_w, g.stride_w, "pool"),
          out_dim(in.h, g.p_h, g.stride_h, "pool"),
          out_dim(in.td, g.p_td, g.stride_td, "pool"), in.c};
}

void ConvLayer::init(Rng& rng) {
  weights.resize(std::size_t(geom.n_filters) * geom.weights_per_filter());
  for (double& w : weights) w = rng.uniform();
  thresholds.resize(std::size_t(geom.n_filters));
  for (double& th : thresholds) {
    th = std::max(threshold.th_min,
                  rng.gauss(threshold.init_mean, threshold.init_std));
  }
  frozen = false;
}

namespace {

struct CoverRange {
  int lo = 0, hi = -1;  // inclusive output index range
};

// Output indices o with o*stride <= coord <= o*stride + f - 1.
CoverRange covering(int coord, int f, int stride, int out) {
  CoverRange r;
  const int lo = coord - f + 1;
  r.lo = lo <= 0 ? 0 : (lo + stride - 1) / stride;
  r.hi = std::min(out - 1, coord / stride);
  return r;
}

// Shared event loop for infer and train; train-only state is optional.
SpikeTensor conv_forward_impl(const ConvLayer& layer_in, ConvLayer* mut,
                              const SpikeTensor& input,
                              std::span<const std::int32_t> locations,
                              bool train,
                              std::vector<double>* final_potentials) {
  const ConvGeometry& g = layer_in.geom;
  const Shape4 out_shape = output_shape(g, input.shape);
  const int ow = out_shape.w, oh = out_shape.h, otd = out_shape.td;
  const int K = g.n_filters;
  const std::size_t n_loc = std::size_t(ow) * oh * otd;

  std::vector<double> potentials(n_loc * K, 0.0);
  std::vector<char> fired(n_loc * K, 0);
  std::vector<char> inhibited;
  std::vector<char> active;
  std::vector<double> pre_time;  // per input coordinate; 1.0 = no spike
  std::vector<double>* thresholds_mut = nullptr;

  if (train) {
    inhibited.assign(n_loc, 0);
    active.assign(n_loc, 0);
    for (std::int32_t loc : locations) {
      if (loc < 0 || std::size_t(loc) >= n_loc) {
        throw std::out_of_range("conv_forward_train: bad location index");
      }
      active[std::size_t(loc)] = 1;
    }
    pre_time.assign(std::size_t(input.shape.volume()), 1.0);
    const Shape4& s = input.shape;
    for (const SpikeEvent& e : input.events) {
      pre_time[(((std::size_t(e.z) * s.h + e.y) * s.w + e.x) * s.c + e.k)] =
          e.t;
    }
    thresholds_mut = &mut->thresholds;
  }
  const std::vector<double>& thresholds =
      train ? *thresholds_mut : layer_in.thresholds;

  SpikeTensor out;
  out.shape = out_shape;

  std::vector<double> syn_pre;  // scratch for STDP pre-times
  if (train) syn_pre.resize(std::size_t(g.weights_per_filter()));

  for (const SpikeEvent& e : input.events) {
    const CoverRange rx = covering(e.x, g.f_w, g.stride_w, ow);
    const CoverRange ry = covering(e.y, g.f_h, g.stride_h, oh);
    const CoverRange rz = covering(e.z, g.f_td, g.stride_td, otd);
    for (int oz = rz.lo; oz <= rz.hi; ++oz) {
      const int dz = e.z - oz * g.stride_td;
      for (int oy = ry.lo; oy <= ry.hi; ++oy) {
        const int dy = e.y - oy * g.stride_h;
        for (int ox = rx.lo; ox <= rx.hi; ++ox) {
          const int dx = e.x - ox * g.stride_w;
          const std::size_t loc = (std::size_t(oz) * oh + oy) * ow + ox;
          if (train && !active[loc]) continue;
          int winner = -1;
          for (int k = 0; k < K; ++k) {
            double& v = potentials[loc * K + k];
            v += layer_in.w_at(k, e.k, dx, dy, dz);
            if (fired[loc * K + k]) continue;  // once per sample
            if (train && inhibited[loc]) continue;
            if (v >= thresholds[std::size_t(k)]) {
              if (!train) {
                out.events.push_back({ox, oy, oz, k, e.t});
                fired[loc * K + k] = 1;
                v = 0.0;  // reset to resting potential
              } else if (winner < 0) {
                winner = k;  // first crossing on this event, smallest k
              }
            }
          }
          if (train && winner >= 0) {
            out.events.push_back({ox, oy, oz, winner, e.t});
            fired[loc * K + winner] = 1;
            potentials[loc * K + winner] = 0.0;
            inhibited[loc] = 1;
            // STDP on the winning filter only
            const Shape4& s = input.shape;
            std::size_t si = 0;
            for (int c = 0; c < g.c_in; ++c) {
              for (int fx = 0; fx < g.f_w; ++fx) {
                const int ix = ox * g.stride_w + fx;
                for (int fy = 0; fy < g.f_h; ++fy) {
                  const int iy = oy * g.stride_h + fy;
                  for (int fz = 0; fz < g.f_td; ++fz) {
                    const int iz = oz * g.stride_td + fz;
                    syn_pre[si++] = pre_time[(
                        ((std::size_t(iz) * s.h + iy) * s.w + ix) * s.c + c)];
                  }
                }
              }
            }
            const std::size_t base = mut->w_index(winner, 0, 0, 0, 0);
            apply_stdp(
                std::span<double>(mut->weights.data() + base, syn_pre.size()),
                syn_pre, e.t, mut->stdp);
            threshold_update(*thresholds_mut, winner, e.t, mut->threshold);
          }
        }
      }
    }
  }

  sort_events(out.events);
  if (final_potentials != nullptr) *final_potentials = std::move(potentials);
  return out;
}

}  // namespace

SpikeTensor conv_forward_infer(const ConvLayer& layer, const SpikeTensor& input,
                               std::vector<double>* final_potentials) {
  return conv_forward_impl(layer, nullptr, input, {}, false, final_potentials);
}

SpikeTensor conv_forward_train(ConvLayer& layer, const SpikeTensor& input,
                               std::span<const std::int32_t> locations) {
  if (layer.frozen) {
    throw std::runtime_error("conv_forward_train: layer is frozen");
  }
  return conv_forward_impl(layer, &layer, input, locations, true, nullptr);
}

SpikeTensor pool_forward(const PoolGeometry& g, const SpikeTensor& input) {
  const Shape4 out_shape = output_shape(g, input.shape);
  const int ow = out_shape.w, oh = out_shape.h, otd = out_shape.td;
  const int C = out_shape.c;
  std::vector<char> occupied(std::size_t(ow) * oh * otd * C, 0);

  SpikeTensor out;
  out.shape = out_shape;
  for (const SpikeEvent& e : input.events) {
    const CoverRange rx = covering(e.x, g.p_w, g.stride_w, ow);
    const CoverRange ry = covering(e.y, g.p_h, g.stride_h, oh);
    const CoverRange rz = covering(e.z, g.p_td, g.stride_td, otd);
    for (int oz = rz.lo; oz <= rz.hi; ++oz) {
      for (int oy = ry.lo; oy <= ry.hi; ++oy) {
        for (int ox = rx.lo; ox <= rx.hi; ++ox) {
          const std::size_t slot =
              ((std::size_t(oz) * oh + oy) * ow + ox) * C + e.k;
          if (!occupied[slot]) {
            occupied[slot] = 1;  // earliest spike in the window
            out.events.push_back({ox, oy, oz, e.k, e.t});
          }
        }
      }
    }
  }
  sort_events(out.events);
  return out;
}

std::vector<double> sum_pool_features(const SpikeTensor& input, int g_w,
                                      int g_h, int g_td) {
  const Shape4& s = input.shape;
  g_w = std::min(g_w, std::max(1, s.w));
  g_h = std::min(g_h, std::max(1, s.h));
  g_td = std::min(g_td, std::max(1, s.td));
  std::vector<double> feat(std::size_t(g_w) * g_h * g_td * s.c, 0.0);
  for (const SpikeEvent& e : input.events) {
    const int cx = int(std::int64_t(e.x) * g_w / s.w);
    const int cy = int(std::int64_t(e.y) * g_h / s.h);
    const int cz = int(std::int64_t(e.z) * g_td / s.td);
    feat[((std::size_t(cz) * g_h + cy) * g_w + cx) * s.c + e.k] += 1.0;
  }
  return feat;
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g\n", v);
  out << buf;
}

}  // namespace

void save_layer(const ConvLayer& layer, std::ostream& out) {
  const ConvGeometry& g = layer.geom;
  out << "conv " << g.f_w << ' ' << g.f_h << ' ' << g.f_td << ' ' << g.c_in
      << ' ' << g.n_filters << ' ' << g.stride_w << ' ' << g.stride_h << ' '
      << g.stride_td << ' ' << (layer.frozen ? 1 : 0) << '\n';
  for (double w : layer.weights) put_double(out, w);
  out << "thresholds\n";
  for (double th : layer.thresholds) put_double(out, th);
}

ConvLayer load_layer(std::istream& in) {
  ConvLayer layer;
  std::string tag;
  in >> tag;
  if (tag != "conv") throw std::runtime_error("load_layer: bad header");
  ConvGeometry& g = layer.geom;
  int frozen = 0;
  in >> g.f_w >> g.f_h >> g.f_td >> g.c_in >> g.n_filters >> g.stride_w >>
      g.stride_h >> g.stride_td >> frozen;
  if (!in) throw std::runtime_error("load_layer: truncated header");
  layer.frozen = frozen != 0;
  layer.weights.resize(std::size_t(g.n_filters) * g.weights_per_filter());
  for (double& w : layer.weights) in >> w;
  in >> tag;
  if (tag != "thresholds") {
    throw std::runtime_error("load_layer: missing thresholds");
  }
  layer.thresholds.resize(std::size_t(g.n_filters));
  for (double& th : layer.thresholds) in >> th;
  if (!in) throw std::runtime_error("load_layer: truncated body");
  return layer;
}

void export_filter_images(const ConvLayer& layer, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const ConvGeometry& g = layer.geom;
  for (int k = 0; k < g.n_filters; ++k) {
    for (int c = 0; c < g.c_in; ++c) {
      for (int z = 0; z < g.f_td; ++z) {
        Image2d img = make_image(g.f_w, g.f_h);
        for (int y = 0; y < g.f_h; ++y) {
          for (int x = 0; x < g.f_w; ++x) img.at(x, y) = layer.w_at(k, c, x, y, z);
        }
        write_pgm(dir + "/filter" + std::to_string(k) + "_c" +
                      std::to_string(c) + "_z" + std::to_string(z) + ".pgm",
                  img);
      }
    }
  }
}

}  // namespace snn
