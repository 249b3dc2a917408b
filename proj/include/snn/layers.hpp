#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "snn/plasticity.hpp"
#include "snn/rng.hpp"
#include "snn/spike_tensor.hpp"

namespace snn {

struct ConvGeometry {
  int f_w = 5, f_h = 5, f_td = 1;  // f_td = 1 encodes a 2D layer
  int c_in = 2;
  int n_filters = 16;
  int stride_w = 1, stride_h = 1, stride_td = 1;

  bool is_2d() const { return f_td == 1; }
  std::int64_t weights_per_filter() const {
    return std::int64_t(c_in) * f_w * f_h * f_td;
  }
};

struct PoolGeometry {
  int p_w = 2, p_h = 2, p_td = 1;
  int stride_w = 2, stride_h = 2, stride_td = 1;
};

// Valid (no padding) output shape: floor((in - f)/stride) + 1 per dimension.
Shape4 output_shape(const ConvGeometry& g, const Shape4& in);
Shape4 output_shape(const PoolGeometry& g, const Shape4& in);

// Spiking convolution layer with shared weights and per-filter adaptive
// thresholds.
struct ConvLayer {
  ConvGeometry geom;
  std::vector<double> weights;     // (k, c_in, x, y, z) order
  std::vector<double> thresholds;  // one per filter
  StdpParams stdp;
  ThresholdParams threshold;
  bool frozen = false;

  std::size_t w_index(int k, int c, int x, int y, int z) const {
    return ((((std::size_t(k) * geom.c_in + c) * geom.f_w + x) * geom.f_h + y) *
                geom.f_td + z);
  }
  double& w_at(int k, int c, int x, int y, int z) {
    return weights[w_index(k, c, x, y, z)];
  }
  double w_at(int k, int c, int x, int y, int z) const {
    return weights[w_index(k, c, x, y, z)];
  }

  // W ~ U(0,1), v_th ~ G(init_mean, init_std) floored at th_min.
  void init(Rng& rng);
};

// Event-driven forward pass, all neurons active, no plasticity.
// final_potentials, when given, receives the end-of-sample membrane
// potentials in (location, filter) order with location = (oz*oh + oy)*ow + ox.
SpikeTensor conv_forward_infer(const ConvLayer& layer, const SpikeTensor& input,
                               std::vector<double>* final_potentials = nullptr);

// Training pass: only the sampled output locations compete; the first
// threshold crossing at a location wins the WTA, triggers STDP on its
// filter and a threshold update over all filters, and inhibits the
// location for the rest of the sample. Throws if the layer is frozen.
SpikeTensor conv_forward_train(ConvLayer& layer, const SpikeTensor& input,
                               std::span<const std::int32_t> locations);

// Earliest-spike propagation per pooling window and channel.
SpikeTensor pool_forward(const PoolGeometry& g, const SpikeTensor& input);

// Spike counts per (grid cell, channel); cell-major (z, y, x), then channel.
std::vector<double> sum_pool_features(const SpikeTensor& input, int g_w,
                                      int g_h, int g_td = 1);

// Byte-exact text snapshot: header line, one weight per line in
// (k, c_in, x, y, z) order, then per-filter thresholds.
void save_layer(const ConvLayer& layer, std::ostream& out);
ConvLayer load_layer(std::istream& in);

// One portable graymap per (filter, channel, z-slice), weights scaled to
// [0, 255]. Files named filter<k>_c<c>_z<z>.pgm.
void export_filter_images(const ConvLayer& layer, const std::string& dir);

}  // namespace snn
