#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snn/layers.hpp"

namespace snn {

enum class NetKind { two_d, three_d };

struct LayerNode {
  enum class Kind { conv, pool };
  Kind kind = Kind::conv;
  ConvLayer conv;  // valid when kind == conv
  PoolGeometry pool;
};

struct Network {
  NetKind kind = NetKind::three_d;
  std::vector<LayerNode> layers;
  // Final sum-pooling grid.
  int grid_w = 1, grid_h = 1, grid_td = 1;

  int conv_count() const;
};

struct TrainPlan {
  int epochs_per_layer = 1;
  std::uint64_t seed = 0;
};

// Neuron sampling counts (before clamping to the valid location count).
std::int64_t n_sampling_2d(int l_w, int l_h, int f_w, int f_h);
std::int64_t n_sampling_3d(int l_w, int l_h, int l_td, int f_w, int f_h,
                           int f_td);

// Uniform without replacement from [0, n_valid); sorted ascending.
std::vector<std::int32_t> sample_locations(Rng& rng, std::int64_t n_valid,
                                           std::int64_t n);

// Feeds the input through the network in infer mode. upto_conv = -1 runs
// every layer; upto_conv = b stops after conv block b and its trailing
// pooling layers.
SpikeTensor forward_infer(const Network& net, const SpikeTensor& input,
                          int upto_conv = -1);

// Layer-wise unsupervised training: for each conv layer in order, stream
// every item through the frozen prefix then train that layer, re-sampling
// locations per item; the layer is frozen afterwards. Items are whole
// volumetric tensors for a 3D network and single-frame tensors for 2D.
void train_layerwise(Network& net, const std::vector<SpikeTensor>& items,
                     const TrainPlan& plan);

// Volumetric pass followed by sum pooling over the configured grid.
std::vector<double> extract_features_3d(const Network& net,
                                        const SpikeTensor& sample,
                                        int upto_conv = -1);

// Each frame passes the 2D stack independently; per-frame vectors are
// summed elementwise (temporal sum pooling).
std::vector<double> extract_features_2d(const Network& net,
                                        const std::vector<SpikeTensor>& frames,
                                        int upto_conv = -1);

// Splits a volumetric tensor into td single-frame tensors (z = 0).
std::vector<SpikeTensor> split_frames(const SpikeTensor& sample);

// Snapshot directory: manifest.txt plus one layer<i>.txt per conv layer.
void save_network(const Network& net, const std::string& dir);
Network load_network(const std::string& dir);

}  // namespace snn
