#include "snn/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace snn {

int Network::conv_count() const {
  int n = 0;
  for (const LayerNode& l : layers) {
    if (l.kind == LayerNode::Kind::conv) ++n;
  }
  return n;
}

std::int64_t n_sampling_2d(int l_w, int l_h, int f_w, int f_h) {
  return (std::int64_t(2) * l_w * l_h) / (std::int64_t(f_w) * f_h);
}

std::int64_t n_sampling_3d(int l_w, int l_h, int l_td, int f_w, int f_h,
                           int f_td) {
  return (std::int64_t(3) * l_w * l_h * l_td) /
         (std::int64_t(f_w) * f_h * f_td);
}

std::vector<std::int32_t> sample_locations(Rng& rng, std::int64_t n_valid,
                                           std::int64_t n) {
  if (n > n_valid) {
    throw std::invalid_argument("sample_locations: n exceeds valid locations");
  }
  // partial Fisher-Yates over the full index range
  std::vector<std::int32_t> all(static_cast<std::size_t>(n_valid));
  for (std::int64_t i = 0; i < n_valid; ++i) all[std::size_t(i)] = std::int32_t(i);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t j = i + rng.below(n_valid - i);
    std::swap(all[std::size_t(i)], all[std::size_t(j)]);
  }
  all.resize(std::size_t(n));
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

// Index one past the last layer belonging to conv block `upto_conv`
// (the conv layer plus any pooling layers that follow it).
std::size_t cutoff_index(const Network& net, int upto_conv) {
  if (upto_conv < 0) return net.layers.size();
  int seen = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (net.layers[i].kind == LayerNode::Kind::conv) {
      if (seen == upto_conv + 1) return i;
      ++seen;
    }
  }
  if (seen < upto_conv + 1) {
    throw std::out_of_range("network has no conv block " +
                            std::to_string(upto_conv));
  }
  return net.layers.size();
}

}  // namespace

SpikeTensor forward_infer(const Network& net, const SpikeTensor& input,
                          int upto_conv) {
  const std::size_t cut = cutoff_index(net, upto_conv);
  SpikeTensor x = input;
  for (std::size_t i = 0; i < cut; ++i) {
    const LayerNode& l = net.layers[i];
    x = (l.kind == LayerNode::Kind::conv) ? conv_forward_infer(l.conv, x)
                                          : pool_forward(l.pool, x);
  }
  return x;
}

void train_layerwise(Network& net, const std::vector<SpikeTensor>& items,
                     const TrainPlan& plan) {
  if (items.empty()) throw std::runtime_error("train_layerwise: empty dataset");
  if (plan.epochs_per_layer < 1) {
    throw std::invalid_argument("train_layerwise: epochs must be >= 1");
  }
  Rng rng(plan.seed);
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    LayerNode& node = net.layers[li];
    if (node.kind != LayerNode::Kind::conv) continue;
    ConvLayer& layer = node.conv;
    for (int epoch = 0; epoch < plan.epochs_per_layer; ++epoch) {
      rng.shuffle(order);
      for (std::size_t idx : order) {
        SpikeTensor x = items[idx];
        for (std::size_t j = 0; j < li; ++j) {
          const LayerNode& prev = net.layers[j];
          x = (prev.kind == LayerNode::Kind::conv)
                  ? conv_forward_infer(prev.conv, x)
                  : pool_forward(prev.pool, x);
        }
        const Shape4 out = output_shape(layer.geom, x.shape);
        const std::int64_t n_valid = std::int64_t(out.w) * out.h * out.td;
        const std::int64_t want =
            layer.geom.is_2d()
                ? n_sampling_2d(x.shape.w, x.shape.h, layer.geom.f_w,
                                layer.geom.f_h)
                : n_sampling_3d(x.shape.w, x.shape.h, x.shape.td,
                                layer.geom.f_w, layer.geom.f_h,
                                layer.geom.f_td);
        const std::int64_t n = std::clamp<std::int64_t>(want, 1, n_valid);
        const std::vector<std::int32_t> locs =
            sample_locations(rng, n_valid, n);
        conv_forward_train(layer, x, locs);
      }
    }
    layer.frozen = true;
  }
}

std::vector<double> extract_features_3d(const Network& net,
                                        const SpikeTensor& sample,
                                        int upto_conv) {
  if (net.kind != NetKind::three_d) {
    throw std::runtime_error("extract_features_3d: network is not 3D");
  }
  const SpikeTensor out = forward_infer(net, sample, upto_conv);
  return sum_pool_features(out, net.grid_w, net.grid_h, net.grid_td);
}

std::vector<double> extract_features_2d(const Network& net,
                                        const std::vector<SpikeTensor>& frames,
                                        int upto_conv) {
  if (net.kind != NetKind::two_d) {
    throw std::runtime_error("extract_features_2d: network is not 2D");
  }
  std::vector<double> acc;
  for (const SpikeTensor& frame : frames) {
    const SpikeTensor out = forward_infer(net, frame, upto_conv);
    std::vector<double> f = sum_pool_features(out, net.grid_w, net.grid_h, 1);
    if (acc.empty()) {
      acc = std::move(f);
    } else {
      if (f.size() != acc.size()) {
        throw std::runtime_error("extract_features_2d: frame shape mismatch");
      }
      for (std::size_t i = 0; i < f.size(); ++i) acc[i] += f[i];
    }
  }
  return acc;
}

std::vector<SpikeTensor> split_frames(const SpikeTensor& sample) {
  std::vector<SpikeTensor> frames(std::size_t(sample.shape.td));
  for (SpikeTensor& f : frames) {
    f.shape = {sample.shape.w, sample.shape.h, 1, sample.shape.c};
  }
  for (const SpikeEvent& e : sample.events) {
    frames[std::size_t(e.z)].events.push_back({e.x, e.y, 0, e.k, e.t});
  }
  // per-frame event order is inherited from the sorted sample
  return frames;
}

void save_network(const Network& net, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir + "/manifest.txt");
  manifest << "kind " << (net.kind == NetKind::two_d ? "2d" : "3d") << '\n';
  manifest << "grid " << net.grid_w << ' ' << net.grid_h << ' ' << net.grid_td
           << '\n';
  int conv_idx = 0;
  for (const LayerNode& l : net.layers) {
    if (l.kind == LayerNode::Kind::conv) {
      manifest << "conv layer" << conv_idx << ".txt\n";
      std::ofstream f(dir + "/layer" + std::to_string(conv_idx) + ".txt");
      save_layer(l.conv, f);
      ++conv_idx;
    } else {
      manifest << "pool " << l.pool.p_w << ' ' << l.pool.p_h << ' '
               << l.pool.p_td << ' ' << l.pool.stride_w << ' '
               << l.pool.stride_h << ' ' << l.pool.stride_td << '\n';
    }
  }
}

Network load_network(const std::string& dir) {
  std::ifstream manifest(dir + "/manifest.txt");
  if (!manifest) {
    throw std::runtime_error("load_network: missing manifest in " + dir);
  }
  Network net;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "kind") {
      std::string k;
      ls >> k;
      net.kind = (k == "2d") ? NetKind::two_d : NetKind::three_d;
    } else if (tag == "grid") {
      ls >> net.grid_w >> net.grid_h >> net.grid_td;
    } else if (tag == "conv") {
      std::string file;
      ls >> file;
      std::ifstream f(dir + "/" + file);
      if (!f) throw std::runtime_error("load_network: missing " + file);
      LayerNode node;
      node.kind = LayerNode::Kind::conv;
      node.conv = load_layer(f);
      net.layers.push_back(std::move(node));
    } else if (tag == "pool") {
      LayerNode node;
      node.kind = LayerNode::Kind::pool;
      ls >> node.pool.p_w >> node.pool.p_h >> node.pool.p_td >>
          node.pool.stride_w >> node.pool.stride_h >> node.pool.stride_td;
      net.layers.push_back(std::move(node));
    } else {
      throw std::runtime_error("load_network: bad manifest line: " + line);
    }
  }
  return net;
}

}  // namespace snn
