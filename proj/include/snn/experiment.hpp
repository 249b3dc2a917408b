#pragma once

#include <optional>
#include <string>
#include <vector>

#include "snn/config.hpp"

namespace snn {

struct RunOptions {
  int runs = 1;
  std::optional<std::uint64_t> seed;   // overrides config
  std::optional<std::string> out_dir;  // overrides config
  int parallel = 1;
  bool dump_spikes = false;
  bool evaluate_only = false;          // reuse snapshots in out_dir
};

struct LayerMetrics {
  int run = 0;
  std::string fold;
  int conv_index = 0;  // 0-based conv block
  std::string split;
  double accuracy = 0.0;
  int n_samples = 0;
  std::vector<std::int64_t> confusion;
  int n_classes = 0;
};

struct ExperimentReport {
  std::vector<LayerMetrics> metrics;
  // Mean test accuracy of the last conv block across runs (and folds).
  double mean_test_accuracy = 0.0;
};

// Encode -> layer-wise train -> per-block features -> classifier, written
// to the output directory (manifest, metrics, confusion matrices, weight
// snapshots). Deterministic given (config, seeds).
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const RunOptions& opts);

// Per-layer, per-channel spike-count heatmaps of one encoded sample,
// written as portable graymaps.
void export_feature_maps(const Network& net, const SpikeTensor& sample,
                         const std::string& out_dir);

}  // namespace snn
