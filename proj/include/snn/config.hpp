#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "snn/classifier.hpp"
#include "snn/datasets.hpp"
#include "snn/encoding.hpp"
#include "snn/pipeline.hpp"

namespace snn {

enum class DatasetType { synthetic, frames };

struct ConvLayerCfg {
  int filters = 16;
  int f_w = 5, f_h = 5, f_td = 1;
  int stride_w = 1, stride_h = 1, stride_td = 1;
};

struct PoolLayerCfg {
  int p_w = 2, p_h = 2, p_td = 1;
  int stride_w = 2, stride_h = 2, stride_td = 1;
};

// Full declarative description of one run.
struct ExperimentConfig {
  // [dataset]
  DatasetType dataset_type = DatasetType::synthetic;
  SyntheticSpec synthetic;      // train set; count_per_class = train count
  int synthetic_test_per_class = 0;
  std::string frames_root;
  SplitKind protocol = SplitKind::fixed_subject_split;

  // [encoding]
  int frames_per_video = 0;  // <= 0: keep all frames
  int skip = 0;
  bool half_scale = false;
  bool background_subtraction = false;
  DogParams dog;

  // [architecture]
  NetKind kind = NetKind::three_d;
  std::vector<ConvLayerCfg> conv_layers;
  std::vector<PoolLayerCfg> pool_layers;  // one after each conv layer
  std::vector<double> t_obj;              // per conv layer
  int grid_w = 1, grid_h = 1, grid_td = 1;

  // [plasticity]
  StdpParams stdp;
  ThresholdParams threshold;  // t_obj field unused; schedule above
  // per-conv-layer resolved schedules; a single config value broadcasts
  std::vector<double> th_min_sched;
  std::vector<double> th_init_sched;
  std::vector<double> eta_w_sched;
  std::vector<double> eta_th_sched;

  // [classifier]
  SvmTrainConfig svm;

  // [run]
  std::uint64_t seed = 0;
  int epochs_per_layer = 1;
  bool report_each_layer = true;
  std::string output_dir = "out";
};

// Strict sectioned key = value parser; unknown keys and malformed lines
// are errors naming the offending line, missing keys fall back to the
// documented defaults where one exists.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& name = "<config>");

// Resolved config in the same format parse_config reads; round-trips.
void write_config(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace snn
