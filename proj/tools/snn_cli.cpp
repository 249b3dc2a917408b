#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "snn/experiment.hpp"
#include "snn/image_io.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int runs = 1;
  int parallel = 1;
  std::int64_t seed = -1;
  bool dump_spikes = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "experiment config file")
      ->required();
  cmd->add_option("--out", o.out_dir, "output directory (overrides config)");
  cmd->add_option("--runs", o.runs, "number of runs; run r uses seed + r");
  cmd->add_option("--seed", o.seed, "base seed (overrides config)");
  cmd->add_option("--parallel", o.parallel,
                  "worker threads for encoding and feature extraction");
  cmd->add_flag("--dump-spikes", o.dump_spikes,
                "write spike-tensor dumps of sample inputs");
}

snn::RunOptions to_run_options(const CommonOpts& o) {
  snn::RunOptions r;
  r.runs = o.runs;
  r.parallel = o.parallel;
  r.dump_spikes = o.dump_spikes;
  if (o.seed >= 0) r.seed = std::uint64_t(o.seed);
  if (!o.out_dir.empty()) r.out_dir = o.out_dir;
  return r;
}

void print_report(const snn::ExperimentReport& report) {
  for (const snn::LayerMetrics& m : report.metrics) {
    std::printf("run %d fold %s layer %d %-5s accuracy %6.2f%% (n=%d)\n",
                m.run, m.fold.c_str(), m.conv_index, m.split.c_str(),
                m.accuracy, m.n_samples);
  }
  std::printf("mean test accuracy (last layer): %.2f%%\n",
              report.mean_test_accuracy);
}

int cmd_train(const CommonOpts& o) {
  const snn::ExperimentConfig cfg = snn::parse_config(o.config_path);
  const snn::ExperimentReport report =
      snn::run_experiment(cfg, to_run_options(o));
  print_report(report);
  return 0;
}

int cmd_evaluate(const CommonOpts& o) {
  const snn::ExperimentConfig cfg = snn::parse_config(o.config_path);
  snn::RunOptions opts = to_run_options(o);
  opts.evaluate_only = true;
  print_report(snn::run_experiment(cfg, opts));
  return 0;
}

int cmd_export_features(const std::string& config_path,
                        const std::string& snapshot_dir,
                        const std::string& frames_dir,
                        const std::string& out_dir) {
  const snn::ExperimentConfig cfg = snn::parse_config(config_path);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(frames_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no frames in " + frames_dir);
  snn::FrameStack stack;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const snn::Image2d img = snn::read_pgm(files[i].string());
    if (i == 0) stack = snn::make_frame_stack(img.w, img.h, int(files.size()));
    std::copy(img.v.begin(), img.v.end(),
              stack.data.begin() + std::ptrdiff_t(i) * img.w * img.h);
  }
  if (cfg.frames_per_video > 0) {
    stack = snn::sample_frames(stack, cfg.frames_per_video, cfg.skip);
  }
  if (cfg.half_scale) stack = snn::downscale_half(stack);
  const snn::SpikeTensor sample = snn::encode_sample(
      stack, cfg.dog, snn::CodingParams{}, cfg.background_subtraction);
  const snn::Network net = snn::load_network(snapshot_dir);
  snn::export_feature_maps(net, sample, out_dir);
  std::printf("feature maps written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_generate_synthetic(const std::string& config_path,
                           const std::string& out_dir) {
  const snn::ExperimentConfig cfg = snn::parse_config(config_path);
  if (cfg.dataset_type != snn::DatasetType::synthetic) {
    throw std::runtime_error("generate-synthetic needs a synthetic dataset");
  }
  snn::SyntheticSpec spec = cfg.synthetic;
  spec.seed = cfg.seed;
  const std::vector<snn::LabeledVideo> videos = snn::generate_synthetic(spec);
  for (const snn::LabeledVideo& v : videos) {
    const fs::path dir = fs::path(out_dir) / "s00" / v.action / v.video_id;
    fs::create_directories(dir);
    for (int z = 0; z < v.frames.td; ++z) {
      snn::Image2d img = snn::make_image(v.frames.w, v.frames.h);
      for (int y = 0; y < v.frames.h; ++y) {
        for (int x = 0; x < v.frames.w; ++x) img.at(x, y) = v.frames.at(x, y, z);
      }
      char name[16];
      std::snprintf(name, sizeof(name), "%04d.pgm", z);
      snn::write_pgm((dir / name).string(), img);
    }
  }
  std::ofstream manifest(fs::path(out_dir) / "manifest.csv");
  manifest << "video_id,subject,action,split\n";
  for (const snn::LabeledVideo& v : videos) {
    manifest << v.video_id << ",s00," << v.action << ",train\n";
  }
  std::printf("%zu videos written to %s\n", videos.size(), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-driven convolutional SNN experiment runner"};
  app.require_subcommand(1);

  CommonOpts train_opts, eval_opts;
  CLI::App* train = app.add_subcommand("train", "train and evaluate a network");
  add_common(train, train_opts);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "re-evaluate saved snapshots");
  add_common(evaluate, eval_opts);

  std::string ef_config, ef_snapshot, ef_frames, ef_out = "feature_maps";
  CLI::App* exportf = app.add_subcommand(
      "export-features", "per-layer spike-count heatmaps for one video");
  exportf->add_option("--config", ef_config, "config with encoding settings")
      ->required();
  exportf->add_option("--snapshot", ef_snapshot, "network snapshot directory")
      ->required();
  exportf->add_option("--frames", ef_frames, "directory of frame graymaps")
      ->required();
  exportf->add_option("--out", ef_out, "output directory");

  std::string gs_config, gs_out = "synthetic";
  CLI::App* gen = app.add_subcommand("generate-synthetic",
                                     "materialize a synthetic dataset");
  gen->add_option("--config", gs_config, "config with a synthetic dataset")
      ->required();
  gen->add_option("--out", gs_out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (train->parsed()) return cmd_train(train_opts);
    if (evaluate->parsed()) return cmd_evaluate(eval_opts);
    if (exportf->parsed()) {
      return cmd_export_features(ef_config, ef_snapshot, ef_frames, ef_out);
    }
    if (gen->parsed()) return cmd_generate_synthetic(gs_config, gs_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
