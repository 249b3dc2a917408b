#include "snn/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "snn/image_io.hpp"
#include "snn/parallel.hpp"

namespace fs = std::filesystem;

namespace snn {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct EncodedSplit {
  std::string fold_name;
  std::vector<std::string> actions;
  // encoded tensors + labels per subset
  std::vector<SpikeTensor> train, val, test;
  std::vector<int> train_labels, val_labels, test_labels;
};

FrameStack preprocess(const ExperimentConfig& cfg, const FrameStack& raw,
                      bool apply_frame_sampling) {
  FrameStack f = raw;
  if (apply_frame_sampling && cfg.frames_per_video > 0) {
    f = sample_frames(f, cfg.frames_per_video, cfg.skip);
  }
  if (cfg.half_scale) f = downscale_half(f);
  return f;
}

void encode_subset(const ExperimentConfig& cfg,
                   const std::vector<LabeledVideo>& videos,
                   bool apply_frame_sampling, int parallel,
                   std::vector<SpikeTensor>& tensors,
                   std::vector<int>& labels) {
  tensors.resize(videos.size());
  labels.resize(videos.size());
  CodingParams coding;
  parallel_for(videos.size(), parallel, [&](std::size_t i) {
    tensors[i] = encode_sample(
        preprocess(cfg, videos[i].frames, apply_frame_sampling), cfg.dog,
        coding, cfg.background_subtraction);
    labels[i] = videos[i].label;
  });
}

Network build_network(const ExperimentConfig& cfg, Rng& rng) {
  Network net;
  net.kind = cfg.kind;
  net.grid_w = cfg.grid_w;
  net.grid_h = cfg.grid_h;
  net.grid_td = cfg.grid_td;
  int c_in = 2;
  for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
    const ConvLayerCfg& c = cfg.conv_layers[i];
    LayerNode conv;
    conv.kind = LayerNode::Kind::conv;
    conv.conv.geom = {c.f_w, c.f_h, c.f_td, c_in, c.filters,
                      c.stride_w, c.stride_h, c.stride_td};
    conv.conv.stdp = cfg.stdp;
    conv.conv.threshold = cfg.threshold;
    conv.conv.threshold.t_obj = cfg.t_obj[i];
    if (i < cfg.th_min_sched.size()) {
      conv.conv.threshold.th_min = cfg.th_min_sched[i];
    }
    if (i < cfg.th_init_sched.size()) {
      conv.conv.threshold.init_mean = cfg.th_init_sched[i];
    }
    if (i < cfg.eta_w_sched.size()) {
      conv.conv.stdp.eta_w = cfg.eta_w_sched[i];
    }
    if (i < cfg.eta_th_sched.size()) {
      conv.conv.threshold.eta_th = cfg.eta_th_sched[i];
    }
    conv.conv.init(rng);
    net.layers.push_back(std::move(conv));
    c_in = c.filters;

    const PoolLayerCfg& p = cfg.pool_layers[i];
    LayerNode pool;
    pool.kind = LayerNode::Kind::pool;
    pool.pool = {p.p_w, p.p_h, p.p_td, p.stride_w, p.stride_h, p.stride_td};
    net.layers.push_back(std::move(pool));
  }
  return net;
}

std::vector<std::vector<double>> extract_all(const Network& net,
                                             const std::vector<SpikeTensor>& xs,
                                             int upto_conv, int parallel) {
  std::vector<std::vector<double>> feats(xs.size());
  parallel_for(xs.size(), parallel, [&](std::size_t i) {
    if (net.kind == NetKind::three_d) {
      feats[i] = extract_features_3d(net, xs[i], upto_conv);
    } else {
      feats[i] = extract_features_2d(net, split_frames(xs[i]), upto_conv);
    }
  });
  return feats;
}

void write_confusion(const std::string& path, const EvalResult& r,
                     const std::vector<std::string>& actions) {
  std::ofstream out(path);
  out << "accuracy " << fmt(r.accuracy) << "\n";
  for (int i = 0; i < r.n_classes; ++i) {
    out << (i < int(actions.size()) ? actions[std::size_t(i)]
                                    : std::to_string(i));
    for (int j = 0; j < r.n_classes; ++j) {
      out << ' ' << r.confusion[std::size_t(i) * r.n_classes + j];
    }
    out << '\n';
  }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg_in,
                                const RunOptions& opts) {
  ExperimentConfig cfg = cfg_in;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out_dir) cfg.output_dir = *opts.out_dir;
  const std::string out = cfg.output_dir;
  fs::create_directories(out);
  {
    std::ofstream manifest(out + "/manifest.txt");
    write_config(cfg, manifest);
  }

  ExperimentReport report;
  std::ostringstream records;
  double last_block_sum = 0.0;
  int last_block_n = 0;

  for (int run = 0; run < opts.runs; ++run) {
    const std::uint64_t seed_r = cfg.seed + std::uint64_t(run);
    const std::string run_dir = out + "/run" + std::to_string(run);

    // materialize splits
    std::vector<EncodedSplit> splits;
    if (cfg.dataset_type == DatasetType::synthetic) {
      SyntheticSpec spec = cfg.synthetic;
      spec.seed = seed_r;
      spec.count_per_class += cfg.synthetic_test_per_class;
      const std::vector<LabeledVideo> all = generate_synthetic(spec);
      std::vector<LabeledVideo> train_videos, test_videos;
      for (std::size_t ci = 0; ci < spec.classes.size(); ++ci) {
        const std::size_t base = ci * std::size_t(spec.count_per_class);
        for (int s = 0; s < spec.count_per_class; ++s) {
          const LabeledVideo& v = all[base + std::size_t(s)];
          (s < cfg.synthetic.count_per_class ? train_videos : test_videos)
              .push_back(v);
        }
      }
      EncodedSplit es;
      es.fold_name = "fixed";
      for (SyntheticClass c : spec.classes) es.actions.push_back(to_string(c));
      encode_subset(cfg, train_videos, true, opts.parallel, es.train,
                    es.train_labels);
      encode_subset(cfg, test_videos, true, opts.parallel, es.test,
                    es.test_labels);
      splits.push_back(std::move(es));
    } else {
      SplitProtocol protocol = kth_protocol();
      protocol.kind = cfg.protocol;
      // the loader applies frame sampling itself
      const std::vector<DatasetSplit> raw = load_frame_dataset(
          cfg.frames_root, protocol, cfg.frames_per_video, cfg.skip);
      for (const DatasetSplit& d : raw) {
        EncodedSplit es;
        es.fold_name = d.fold_name;
        es.actions = d.actions;
        encode_subset(cfg, d.train, false, opts.parallel, es.train,
                      es.train_labels);
        encode_subset(cfg, d.val, false, opts.parallel, es.val, es.val_labels);
        encode_subset(cfg, d.test, false, opts.parallel, es.test,
                      es.test_labels);
        std::ofstream mf(out + "/split_" + d.fold_name + ".csv");
        write_split_manifest(d, mf);
        splits.push_back(std::move(es));
      }
    }

    for (const EncodedSplit& split : splits) {
      const std::string fold_dir =
          splits.size() > 1 ? run_dir + "/" + split.fold_name : run_dir;
      fs::create_directories(fold_dir);

      Rng master(seed_r);
      Network net;
      std::string snapshot_dir = fold_dir + "/snapshot";
      if (opts.evaluate_only) {
        net = load_network(snapshot_dir);
      } else {
        net = build_network(cfg, master);
        std::vector<SpikeTensor> items;
        if (cfg.kind == NetKind::three_d) {
          items = split.train;
        } else {
          for (const SpikeTensor& s : split.train) {
            for (SpikeTensor& f : split_frames(s)) items.push_back(std::move(f));
          }
        }
        TrainPlan plan;
        plan.epochs_per_layer = cfg.epochs_per_layer;
        plan.seed = master.next_u64();
        train_layerwise(net, items, plan);
        save_network(net, snapshot_dir);
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
          if (net.layers[li].kind == LayerNode::Kind::conv) {
            export_filter_images(net.layers[li].conv,
                                 snapshot_dir + "/filters_layer" +
                                     std::to_string(li / 2));
          }
        }
      }

      if (opts.dump_spikes) {
        fs::create_directories(fold_dir + "/spikes");
        if (!split.train.empty()) {
          std::ofstream f(fold_dir + "/spikes/train0.txt");
          dump_spikes(split.train[0], f);
        }
        if (!split.test.empty()) {
          std::ofstream f(fold_dir + "/spikes/test0.txt");
          dump_spikes(split.test[0], f);
        }
      }

      std::vector<int> blocks;
      const int n_conv = net.conv_count();
      if (cfg.report_each_layer) {
        for (int b = 0; b < n_conv; ++b) blocks.push_back(b);
      } else {
        blocks.push_back(n_conv - 1);
      }

      for (int b : blocks) {
        const auto train_feats =
            extract_all(net, split.train, b, opts.parallel);
        SvmTrainConfig svm = cfg.svm;
        svm.seed = seed_r * 1000003 + std::uint64_t(b);
        const LinearModel model = fit(train_feats, split.train_labels, svm);
        {
          std::ofstream mf(fold_dir + "/model_block" + std::to_string(b) +
                           ".txt");
          save_model(model, mf);
        }
        struct Sub {
          const char* name;
          const std::vector<SpikeTensor>* xs;
          const std::vector<int>* ys;
        };
        std::vector<Sub> subs = {{"train", &split.train, &split.train_labels}};
        if (!split.val.empty()) subs.push_back({"val", &split.val, &split.val_labels});
        subs.push_back({"test", &split.test, &split.test_labels});
        for (const Sub& sub : subs) {
          const auto feats = (sub.xs == &split.train)
                                 ? train_feats
                                 : extract_all(net, *sub.xs, b, opts.parallel);
          const EvalResult r = evaluate(model, feats, *sub.ys);
          LayerMetrics m;
          m.run = run;
          m.fold = split.fold_name;
          m.conv_index = b;
          m.split = sub.name;
          m.accuracy = r.accuracy;
          m.n_samples = int(sub.xs->size());
          m.confusion = r.confusion;
          m.n_classes = r.n_classes;
          report.metrics.push_back(m);
          records << "run=" << run << " fold=" << split.fold_name
                  << " layer=" << b << " split=" << sub.name
                  << " accuracy=" << fmt(r.accuracy)
                  << " n_samples=" << sub.xs->size() << "\n";
          write_confusion(fold_dir + "/confusion_block" + std::to_string(b) +
                              "_" + sub.name + ".txt",
                          r, split.actions);
          if (sub.xs == &split.test && b == n_conv - 1) {
            last_block_sum += r.accuracy;
            ++last_block_n;
          }
        }
      }
    }
  }

  report.mean_test_accuracy =
      last_block_n > 0 ? last_block_sum / last_block_n : 0.0;

  {
    std::ofstream rec(out + "/metrics.records");
    rec << records.str();
  }
  {
    std::ofstream txt(out + "/metrics.txt");
    txt << "run fold layer split accuracy n_samples\n";
    for (const LayerMetrics& m : report.metrics) {
      txt << m.run << ' ' << m.fold << ' ' << m.conv_index << ' ' << m.split
          << ' ' << fmt(m.accuracy) << ' ' << m.n_samples << '\n';
    }
    txt << "mean_test_accuracy " << fmt(report.mean_test_accuracy) << '\n';
  }
  return report;
}

void export_feature_maps(const Network& net, const SpikeTensor& sample,
                         const std::string& out_dir) {
  fs::create_directories(out_dir);
  SpikeTensor x = sample;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const LayerNode& l = net.layers[li];
    x = (l.kind == LayerNode::Kind::conv) ? conv_forward_infer(l.conv, x)
                                          : pool_forward(l.pool, x);
    // per-channel spike-count heatmap, summed over z
    std::vector<std::vector<double>> counts(
        std::size_t(x.shape.c),
        std::vector<double>(std::size_t(x.shape.w) * x.shape.h, 0.0));
    double max_count = 0.0;
    for (const SpikeEvent& e : x.events) {
      double& c = counts[std::size_t(e.k)][std::size_t(e.y) * x.shape.w + e.x];
      c += 1.0;
      max_count = std::max(max_count, c);
    }
    for (int k = 0; k < x.shape.c; ++k) {
      Image2d img = make_image(x.shape.w, x.shape.h);
      if (max_count > 0.0) {
        for (std::size_t i = 0; i < img.v.size(); ++i) {
          img.v[i] = counts[std::size_t(k)][i] / max_count;
        }
      }
      write_pgm(out_dir + "/layer" + std::to_string(li) + "_channel" +
                    std::to_string(k) + ".pgm",
                img);
    }
  }
}

}  // namespace snn
