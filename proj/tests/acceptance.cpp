// Acceptance suite: each criterion prints one PASS/FAIL line.
// Usage: acceptance [N]  (no argument runs criteria 1-7 in order)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "snn/classifier.hpp"
#include "snn/config.hpp"
#include "snn/experiment.hpp"
#include "snn/layers.hpp"
#include "snn/pipeline.hpp"
#include "snn/plasticity.hpp"
#include "snn/rng.hpp"

using namespace snn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

int n_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion_equations() {
  Outcome o;
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };

  o.require(near(integrate(0.9, 0.3), 1.2), "integrate(0.9, 0.3)");
  o.require(near(integrate(0.0, 0.0), 0.0), "integrate(0, 0)");

  StdpParams sp;  // eta_w = 0.1, tau = 0.1
  o.require(near(stdp_delta(0.4, 0.5, sp), 0.1 * std::exp(-1.0)),
            "stdp potentiation at |dt| = 0.1");
  o.require(near(stdp_delta(0.6, 0.5, sp), -0.1 * std::exp(-1.0)),
            "stdp depression at |dt| = 0.1");
  o.require(near(stdp_delta(0.5, 0.5, sp), 0.1), "stdp at zero delay");
  o.require(near(stdp_delta(std::nullopt, 0.5, sp),
                 -0.1 * std::exp(-0.5 / 0.1)),
            "stdp silent synapse = t_pre 1");

  ThresholdParams tp;  // eta_th = 1, th_min = 1
  tp.t_obj = 0.65;
  std::vector<double> th(16, 5.0);
  threshold_update(th, 3, 0.7, tp);
  o.require(near(th[3], 5.95), "winner threshold 5 -> 5.95");
  o.require(near(th[0], 4.8875), "loser threshold 5 -> 4.8875");
  std::vector<double> low = {1.0, 1.0};
  threshold_update(low, 0, 0.9, tp);
  o.require(near(low[1], 1.0), "threshold floor at th_min");

  o.require(n_sampling_2d(80, 60, 5, 5) == 384, "n_sampling_2d(80,60,5,5)");
  o.require(n_sampling_2d(5, 5, 5, 5) == 2, "n_sampling_2d(5,5,5,5)");
  o.require(n_sampling_3d(80, 60, 20, 5, 5, 2) == 5760,
            "n_sampling_3d(80,60,20,5,5,2)");
  o.require(n_sampling_3d(5, 5, 2, 5, 5, 2) == 3, "n_sampling_3d(5,5,2,5,5,2)");
  return o;
}

// ---------------------------------------------------------------- criterion 2

SpikeTensor random_tensor(Rng& rng, const Shape4& shape, double density) {
  SpikeTensor t;
  t.shape = shape;
  for (int z = 0; z < shape.td; ++z) {
    for (int y = 0; y < shape.h; ++y) {
      for (int x = 0; x < shape.w; ++x) {
        for (int k = 0; k < shape.c; ++k) {
          if (rng.uniform() < density) {
            t.events.push_back({x, y, z, k, rng.uniform()});
          }
        }
      }
    }
  }
  sort_events(t.events);
  return t;
}

Outcome criterion_dense_oracle() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(20260823);
  for (int inst = 0; inst < 200 && o.pass; ++inst) {
    const int w = 4 + int(rng.below(7));     // 4..10
    const int h = 4 + int(rng.below(7));
    const int td = 1 + int(rng.below(6));    // 1..6
    const int fw = 2 + int(rng.below(int(std::min(w, 5) - 1)));
    const int fh = 2 + int(rng.below(int(std::min(h, 5) - 1)));
    const int ftd = 1 + int(rng.below(std::uint64_t(std::min(td, 3))));
    ConvLayer layer;
    layer.geom = {fw, fh, ftd, 2, 1 + int(rng.below(4)),
                  1 + int(rng.below(2)), 1 + int(rng.below(2)),
                  1 + int(rng.below(2))};
    layer.init(rng);
    for (double& t : layer.thresholds) t = 1e18;  // never fire

    const SpikeTensor input = random_tensor(rng, {w, h, td, 2}, 0.4);
    const Shape4 out = output_shape(layer.geom, input.shape);
    std::vector<double> got;
    conv_forward_infer(layer, input, &got);

    // brute-force dense cross-correlation of the spike indicator
    std::vector<double> dense(input.shape.volume(), 0.0);
    for (const SpikeEvent& e : input.events) {
      dense[std::size_t(((e.z * h + e.y) * w + e.x) * 2 + e.k)] = 1.0;
    }
    bool ok = true;
    for (int oz = 0; oz < out.td && ok; ++oz) {
      for (int oy = 0; oy < out.h && ok; ++oy) {
        for (int ox = 0; ox < out.w && ok; ++ox) {
          for (int k = 0; k < out.c && ok; ++k) {
            double v = 0.0;
            for (int c = 0; c < 2; ++c) {
              for (int fz = 0; fz < ftd; ++fz) {
                for (int fy = 0; fy < fh; ++fy) {
                  for (int fx = 0; fx < fw; ++fx) {
                    const int ix = ox * layer.geom.stride_w + fx;
                    const int iy = oy * layer.geom.stride_h + fy;
                    const int iz = oz * layer.geom.stride_td + fz;
                    v += layer.w_at(k, c, fx, fy, fz) *
                         dense[std::size_t(((iz * h + iy) * w + ix) * 2 + c)];
                  }
                }
              }
            }
            const std::size_t loc = std::size_t((oz * out.h + oy) * out.w + ox);
            const double ev = got[loc * std::size_t(out.c) + std::size_t(k)];
            if (std::abs(ev - v) > 1e-12) ok = false;
          }
        }
      }
    }
    o.require(ok, "instance " + std::to_string(inst) +
                      ": event-driven potentials differ from dense oracle");
  }
  const double secs = elapsed_s(start);
  o.require(secs < 30.0, "took " + std::to_string(secs) + " s (limit 30)");
  return o;
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_homeostasis() {
  Outcome o;
  for (double t_obj : {0.3, 0.65}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      Rng rng(seed);
      ConvLayer layer;
      layer.geom = {6, 6, 1, 2, 8, 1, 1, 1};  // one output location
      layer.threshold.t_obj = t_obj;
      layer.init(rng);

      std::vector<double> times;
      const std::vector<std::int32_t> locs = {0};
      int attempts = 0;
      while (times.size() < 500 && attempts < 5000) {
        ++attempts;
        const SpikeTensor input = random_tensor(rng, {6, 6, 1, 2}, 0.5);
        const SpikeTensor out = conv_forward_train(layer, input, locs);
        if (!out.events.empty()) times.push_back(out.events[0].t);
      }
      if (times.size() < 500) {
        o.require(false, "t_obj " + std::to_string(t_obj) + " seed " +
                             std::to_string(seed) + ": only " +
                             std::to_string(times.size()) + " WTA events");
        continue;
      }
      double mean = 0.0;
      for (std::size_t i = times.size() - 100; i < times.size(); ++i) {
        mean += times[i] / 100.0;
      }
      o.require(std::abs(mean - t_obj) <= 0.1,
                "t_obj " + std::to_string(t_obj) + " seed " +
                    std::to_string(seed) + ": trailing mean " +
                    std::to_string(mean));
    }
  }
  return o;
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_invariants() {
  Outcome o;
  Rng rng(777);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int w = 5 + int(rng.below(4));
    const int h = 5 + int(rng.below(4));
    const int td = 1 + int(rng.below(4));
    ConvLayer layer;
    layer.geom = {3, 3, 1 + int(rng.below(std::uint64_t(std::min(td, 2)))),
                  2, 1 + int(rng.below(6)), 1 + int(rng.below(2)),
                  1 + int(rng.below(2)), 1};
    layer.init(rng);
    const SpikeTensor input = random_tensor(rng, {w, h, td, 2}, 0.5);
    const SpikeTensor out = conv_forward_infer(layer, input);

    // shape, ordering, single spike per coordinate, timestamps in range
    if (out.shape != output_shape(layer.geom, input.shape)) ++violations;
    if (validate_tensor(out).has_value()) ++violations;
    // causality: every output time is the time of some input event
    for (const SpikeEvent& e : out.events) {
      bool found = false;
      for (const SpikeEvent& i : input.events) {
        if (i.t == e.t) {
          found = true;
          break;
        }
      }
      if (!found) ++violations;
    }
  }
  o.require(violations == 0,
            std::to_string(violations) + " invariant violations");
  return o;
}

// ---------------------------------------------------------------- criterion 5

std::string benchmark_config(bool three_d) {
  std::ostringstream cfg;
  cfg << R"([dataset]
type = synthetic
classes = bar-left, bar-right, bar-up, bar-down
width = 32
height = 32
frames = 8
thickness = 3
speed = 1
noise = 0.02
train_per_class = 100
test_per_class = 50

[architecture]
)";
  // Thresholds scale with receptive field size: the first layer sees
  // 3x3x(td)x2 synapses and the second 3x3x(td)x16, and the 2D kernels
  // carry half the synapses of their 3x3x2 counterparts.
  if (three_d) {
    cfg << "kind = 3d\nfilters = 16, 32\nkernels = 3x3x2, 3x3x2\n"
           "conv_strides = 1x1x1, 1x1x1\npooling = 2x2x1, 2x2x2\n"
           "grid = 3x3x1\nt_obj = 0.65, 0.65\n\n[plasticity]\n"
           "th_min = 12, 35\nth_init_mean = 12, 42\n";
  } else {
    cfg << "kind = 2d\nfilters = 16, 32\nkernels = 3x3, 3x3\n"
           "conv_strides = 1x1, 1x1\npooling = 2x2, 2x2\n"
           "grid = 3x3\nt_obj = 0.65, 0.65\n\n[plasticity]\n"
           "th_min = 6, 18\nth_init_mean = 6, 21\n";
  }
  cfg << "eta_w = 0.05\neta_th = 0.05\n\n[run]\nseed = 1\n";
  return cfg.str();
}

double run_benchmark(bool three_d, const std::string& out_dir) {
  const ExperimentConfig cfg =
      parse_config_text(benchmark_config(three_d), "benchmark");
  RunOptions opts;
  opts.out_dir = out_dir;
  opts.parallel = n_threads();
  return run_experiment(cfg, opts).mean_test_accuracy;
}

Outcome criterion_direction_benchmark() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const fs::path base = fs::temp_directory_path() / "snn_acceptance";
  fs::remove_all(base);
  const double acc3d = run_benchmark(true, (base / "bench3d").string());
  const double acc2d = run_benchmark(false, (base / "bench2d").string());
  o.require(acc3d >= 90.0, "3d test accuracy " + std::to_string(acc3d) +
                               " below 90");
  o.require(acc2d <= 65.0, "2d test accuracy " + std::to_string(acc2d) +
                               " above 65");
  const double secs = elapsed_s(start);
  o.require(secs < 600.0, "took " + std::to_string(secs) + " s (limit 600)");
  if (o.pass) {
    o.detail = "3d " + std::to_string(acc3d) + "%, 2d " +
               std::to_string(acc2d) + "%";
  }
  fs::remove_all(base);
  return o;
}

// ---------------------------------------------------------------- criterion 6

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome criterion_determinism() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / "snn_acceptance_det";
  fs::remove_all(base);
  run_benchmark(true, (base / "a").string());
  run_benchmark(true, (base / "b").string());
  for (const char* rel :
       {"metrics.records", "metrics.txt", "run0/model_block0.txt",
        "run0/model_block1.txt", "run0/snapshot/layer0.txt",
        "run0/snapshot/layer1.txt"}) {
    const std::string sa = slurp(base / "a" / rel);
    const std::string sb = slurp(base / "b" / rel);
    o.require(!sa.empty() && sa == sb,
              std::string(rel) + " differs between identical runs");
  }
  fs::remove_all(base);
  return o;
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion_gradient_check() {
  Outcome o;
  Rng rng(99);
  const int dim = 5;
  const double lambda = 1e-3;
  const double h = 1e-6;
  int checked = 0;
  int attempts = 0;
  while (checked < 100 && attempts < 2000) {
    ++attempts;
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 6; ++i) {
      std::vector<double> f(dim);
      for (double& v : f) v = rng.uniform(-1.0, 1.0);
      x.push_back(std::move(f));
      y.push_back(rng.below(2) == 0 ? -1 : 1);
    }
    std::vector<double> w(dim);
    for (double& v : w) v = rng.uniform(-1.0, 1.0);
    const double b = rng.uniform(-0.5, 0.5);

    bool near_kink = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double m = b;
      for (int d = 0; d < dim; ++d) m += w[std::size_t(d)] * x[i][std::size_t(d)];
      if (std::abs(1.0 - double(y[i]) * m) < 1e-4) near_kink = true;
    }
    if (near_kink) continue;
    ++checked;

    std::vector<double> grad_w;
    double grad_b = 0.0;
    hinge_subgradient(w, b, x, y, lambda, grad_w, grad_b);
    for (int d = 0; d < dim; ++d) {
      std::vector<double> wp = w, wm = w;
      wp[std::size_t(d)] += h;
      wm[std::size_t(d)] -= h;
      const double num = (hinge_objective(wp, b, x, y, lambda) -
                          hinge_objective(wm, b, x, y, lambda)) /
                         (2 * h);
      o.require(std::abs(grad_w[std::size_t(d)] - num) <= 1e-5,
                "weight gradient mismatch at point " + std::to_string(checked));
    }
    const double numb = (hinge_objective(w, b + h, x, y, lambda) -
                         hinge_objective(w, b - h, x, y, lambda)) /
                        (2 * h);
    o.require(std::abs(grad_b - numb) <= 1e-5,
              "bias gradient mismatch at point " + std::to_string(checked));
  }
  o.require(checked == 100, "only " + std::to_string(checked) +
                                " usable gradient points");
  return o;
}

// ------------------------------------------------------------------- harness

const struct {
  int id;
  const char* name;
  Outcome (*fn)();
} kCriteria[] = {
    {1, "closed-form equation suite", criterion_equations},
    {2, "dense-oracle equivalence", criterion_dense_oracle},
    {3, "homeostasis convergence", criterion_homeostasis},
    {4, "single-spike and causality invariants", criterion_invariants},
    {5, "synthetic direction benchmark", criterion_direction_benchmark},
    {6, "determinism", criterion_determinism},
    {7, "classifier gradient check", criterion_gradient_check},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  bool all_pass = true;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d (%s): %s%s%s\n", c.id, c.name,
                o.pass ? "PASS" : "FAIL", o.detail.empty() ? "" : " - ",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) all_pass = false;
  }
  return all_pass ? 0 : 1;
}
