#pragma once

#include <optional>
#include <span>
#include <vector>

namespace snn {

struct IfParams {
  double v_rest = 0.0;
  double c_m = 1.0;
};

struct StdpParams {
  double eta_w = 0.1;
  double tau_stdp = 0.1;
  double w_min = 0.0;
  double w_max = 1.0;
};

struct ThresholdParams {
  double t_obj = 0.65;
  double eta_th = 1.0;
  double th_min = 1.0;
  double init_mean = 5.0;
  double init_std = 1.0;
};

// IF integration of one incoming spike: v + w/c_m.
double integrate(double v, double w, const IfParams& params = {});

// Biological STDP with a decaying window: +eta_w*e^(-|dt|/tau) when the
// presynaptic spike precedes (or coincides with) the postsynaptic one,
// negated otherwise. A synapse that never spiked counts as t_pre = 1.
double stdp_delta(std::optional<double> t_pre, double t_post,
                  const StdpParams& params);

// Updates every synapse of the winning filter and clamps to [w_min, w_max].
// pre_times uses 1.0 for synapses without a spike in the sample window.
void apply_stdp(std::span<double> weights, std::span<const double> pre_times,
                double t_post, const StdpParams& params);

// Homeostasis: every competitor moves by -eta_th*(t - t_obj), the winner
// additionally by +eta_th and each loser by -eta_th/l_d, floored at th_min.
// l_d is thresholds.size().
void threshold_update(std::span<double> thresholds, int winner, double t,
                      const ThresholdParams& params);

struct WtaCandidate {
  int k = 0;     // filter index
  double t = 0;  // firing timestamp
};

// Earliest-firing candidate wins; ties broken by smallest k.
// Returns the index into candidates.
std::size_t wta_select(std::span<const WtaCandidate> candidates);

}  // namespace snn
