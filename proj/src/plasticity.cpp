#include "snn/plasticity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snn {

double integrate(double v, double w, const IfParams& params) {
  return v + w / params.c_m;
}

double stdp_delta(std::optional<double> t_pre, double t_post,
                  const StdpParams& params) {
  const double pre = t_pre.value_or(1.0);
  const double dt = std::abs(pre - t_post);
  const double mag = params.eta_w * std::exp(-dt / params.tau_stdp);
  return pre <= t_post ? mag : -mag;
}

void apply_stdp(std::span<double> weights, std::span<const double> pre_times,
                double t_post, const StdpParams& params) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double w = weights[i] + stdp_delta(pre_times[i], t_post, params);
    weights[i] = std::clamp(w, params.w_min, params.w_max);
  }
}

void threshold_update(std::span<double> thresholds, int winner, double t,
                      const ThresholdParams& params) {
  const double l_d = double(thresholds.size());
  const double drift = -params.eta_th * (t - params.t_obj);
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    const double comp =
        (int(j) == winner) ? params.eta_th : -params.eta_th / l_d;
    thresholds[j] = std::max(params.th_min, thresholds[j] + drift + comp);
  }
}

std::size_t wta_select(std::span<const WtaCandidate> candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("wta_select: no candidates");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const WtaCandidate& c = candidates[i];
    const WtaCandidate& b = candidates[best];
    if (c.t < b.t || (c.t == b.t && c.k < b.k)) best = i;
  }
  return best;
}

}  // namespace snn
