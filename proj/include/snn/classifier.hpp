#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace snn {

// One-vs-rest linear classifier over max-normalized features.
struct LinearModel {
  int n_classes = 0;
  int dim = 0;
  std::vector<double> weights;  // class-major: [c*dim + d]
  std::vector<double> biases;   // per class
  std::vector<double> norm;     // per-dimension max, 1 where degenerate
};

struct SvmTrainConfig {
  double lambda = 1e-4;
  int epochs = 50;
  double eta0 = 1.0;
  std::uint64_t seed = 0;
};

// Mean hinge loss + (lambda/2)||w||^2 for one binary problem; labels are +-1.
double hinge_objective(std::span<const double> w, double b,
                       const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double lambda);

// Subgradient of hinge_objective (bias unregularized).
void hinge_subgradient(std::span<const double> w, double b,
                       const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double lambda,
                       std::vector<double>& grad_w, double& grad_b);

// Stochastic subgradient descent with a diminishing step eta0/(1+epoch).
// epoch_loss, when given, receives the full objective (averaged over
// classes) at the end of each epoch. Throws on fewer than two classes or
// inconsistent dimensions.
LinearModel fit(const std::vector<std::vector<double>>& features,
                const std::vector<int>& labels, const SvmTrainConfig& cfg,
                std::vector<double>* epoch_loss = nullptr);

// Argmax over class scores, ties broken by smallest class id.
int predict(const LinearModel& model, const std::vector<double>& feature);

struct EvalResult {
  double accuracy = 0.0;  // percent
  int n_classes = 0;
  std::vector<std::int64_t> confusion;  // rows = true class
};

EvalResult evaluate(const LinearModel& model,
                    const std::vector<std::vector<double>>& features,
                    const std::vector<int>& labels);

void save_model(const LinearModel& model, std::ostream& out);
LinearModel load_model(std::istream& in);

}  // namespace snn
