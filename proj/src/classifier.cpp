#include "snn/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "snn/rng.hpp"

namespace snn {

double hinge_objective(std::span<const double> w, double b,
                       const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double score = b;
    for (std::size_t d = 0; d < w.size(); ++d) score += w[d] * x[i][d];
    loss += std::max(0.0, 1.0 - y[i] * score);
  }
  loss /= double(x.size());
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return loss + 0.5 * lambda * reg;
}

void hinge_subgradient(std::span<const double> w, double b,
                       const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double lambda,
                       std::vector<double>& grad_w, double& grad_b) {
  grad_w.assign(w.size(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double score = b;
    for (std::size_t d = 0; d < w.size(); ++d) score += w[d] * x[i][d];
    if (y[i] * score < 1.0) {
      for (std::size_t d = 0; d < w.size(); ++d) {
        grad_w[d] -= y[i] * x[i][d];
      }
      grad_b -= y[i];
    }
  }
  const double inv_n = 1.0 / double(x.size());
  for (std::size_t d = 0; d < w.size(); ++d) {
    grad_w[d] = grad_w[d] * inv_n + lambda * w[d];
  }
  grad_b *= inv_n;
}

LinearModel fit(const std::vector<std::vector<double>>& features,
                const std::vector<int>& labels, const SvmTrainConfig& cfg,
                std::vector<double>* epoch_loss) {
  if (features.empty() || features.size() != labels.size()) {
    throw std::invalid_argument("fit: empty or mismatched inputs");
  }
  const std::size_t dim = features[0].size();
  for (const auto& f : features) {
    if (f.size() != dim) throw std::invalid_argument("fit: dimension mismatch");
  }
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw std::runtime_error("fit: degenerate labels, need >= 2 classes");
  }
  const int n_classes = *distinct.rbegin() + 1;

  LinearModel model;
  model.n_classes = n_classes;
  model.dim = int(dim);
  model.weights.assign(std::size_t(n_classes) * dim, 0.0);
  model.biases.assign(std::size_t(n_classes), 0.0);
  model.norm.assign(dim, 1.0);
  for (const auto& f : features) {
    for (std::size_t d = 0; d < dim; ++d) {
      model.norm[d] = std::max(model.norm[d], std::abs(f[d]));
    }
  }

  std::vector<std::vector<double>> x(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    x[i].resize(dim);
    for (std::size_t d = 0; d < dim; ++d) x[i][d] = features[i][d] / model.norm[d];
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  if (epoch_loss) epoch_loss->clear();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double eta = cfg.eta0 / (1.0 + epoch);
    rng.shuffle(order);
    for (std::size_t i : order) {
      for (int c = 0; c < n_classes; ++c) {
        double* w = model.weights.data() + std::size_t(c) * dim;
        const double y = labels[i] == c ? 1.0 : -1.0;
        double score = model.biases[std::size_t(c)];
        for (std::size_t d = 0; d < dim; ++d) score += w[d] * x[i][d];
        const double shrink = 1.0 - eta * cfg.lambda;
        for (std::size_t d = 0; d < dim; ++d) w[d] *= shrink;
        if (y * score < 1.0) {
          for (std::size_t d = 0; d < dim; ++d) w[d] += eta * y * x[i][d];
          model.biases[std::size_t(c)] += eta * y;
        }
      }
    }
    if (epoch_loss) {
      double total = 0.0;
      std::vector<int> y(x.size());
      for (int c = 0; c < n_classes; ++c) {
        for (std::size_t i = 0; i < x.size(); ++i) {
          y[i] = labels[i] == c ? 1 : -1;
        }
        total += hinge_objective(
            std::span<const double>(model.weights.data() + std::size_t(c) * dim,
                                    dim),
            model.biases[std::size_t(c)], x, y, cfg.lambda);
      }
      epoch_loss->push_back(total / n_classes);
    }
  }
  return model;
}

int predict(const LinearModel& model, const std::vector<double>& feature) {
  if (int(feature.size()) != model.dim) {
    throw std::invalid_argument("predict: dimension mismatch");
  }
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < model.n_classes; ++c) {
    double score = model.biases[std::size_t(c)];
    const double* w = model.weights.data() + std::size_t(c) * model.dim;
    for (int d = 0; d < model.dim; ++d) {
      score += w[d] * feature[std::size_t(d)] / model.norm[std::size_t(d)];
    }
    if (score > best_score) {  // ties keep the smallest class id
      best_score = score;
      best = c;
    }
  }
  return best;
}

EvalResult evaluate(const LinearModel& model,
                    const std::vector<std::vector<double>>& features,
                    const std::vector<int>& labels) {
  if (features.empty() || features.size() != labels.size()) {
    throw std::invalid_argument("evaluate: empty or mismatched inputs");
  }
  EvalResult r;
  r.n_classes = model.n_classes;
  r.confusion.assign(std::size_t(model.n_classes) * model.n_classes, 0);
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const int pred = predict(model, features[i]);
    r.confusion[std::size_t(labels[i]) * model.n_classes + pred] += 1;
    if (pred == labels[i]) ++correct;
  }
  r.accuracy = 100.0 * double(correct) / double(features.size());
  return r;
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g\n", v);
  out << buf;
}

}  // namespace

void save_model(const LinearModel& model, std::ostream& out) {
  out << "linear " << model.n_classes << ' ' << model.dim << '\n';
  for (double v : model.weights) put_double(out, v);
  out << "biases\n";
  for (double v : model.biases) put_double(out, v);
  out << "norm\n";
  for (double v : model.norm) put_double(out, v);
}

LinearModel load_model(std::istream& in) {
  std::string tag;
  in >> tag;
  if (tag != "linear") throw std::runtime_error("load_model: bad header");
  LinearModel m;
  in >> m.n_classes >> m.dim;
  m.weights.resize(std::size_t(m.n_classes) * m.dim);
  for (double& v : m.weights) in >> v;
  in >> tag;
  if (tag != "biases") throw std::runtime_error("load_model: missing biases");
  m.biases.resize(std::size_t(m.n_classes));
  for (double& v : m.biases) in >> v;
  in >> tag;
  if (tag != "norm") throw std::runtime_error("load_model: missing norm");
  m.norm.resize(std::size_t(m.dim));
  for (double& v : m.norm) in >> v;
  if (!in) throw std::runtime_error("load_model: truncated");
  return m;
}

}  // namespace snn
