// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "ibis/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ibis/error.hpp"
#include "ibis/log.hpp"

namespace ibis {

std::string_view kernel_name(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::Rbf: return "rbf";
    case KernelKind::Poly: return "poly";
    case KernelKind::Sigmoid: return "sigmoid";
  }
  return "?";
}

std::optional<KernelKind> kernel_from_name(std::string_view name) noexcept {
  for (KernelKind k : {KernelKind::Rbf, KernelKind::Poly, KernelKind::Sigmoid})
    if (kernel_name(k) == name) return k;
  return std::nullopt;
}

void validate(const SvmHyperParams& hyper) {
  require(std::isfinite(hyper.C) && hyper.C > 0.0, ErrorKind::InvariantViolation, "svm.C must be > 0");
  require(std::isfinite(hyper.gamma) && hyper.gamma > 0.0, ErrorKind::InvariantViolation, "svm.gamma must be > 0");
  require(hyper.degree >= 1, ErrorKind::InvariantViolation, "svm.degree must be >= 1");
  require(std::isfinite(hyper.poly_coef0) && std::isfinite(hyper.sigmoid_coef0), ErrorKind::InvariantViolation,
          "svm coef0 must be finite");
}

void FeatureMatrix::push_back(std::span<const double> x) {
  if (rows == 0 && values.empty()) cols = x.size();
  require(x.size() == cols, ErrorKind::DimensionMismatch,
          "feature vector has " + std::to_string(x.size()) + " entries, expected " + std::to_string(cols));
  values.insert(values.end(), x.begin(), x.end());
  ++rows;
}

double kernel_eval(const SvmHyperParams& hyper, std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::DimensionMismatch,
          "kernel arguments differ in length (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  if (hyper.kernel == KernelKind::Rbf) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    return std::exp(-hyper.gamma * d2);
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  if (hyper.kernel == KernelKind::Poly) return std::pow(hyper.gamma * dot + hyper.poly_coef0, hyper.degree);
  return std::tanh(hyper.gamma * dot + hyper.sigmoid_coef0);
}

namespace {

void check_binary(const FeatureMatrix& X, std::span<const int> y) {
  require(X.rows == y.size(), ErrorKind::DimensionMismatch, "feature rows and labels differ in count");
  require(X.rows >= 2, ErrorKind::SingleClassInput, "need at least two training points");
  bool pos = false, neg = false;
  for (int v : y) {
    require(v == 1 || v == -1, ErrorKind::InvariantViolation, "binary labels must be +1 or -1");
    (v > 0 ? pos : neg) = true;
  }
  require(pos && neg, ErrorKind::SingleClassInput, "binary SVM needs both classes present");
}

}  // namespace

SmoSolution smo_solve(const FeatureMatrix& X, std::span<const int> y, const SvmHyperParams& hyper,
                      const SmoOptions& options) {
  validate(hyper);
  check_binary(X, y);
  const std::size_t n = X.rows;
  const double C = hyper.C;
  constexpr double kTau = 1e-12;

  std::vector<double> Q(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double k = y[i] * y[j] * kernel_eval(hyper, X.row(i), X.row(j));
      Q[i * n + j] = k;
      Q[j * n + i] = k;
    }

  SmoSolution sol;
  std::vector<double>& a = sol.alpha;
  a.assign(n, 0.0);
  std::vector<double> G(n, -1.0);
  auto in_up = [&](std::size_t t) { return (y[t] > 0 && a[t] < C) || (y[t] < 0 && a[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && a[t] > 0.0) || (y[t] < 0 && a[t] < C); };

  sol.converged = false;
  for (sol.iterations = 0; sol.iterations < options.max_iterations; ++sol.iterations) {
    double gmax = -std::numeric_limits<double>::infinity(), gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * G[t];
      if (in_up(t) && v > gmax) gmax = v, i = t;
      if (in_low(t) && v < gmin) gmin = v, j = t;
    }
    if (i == n || j == n || gmax - gmin < options.tolerance) {
      sol.converged = true;
      break;
    }

    const double ai = a[i], aj = a[j];
    const double* Qi = &Q[i * n];
    const double* Qj = &Q[j * n];
    if (y[i] != y[j]) {
      double quad = Qi[i] + Qj[j] + 2.0 * Qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) a[j] = 0.0, a[i] = diff;
      } else if (a[i] < 0.0) {
        a[i] = 0.0, a[j] = -diff;
      }
      if (diff > 0.0) {
        if (a[i] > C) a[i] = C, a[j] = C - diff;
      } else if (a[j] > C) {
        a[j] = C, a[i] = C + diff;
      }
    } else {
      double quad = Qi[i] + Qj[j] - 2.0 * Qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) a[i] = C, a[j] = sum - C;
      } else if (a[j] < 0.0) {
        a[j] = 0.0, a[i] = sum;
      }
      if (sum > C) {
        if (a[j] > C) a[j] = C, a[i] = sum - C;
      } else if (a[i] < 0.0) {
        a[i] = 0.0, a[j] = sum;
      }
    }
    const double di = a[i] - ai, dj = a[j] - aj;
    for (std::size_t t = 0; t < n; ++t) G[t] += Qi[t] * di + Qj[t] * dj;
  }
  if (!sol.converged)
    logger()->debug("SMO stopped after {} iterations without reaching tolerance {}", sol.iterations,
                    options.tolerance);

  // Bias from free multipliers, else the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity(), lower = -upper, free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (a[t] >= C) {
      if (y[t] > 0) lower = std::max(lower, yg); else upper = std::min(upper, yg);
    } else if (a[t] <= 0.0) {
      if (y[t] > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (upper + lower);
  sol.bias = -rho;

  double obj = 0.0;
  for (std::size_t t = 0; t < n; ++t) obj += a[t] * (G[t] - 1.0);
  sol.objective = 0.5 * obj;
  return sol;
}

BinarySvmModel smo_train(const FeatureMatrix& X, std::span<const int> y, const SvmHyperParams& hyper,
                         const SmoOptions& options) {
  const SmoSolution sol = smo_solve(X, y, hyper, options);
  BinarySvmModel model;
  model.hyper = hyper;
  model.bias = sol.bias;
  model.iterations = sol.iterations;
  model.converged = sol.converged;
  model.support_vectors.cols = X.cols;
  for (std::size_t i = 0; i < X.rows; ++i) {
    if (sol.alpha[i] <= 0.0) continue;
    model.support_vectors.push_back(X.row(i));
    model.dual_coefs.push_back(sol.alpha[i] * y[i]);
  }
  return model;
}

double BinarySvmModel::decision(std::span<const double> x) const {
  double s = bias;
  for (std::size_t i = 0; i < dual_coefs.size(); ++i) s += dual_coefs[i] * kernel_eval(hyper, support_vectors.row(i), x);
  return s;
}

MulticlassSvm fit_multiclass(const FeatureMatrix& X, std::span<const int> labels, const SvmHyperParams& hyper,
                             const SmoOptions& options) {
  require(X.rows == labels.size(), ErrorKind::DimensionMismatch, "feature rows and labels differ in count");
  std::array<bool, kNumClasses> present{};
  for (int l : labels) {
    require(l >= 0 && l < kNumClasses, ErrorKind::InvariantViolation, "label outside 0..4");
    present[l] = true;
  }
  require(std::count(present.begin(), present.end(), true) >= 2, ErrorKind::SingleClassInput,
          "multiclass SVM needs at least two classes");

  MulticlassSvm out;
  out.hyper = hyper;
  for (int p = 0; p < kNumClasses; ++p) {
    for (int q = p + 1; q < kNumClasses; ++q) {
      if (!present[p] || !present[q]) continue;
      FeatureMatrix sub;
      sub.cols = X.cols;
      std::vector<int> y;
      for (std::size_t i = 0; i < X.rows; ++i) {
        if (labels[i] != p && labels[i] != q) continue;
        sub.push_back(X.row(i));
        y.push_back(labels[i] == p ? 1 : -1);
      }
      out.pairs.push_back({p, q, smo_train(sub, y, hyper, options)});
    }
  }
  return out;
}

SvmPrediction predict(const MulticlassSvm& model, std::span<const double> x) {
  require(!model.pairs.empty(), ErrorKind::InvariantViolation, "multiclass SVM has no pair models");
  SvmPrediction out;
  for (const PairModel& pm : model.pairs) {
    const double d = pm.model.decision(x);
    const int winner = d > 0.0 ? pm.positive : pm.negative;
    ++out.votes[winner];
    out.decision_mass[winner] += std::abs(d);
  }
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k) {
    if (out.votes[k] > out.votes[best] ||
        (out.votes[k] == out.votes[best] && out.decision_mass[k] > out.decision_mass[best]))
      best = k;
  }
  out.label = best;
  return out;
}

}  // namespace ibis
