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

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ibis/csi.hpp"

namespace ibis {

enum class KernelKind { Rbf, Poly, Sigmoid };  // declaration order is the grid tie-break order

std::string_view kernel_name(KernelKind kind) noexcept;
std::optional<KernelKind> kernel_from_name(std::string_view name) noexcept;

struct SvmHyperParams {
  KernelKind kernel = KernelKind::Rbf;
  double C = 1.0;
  double gamma = 1.0;
  int degree = 3;              // poly
  double poly_coef0 = 1.0;     // poly
  double sigmoid_coef0 = 0.0;  // sigmoid

  friend bool operator==(const SvmHyperParams&, const SvmHyperParams&) = default;
};

void validate(const SvmHyperParams& hyper);

/// Feature vectors are rows of a dense [n x d] row-major buffer.
struct FeatureMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  void push_back(std::span<const double> x);

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// rbf: exp(-g |x-y|^2); poly: (g x.y + coef0)^degree; sigmoid: tanh(g x.y + coef0).
double kernel_eval(const SvmHyperParams& hyper, std::span<const double> x, std::span<const double> y);

struct SmoOptions {
  double tolerance = 1e-3;
  long max_iterations = 10000;
};

struct BinarySvmModel {
  SvmHyperParams hyper;
  FeatureMatrix support_vectors;
  std::vector<double> dual_coefs;  // alpha_i * y_i
  double bias = 0.0;
  long iterations = 0;
  bool converged = true;

  /// sum_i coef_i K(sv_i, x) + bias; positive means the +1 class.
  double decision(std::span<const double> x) const;

  friend bool operator==(const BinarySvmModel& a, const BinarySvmModel& b) {
    return a.hyper == b.hyper && a.support_vectors == b.support_vectors && a.dual_coefs == b.dual_coefs &&
           a.bias == b.bias;
  }
};

/// Full dual solution, kept for diagnostics and tests.
struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  double objective = 0.0;  // 0.5 a'Qa - sum(a), the minimised dual
  long iterations = 0;
  bool converged = true;
};

SmoSolution smo_solve(const FeatureMatrix& X, std::span<const int> y, const SvmHyperParams& hyper,
                      const SmoOptions& options = {});

/// Labels are +1 / -1. Support vectors are the points with alpha > 0.
BinarySvmModel smo_train(const FeatureMatrix& X, std::span<const int> y, const SvmHyperParams& hyper,
                         const SmoOptions& options = {});

struct PairModel {
  int positive = 0;  // class voted when decision > 0
  int negative = 1;
  BinarySvmModel model;

  friend bool operator==(const PairModel&, const PairModel&) = default;
};

/// One-vs-one over the class pairs present in the training labels.
struct MulticlassSvm {
  SvmHyperParams hyper;
  std::vector<PairModel> pairs;

  friend bool operator==(const MulticlassSvm&, const MulticlassSvm&) = default;
};

MulticlassSvm fit_multiclass(const FeatureMatrix& X, std::span<const int> labels, const SvmHyperParams& hyper,
                             const SmoOptions& options = {});

struct SvmPrediction {
  int label = 0;
  std::array<int, kNumClasses> votes{};
  std::array<double, kNumClasses> decision_mass{};  // summed |decision| of the votes each class won
};

SvmPrediction predict(const MulticlassSvm& model, std::span<const double> x);

}  // namespace ibis
