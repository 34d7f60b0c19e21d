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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ibis/svm.hpp"

namespace ibis {

struct SvmGrid {
  std::vector<KernelKind> kernels{KernelKind::Rbf, KernelKind::Poly, KernelKind::Sigmoid};
  std::vector<double> C{0.01, 0.1, 1.0};
  std::vector<double> gamma{0.01, 0.1, 1.0};
  int degree = 3;
  double poly_coef0 = 1.0;
  double sigmoid_coef0 = 0.0;

  std::vector<SvmHyperParams> cells() const;

  friend bool operator==(const SvmGrid&, const SvmGrid&) = default;
};

void validate(const SvmGrid& grid);

struct GridCell {
  SvmHyperParams hyper;
  double accuracy = 0.0;  // percent
};

struct GridSearchResult {
  std::vector<GridCell> surface;  // canonical order: kernel, then C, then gamma, ascending
  SvmHyperParams best;
  double best_accuracy = 0.0;
  int cv_folds = 0;
};

/// true if a should be preferred over b at equal accuracy: smaller C, then
/// smaller gamma, then kernel order.
bool preferred_on_tie(const SvmHyperParams& a, const SvmHyperParams& b) noexcept;

using CellEvaluator = std::function<double(const SvmHyperParams&)>;

/// Selection over an arbitrary cell scorer. Cell order does not matter.
GridSearchResult select_best(std::span<const SvmHyperParams> cells, const CellEvaluator& evaluate, int threads = 1);

/// Fold index per point; each class is spread round-robin over k folds after
/// a seeded shuffle.
std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

/// Stratified k-fold cross-validated accuracy (percent) per grid cell.
GridSearchResult grid_search(const FeatureMatrix& X, std::span<const int> labels, const SvmGrid& grid, int k,
                             std::uint64_t seed, int threads = 1, const SmoOptions& options = {});

}  // namespace ibis
