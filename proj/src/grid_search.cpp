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

#include "ibis/grid_search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ibis/error.hpp"
#include "ibis/parallel.hpp"

namespace ibis {

std::vector<SvmHyperParams> SvmGrid::cells() const {
  std::vector<SvmHyperParams> out;
  for (KernelKind k : kernels)
    for (double c : C)
      for (double g : gamma) out.push_back({k, c, g, degree, poly_coef0, sigmoid_coef0});
  return out;
}

void validate(const SvmGrid& grid) {
  require(!grid.kernels.empty() && !grid.C.empty() && !grid.gamma.empty(), ErrorKind::InvariantViolation,
          "svm grid must have at least one kernel, C and gamma");
  for (const SvmHyperParams& h : grid.cells()) validate(h);
}

namespace {

bool canonical_less(const SvmHyperParams& a, const SvmHyperParams& b) noexcept {
  if (a.kernel != b.kernel) return a.kernel < b.kernel;
  if (a.C != b.C) return a.C < b.C;
  return a.gamma < b.gamma;
}

}  // namespace

bool preferred_on_tie(const SvmHyperParams& a, const SvmHyperParams& b) noexcept {
  if (a.C != b.C) return a.C < b.C;
  if (a.gamma != b.gamma) return a.gamma < b.gamma;
  return a.kernel < b.kernel;
}

GridSearchResult select_best(std::span<const SvmHyperParams> cells, const CellEvaluator& evaluate, int threads) {
  require(!cells.empty(), ErrorKind::InvariantViolation, "grid has no cells");
  GridSearchResult result;
  result.surface.resize(cells.size());
  std::vector<SvmHyperParams> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end(), canonical_less);
  parallel_for(sorted.size(), threads, [&](std::size_t i) { result.surface[i] = {sorted[i], evaluate(sorted[i])}; });

  const GridCell* best = &result.surface.front();
  for (const GridCell& cell : result.surface) {
    if (cell.accuracy > best->accuracy || (cell.accuracy == best->accuracy && preferred_on_tie(cell.hyper, best->hyper)))
      best = &cell;
  }
  result.best = best->hyper;
  result.best_accuracy = best->accuracy;
  return result;
}

std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  require(k >= 2, ErrorKind::InvariantViolation, "cross-validation needs k >= 2");
  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < kNumClasses, ErrorKind::InvariantViolation, "label outside 0..4");
    members[labels[i]].push_back(i);
  }
  std::vector<int> fold(labels.size(), 0);
  for (int c = 0; c < kNumClasses; ++c) {
    if (members[c].empty()) continue;
    require(members[c].size() >= static_cast<std::size_t>(k), ErrorKind::InsufficientClassMembers,
            "class " + std::to_string(c) + " has " + std::to_string(members[c].size()) + " members, fewer than " +
                std::to_string(k) + " folds");
    std::mt19937_64 rng(derive_seed(seed, {0xf01d, static_cast<std::uint64_t>(c)}));
    std::shuffle(members[c].begin(), members[c].end(), rng);
    for (std::size_t j = 0; j < members[c].size(); ++j) fold[members[c][j]] = static_cast<int>(j % k);
  }
  return fold;
}

GridSearchResult grid_search(const FeatureMatrix& X, std::span<const int> labels, const SvmGrid& grid, int k,
                             std::uint64_t seed, int threads, const SmoOptions& options) {
  validate(grid);
  require(X.rows == labels.size(), ErrorKind::DimensionMismatch, "feature rows and labels differ in count");
  const std::vector<int> fold = stratified_folds(labels, k, seed);

  struct Split {
    FeatureMatrix train_x, test_x;
    std::vector<int> train_y, test_y;
  };
  std::vector<Split> splits(static_cast<std::size_t>(k));
  for (auto& s : splits) s.train_x.cols = s.test_x.cols = X.cols;
  for (std::size_t i = 0; i < X.rows; ++i) {
    for (int f = 0; f < k; ++f) {
      Split& s = splits[f];
      if (fold[i] == f) {
        s.test_x.push_back(X.row(i));
        s.test_y.push_back(labels[i]);
      } else {
        s.train_x.push_back(X.row(i));
        s.train_y.push_back(labels[i]);
      }
    }
  }

  const std::vector<SvmHyperParams> cells = grid.cells();
  GridSearchResult result = select_best(
      cells,
      [&](const SvmHyperParams& hyper) {
        double total = 0.0;
        for (const Split& s : splits) {
          const MulticlassSvm model = fit_multiclass(s.train_x, s.train_y, hyper, options);
          std::size_t hits = 0;
          for (std::size_t i = 0; i < s.test_y.size(); ++i) hits += predict(model, s.test_x.row(i)).label == s.test_y[i];
          total += 100.0 * static_cast<double>(hits) / static_cast<double>(s.test_y.size());
        }
        return total / static_cast<double>(k);
      },
      threads);
  result.cv_folds = k;
  return result;
}

}  // namespace ibis
