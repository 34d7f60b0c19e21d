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

#include "ibis/metrics.hpp"

#include <algorithm>
#include <string>

#include "ibis/error.hpp"

namespace ibis {

ActivityLabel majority_vote(std::span<const Prediction> predictions) {
  require(!predictions.empty(), ErrorKind::EmptyInput, "no predictions to fuse");
  std::array<int, kNumClasses> votes{};
  std::array<double, kNumClasses> mass{};
  for (const Prediction& p : predictions) {
    require(p.sample_id == predictions.front().sample_id, ErrorKind::MixedSampleIds,
            "fusing predictions of samples " + std::to_string(predictions.front().sample_id) + " and " +
                std::to_string(p.sample_id));
    ++votes[label_code(p.label)];
  }
  // Mass is summed in a fixed order (by antenna, then label) so permutations
  // of the list give the same total.
  std::vector<const Prediction*> sorted;
  for (const Prediction& p : predictions) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](const Prediction* a, const Prediction* b) {
    if (a->antenna_id != b->antenna_id) return a->antenna_id < b->antenna_id;
    return a->probabilities < b->probabilities;
  });
  for (const Prediction* p : sorted)
    for (int k = 0; k < kNumClasses; ++k) mass[k] += p->probabilities[k];

  int best = 0;
  for (int k = 1; k < kNumClasses; ++k)
    if (votes[k] > votes[best] || (votes[k] == votes[best] && mass[k] > mass[best])) best = k;
  return label_from_code(best);
}

long ConfusionMatrix::total() const noexcept {
  long n = 0;
  for (const auto& row : counts)
    for (long c : row) n += c;
  return n;
}

long ConfusionMatrix::correct() const noexcept {
  long n = 0;
  for (int k = 0; k < kNumClasses; ++k) n += counts[k][k];
  return n;
}

MetricsReport metrics_from(const ConfusionMatrix& cm) {
  MetricsReport r;
  const long total = cm.total();
  r.accuracy = total > 0 ? 100.0 * static_cast<double>(cm.correct()) / static_cast<double>(total) : 0.0;
  for (int k = 0; k < kNumClasses; ++k) {
    long predicted = 0, actual = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      predicted += cm.counts[j][k];
      actual += cm.counts[k][j];
    }
    const double tp = static_cast<double>(cm.counts[k][k]);
    ClassMetrics& c = r.per_class[k];
    c.precision = predicted > 0 ? 100.0 * tp / static_cast<double>(predicted) : 0.0;
    c.recall = actual > 0 ? 100.0 * tp / static_cast<double>(actual) : 0.0;
    c.f1 = c.precision + c.recall > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    r.precision += c.precision / kNumClasses;
    r.recall += c.recall / kNumClasses;
    r.f1 += c.f1 / kNumClasses;
  }
  return r;
}

Evaluation evaluate(std::span<const int> truth, std::span<const int> predicted) {
  require(truth.size() == predicted.size(), ErrorKind::LengthMismatch,
          std::to_string(truth.size()) + " true labels vs " + std::to_string(predicted.size()) + " predictions");
  require(!truth.empty(), ErrorKind::LengthMismatch, "nothing to evaluate");
  Evaluation e;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < kNumClasses && predicted[i] >= 0 && predicted[i] < kNumClasses,
            ErrorKind::InvariantViolation, "label outside 0..4");
    ++e.confusion.counts[truth[i]][predicted[i]];
  }
  e.metrics = metrics_from(e.confusion);
  return e;
}

MetricsReport mean_report(std::span<const MetricsReport> reports) {
  require(!reports.empty(), ErrorKind::EmptyInput, "no reports to average");
  MetricsReport m;
  const auto n = static_cast<double>(reports.size());
  for (const MetricsReport& r : reports) {
    m.accuracy += r.accuracy;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    for (int k = 0; k < kNumClasses; ++k) {
      m.per_class[k].precision += r.per_class[k].precision;
      m.per_class[k].recall += r.per_class[k].recall;
      m.per_class[k].f1 += r.per_class[k].f1;
    }
  }
  m.accuracy /= n;
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  for (auto& c : m.per_class) {
    c.precision /= n;
    c.recall /= n;
    c.f1 /= n;
  }
  return m;
}

}  // namespace ibis
