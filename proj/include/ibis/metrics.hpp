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
#include <cstdint>
#include <span>
#include <vector>

#include "ibis/csi.hpp"
#include "ibis/network.hpp"

namespace ibis {

struct Prediction {
  std::uint32_t sample_id = 0;
  int antenna_id = 0;
  Probabilities probabilities{};
  ActivityLabel label = ActivityLabel::Empty;
};

/// Most frequent label; ties go to the larger summed probability mass, then
/// to the smaller label code.
ActivityLabel majority_vote(std::span<const Prediction> predictions);

struct ConfusionMatrix {
  std::array<std::array<long, kNumClasses>, kNumClasses> counts{};  // [true][predicted]

  long total() const noexcept;
  long correct() const noexcept;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
  double precision = 0.0, recall = 0.0, f1 = 0.0;  // percent
};

/// Percentages; precision/recall/F1 are macro averages over all five classes,
/// with 0 for any class whose ratio has a zero denominator.
struct MetricsReport {
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  std::array<ClassMetrics, kNumClasses> per_class{};
};

struct Evaluation {
  ConfusionMatrix confusion;
  MetricsReport metrics;
};

Evaluation evaluate(std::span<const int> truth, std::span<const int> predicted);
MetricsReport metrics_from(const ConfusionMatrix& cm);

/// Arithmetic mean of each field.
MetricsReport mean_report(std::span<const MetricsReport> reports);

}  // namespace ibis
