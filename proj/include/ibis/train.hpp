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
#include <span>
#include <vector>

#include "ibis/network.hpp"

namespace ibis {

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 42;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double momentum = 0.0;  // sgd only

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& cfg);

struct TrainResult {
  Network network;
  std::vector<double> loss_history;  // mean training cross-entropy per epoch
};

/// Mini-batch training from `initial`. Examples are visited in an order drawn
/// from (seed, epoch) over the examples sorted by key, so the outcome does not
/// depend on the order of `data`. Keys must be unique.
TrainResult train(Network initial, std::span<const LabeledSequence> data, const TrainConfig& cfg);

/// Fraction of examples whose argmax matches the label.
double accuracy(const Network& net, std::span<const LabeledSequence> data);

}  // namespace ibis
