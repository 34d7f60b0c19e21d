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

#include "ibis/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ibis/error.hpp"
#include "ibis/log.hpp"
#include "ibis/parallel.hpp"

namespace ibis {

void validate(const TrainConfig& cfg) {
  require(cfg.epochs >= 1, ErrorKind::InvariantViolation, "train.epochs must be >= 1");
  require(cfg.batch_size >= 1, ErrorKind::InvariantViolation, "train.batch_size must be >= 1");
  require(std::isfinite(cfg.learning_rate) && cfg.learning_rate >= 0.0, ErrorKind::InvariantViolation,
          "train.learning_rate must be >= 0");
  require(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0, ErrorKind::InvariantViolation,
          "train.beta1/beta2 must lie in [0, 1)");
  require(cfg.epsilon > 0.0, ErrorKind::InvariantViolation, "train.epsilon must be > 0");
  require(cfg.momentum >= 0.0 && cfg.momentum < 1.0, ErrorKind::InvariantViolation,
          "train.momentum must lie in [0, 1)");
}

namespace {

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, std::size_t n) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, const std::vector<double>& grad) {
    const double lr = cfg_.learning_rate;
    if (cfg_.optimizer == OptimizerKind::Sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg_.momentum * m_[i] - lr * grad[i];
        params[i] += m_[i];
      }
      return;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace

TrainResult train(Network initial, std::span<const LabeledSequence> data, const TrainConfig& cfg) {
  validate(cfg);
  require(!data.empty(), ErrorKind::EmptyDataset, "training set is empty");

  std::vector<std::size_t> canonical(data.size());
  std::iota(canonical.begin(), canonical.end(), std::size_t{0});
  std::sort(canonical.begin(), canonical.end(), [&](std::size_t a, std::size_t b) { return data[a].key < data[b].key; });
  for (std::size_t i = 1; i < canonical.size(); ++i)
    require(data[canonical[i - 1]].key != data[canonical[i]].key, ErrorKind::InvariantViolation,
            "training keys must be unique");
  for (const LabeledSequence& ex : data)
    require(ex.label >= 0 && ex.label < kNumClasses, ErrorKind::InvariantViolation, "label outside 0..4");

  TrainResult result{std::move(initial), {}};
  Network& net = result.network;
  Optimizer opt(cfg, net.params().size());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  std::vector<std::size_t> order(data.size());
  std::vector<double> example_loss(data.size());
  std::vector<const Sequence*> inputs;
  std::vector<int> labels;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});  // positions in canonical order
    std::mt19937_64 rng(derive_seed(cfg.seed, {0x7a1, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);

    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      inputs.clear();
      labels.clear();
      // Sequences of differing length go through one at a time.
      const auto rows = data[canonical[order[start]]].input.rows();
      bool uniform = true;
      for (std::size_t i = start; i < end; ++i) {
        const LabeledSequence& ex = data[canonical[order[i]]];
        uniform = uniform && ex.input.rows() == rows;
        inputs.push_back(&ex.input);
        labels.push_back(ex.label);
      }
      if (uniform) {
        const LossAndGradient lg = loss_and_gradient(net, inputs, labels);
        for (std::size_t i = start; i < end; ++i) example_loss[order[i]] = lg.per_example_loss[i - start];
        opt.step(net.params(), lg.gradient);
      } else {
        std::vector<double> grad(net.params().size(), 0.0);
        for (std::size_t i = start; i < end; ++i) {
          const LossAndGradient lg =
              loss_and_gradient(net, std::span(&inputs[i - start], 1), std::span(&labels[i - start], 1));
          example_loss[order[i]] = lg.loss;
          for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += lg.gradient[p];
        }
        for (double& g : grad) g /= static_cast<double>(end - start);
        opt.step(net.params(), grad);
      }
    }
    double total = 0.0;
    for (double l : example_loss) total += l;
    result.loss_history.push_back(total / static_cast<double>(data.size()));
    logger()->debug("epoch {}/{} loss {:.6f}", epoch + 1, cfg.epochs, result.loss_history.back());
  }
  return result;
}

double accuracy(const Network& net, std::span<const LabeledSequence> data) {
  require(!data.empty(), ErrorKind::EmptyDataset, "accuracy of an empty set");
  std::vector<Sequence> inputs;
  inputs.reserve(data.size());
  for (const LabeledSequence& ex : data) inputs.push_back(ex.input);
  const std::vector<Probabilities> probs = predict_proba(net, inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto best = std::max_element(probs[i].begin(), probs[i].end()) - probs[i].begin();
    hits += best == data[i].label;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace ibis
