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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ibis/csi.hpp"
#include "ibis/doppler.hpp"
#include "ibis/tensor.hpp"

namespace ibis {

/// Time-major input sequence [time x channels]. For Doppler traces the
/// channels are the velocity bins.
using Sequence = RowMatrix;
using Probabilities = std::array<double, kNumClasses>;

Sequence to_sequence(const DopplerTrace& trace);

enum class ModelKind {
  Hybrid,         // Inception block -> BiLSTM -> dense softmax
  InceptionOnly,  // Inception block -> global average pool over time -> dense softmax
};

struct Architecture {
  ModelKind kind = ModelKind::Hybrid;
  std::size_t input_channels = 81;
  std::size_t filters = 16;       // per convolution branch
  std::size_t pool_filters = 16;  // 1x1 convolution after the max-pool branch
  std::size_t hidden = 64;        // LSTM units per direction
  std::array<std::size_t, 3> kernels{3, 5, 7};

  std::size_t feature_channels() const noexcept { return 3 * filters + pool_filters; }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

void validate(const Architecture& arch);

struct ParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size() const noexcept;

  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

/// Parameter layout for an architecture, in checkpoint order:
///   inception.conv{k}.weight [F, k*C]  (tap-major: column j*C + c is tap j, channel c)
///   inception.conv{k}.bias   [F]
///   inception.pool.weight    [Fp, C], inception.pool.bias [Fp]
///   lstm.{fwd,bwd}.W [4H, D], .U [4H, H], .b [4H]   (gate rows: input, forget, output, candidate)
///   head.weight [5, 2H or D], head.bias [5]
std::vector<ParamBlock> parameter_layout(const Architecture& arch);

/// Inception(+BiLSTM) classifier. All parameters live in one flat float64
/// buffer so optimisers, checkpoints and the gradient checker treat them
/// uniformly.
class Network {
 public:
  Network() = default;
  explicit Network(Architecture arch);  // all parameters zero

  /// Uniform(+-1/sqrt(fan_in)) weights, zero biases, forget-gate bias 1.
  static Network initialized(Architecture arch, std::uint64_t seed);

  const Architecture& arch() const noexcept { return arch_; }
  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  const ParamBlock& block(std::string_view name) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  Architecture arch_;
  std::vector<ParamBlock> blocks_;
  std::vector<double> params_;
};

/// Multi-branch temporal convolution: same-padded convolutions of width 3/5/7
/// plus a width-3 max-pool followed by a 1x1 convolution, each through ReLU,
/// concatenated along channels. Output [time x (3F + Fp)].
Tensor inception_forward(const Network& net, const Sequence& input);

/// Bidirectional LSTM over an inception feature sequence, final states of
/// both directions concatenated and fed to the dense softmax head.
Probabilities bilstm_forward(const Network& net, const Tensor& features);

/// Full model output for one sequence (either architecture kind).
Probabilities predict_proba(const Network& net, const Sequence& input);
std::vector<Probabilities> predict_proba(const Network& net, std::span<const Sequence> inputs, int threads = 1);

struct LabeledSequence {
  Sequence input;
  int label = 0;
  std::uint64_t key = 0;  // stable identity; training order is derived from it, not from vector order
};

/// Mean cross-entropy of a batch and its gradient with respect to every
/// parameter (same layout as Network::params).
struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
  std::vector<double> per_example_loss;
};
LossAndGradient loss_and_gradient(const Network& net, std::span<const Sequence* const> inputs,
                                  std::span<const int> labels);

/// Cross-entropy of a single example evaluated in extended precision; used as
/// the finite-difference reference.
long double loss_extended(const Architecture& arch, std::span<const long double> params, const Sequence& input,
                          int label);

/// Optional hook that edits the analytic gradient before comparison (used to
/// confirm the checker catches broken backprop).
using GradientMutator = std::function<void(const Network&, std::vector<double>&)>;

/// max over parameters of |g_a - g_n| / max(1e-8, |g_a| + |g_n|), with g_n
/// the central difference at eps = 1e-5.
double grad_check(const Network& net, const LabeledSequence& sample, const GradientMutator& mutate = {});

}  // namespace ibis
