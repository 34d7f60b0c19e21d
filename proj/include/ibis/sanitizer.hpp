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

#include <span>
#include <vector>

#include "ibis/csi.hpp"

namespace ibis {

inline constexpr double kDefaultLassoLambda = 1e-2;

/// Phase-only view of a recording after offset removal.
/// values is row-major [num_frames x active_indices.size()], radians.
struct PhaseMatrix {
  std::size_t num_frames = 0;
  std::vector<int> active_indices;
  std::vector<double> values;
  double packet_rate_hz = 0.0;

  std::size_t num_columns() const noexcept { return active_indices.size(); }
  double at(std::size_t frame, std::size_t column) const { return values[frame * num_columns() + column]; }
  std::span<const double> row(std::size_t frame) const {
    return std::span(values).subspan(frame * num_columns(), num_columns());
  }
  std::vector<double> column(std::size_t c) const;
};

struct LassoFit {
  double slope = 0.0;
  double intercept = 0.0;
  double lambda = 0.0;
  int iterations = 0;
};

/// Adjacent differences are folded into (-pi, pi]; each output differs from
/// its input by an integer multiple of 2*pi.
std::vector<double> unwrap_phase(std::span<const double> angles);

/// Minimises 0.5 * sum (y - a*x - b)^2 + lambda * (|a| + |b|) by cyclic
/// coordinate descent with soft-thresholding. Stops when neither coordinate
/// moves by more than 1e-10, or after 10'000 sweeps.
LassoFit lasso_fit(std::span<const double> x, std::span<const double> y, double lambda);

double lasso_objective(std::span<const double> x, std::span<const double> y, double slope, double intercept,
                       double lambda);

/// Per frame: angle of the active subcarriers, unwrap across frequency, remove
/// the LASSO-fitted slope over subcarrier index. The common phase of each
/// frame is kept (it carries the motion-induced rotation), but its 2*pi branch
/// is aligned with the previous frame so every column is continuous in time.
/// Finally each column loses its temporal median. Guard subcarriers and
/// amplitude are discarded.
PhaseMatrix sanitize_recording(const CsiRecording& recording, double lambda = kDefaultLassoLambda);

}  // namespace ibis
