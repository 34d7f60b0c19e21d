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

#include "ibis/sanitizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ibis/error.hpp"

namespace ibis {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLassoTolerance = 1e-10;
constexpr int kLassoMaxSweeps = 10'000;

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

std::vector<double> PhaseMatrix::column(std::size_t c) const {
  std::vector<double> out(num_frames);
  for (std::size_t t = 0; t < num_frames; ++t) out[t] = at(t, c);
  return out;
}

std::vector<double> unwrap_phase(std::span<const double> angles) {
  std::vector<double> out(angles.begin(), angles.end());
  double correction = 0.0;
  for (std::size_t i = 1; i < angles.size(); ++i) {
    const double d = angles[i] - angles[i - 1];
    if (d > -std::numbers::pi && d <= std::numbers::pi) {
      out[i] = angles[i] + correction;
      continue;
    }
    // fold into (-pi, pi]
    double folded = std::remainder(d, kTwoPi);
    if (folded <= -std::numbers::pi) folded += kTwoPi;
    correction += std::round((folded - d) / kTwoPi) * kTwoPi;
    out[i] = angles[i] + correction;
  }
  return out;
}

double lasso_objective(std::span<const double> x, std::span<const double> y, double slope, double intercept,
                       double lambda) {
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - slope * x[i] - intercept;
    rss += r * r;
  }
  return 0.5 * rss + lambda * (std::abs(slope) + std::abs(intercept));
}

LassoFit lasso_fit(std::span<const double> x, std::span<const double> y, double lambda) {
  require(x.size() == y.size(), ErrorKind::DegenerateInput, "lasso_fit needs |x| == |y|");
  require(x.size() >= 2, ErrorKind::DegenerateInput, "lasso_fit needs at least two points");
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::InvariantViolation, "lasso lambda must be >= 0");
  require(std::any_of(x.begin(), x.end(), [&](double v) { return v != x.front(); }), ErrorKind::DegenerateInput,
          "lasso_fit: all x values are equal");

  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }

  LassoFit fit;
  fit.lambda = lambda;
  for (int sweep = 1; sweep <= kLassoMaxSweeps; ++sweep) {
    const double slope = soft_threshold(sxy - fit.intercept * sx, lambda) / sxx;
    const double intercept = soft_threshold(sy - slope * sx, lambda) / n;
    const double change = std::max(std::abs(slope - fit.slope), std::abs(intercept - fit.intercept));
    fit.slope = slope;
    fit.intercept = intercept;
    fit.iterations = sweep;
    if (change < kLassoTolerance) break;
  }
  return fit;
}

PhaseMatrix sanitize_recording(const CsiRecording& recording, double lambda) {
  PhaseMatrix out;
  out.active_indices = recording.layout.active_indices();
  out.packet_rate_hz = recording.packet_rate_hz;
  out.num_frames = recording.frames.size();
  const std::size_t cols = out.active_indices.size();
  require(cols >= 2, ErrorKind::DegenerateInput, "sanitizer needs at least two active subcarriers");

  // Centred abscissa decouples slope from intercept in the fit.
  const double centre =
      std::accumulate(out.active_indices.begin(), out.active_indices.end(), 0.0) / static_cast<double>(cols);
  std::vector<double> x(cols);
  for (std::size_t c = 0; c < cols; ++c) x[c] = out.active_indices[c] - centre;

  out.values.resize(out.num_frames * cols);
  std::vector<double> angles(cols);
  double previous_level = 0.0;
  for (std::size_t t = 0; t < out.num_frames; ++t) {
    const auto& values = recording.frames[t].values;
    for (std::size_t c = 0; c < cols; ++c) {
      const ComplexValue v = values[out.active_indices[c]];
      angles[c] = std::atan2(static_cast<double>(v.imag()), static_cast<double>(v.real()));
    }
    const std::vector<double> unwrapped = unwrap_phase(angles);
    const LassoFit fit = lasso_fit(x, unwrapped, lambda);

    double* row = out.values.data() + t * cols;
    double level = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] = unwrapped[c] - fit.slope * x[c];
      level += row[c];
    }
    level /= static_cast<double>(cols);
    if (t > 0) {
      const double shift = std::round((previous_level - level) / kTwoPi) * kTwoPi;
      if (shift != 0.0) {
        for (std::size_t c = 0; c < cols; ++c) row[c] += shift;
        level += shift;
      }
    }
    previous_level = level;
  }

  for (std::size_t c = 0; c < cols; ++c) {
    const double m = median(out.column(c));
    for (std::size_t t = 0; t < out.num_frames; ++t) out.values[t * cols + c] -= m;
  }
  return out;
}

}  // namespace ibis
