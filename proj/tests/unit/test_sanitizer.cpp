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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ibis/error.hpp"
#include "ibis/sanitizer.hpp"
#include "ibis/synth.hpp"
#include "oracles.hpp"

using namespace ibis;
using std::numbers::pi;

namespace {

CsiRecording recording_from(const std::function<std::complex<double>(int, std::size_t)>& h, std::size_t frames,
                            int bw = 20) {
  CsiRecording r;
  r.packet_rate_hz = 400.0;
  r.center_freq_hz = 5.21e9;
  r.layout = default_layout(bw);
  for (std::size_t f = 0; f < frames; ++f) {
    CsiFrame fr;
    fr.timestamp_s = f / 400.0;
    fr.values.assign(r.layout.total_count, {});
    for (int i : r.layout.active_indices()) fr.values[i] = ComplexValue(h(i, f));
    r.frames.push_back(fr);
  }
  return r;
}

double max_abs(const PhaseMatrix& m) {
  double w = 0.0;
  for (double v : m.values) w = std::max(w, std::abs(v));
  return w;
}

}  // namespace

TEST_CASE("unwrap_phase examples") {
  const std::vector<double> one{0.0, 1.5 * pi};
  const auto u = unwrap_phase(one);
  CHECK(u[0] == 0.0);
  CHECK(u[1] == doctest::Approx(-0.5 * pi).epsilon(1e-12));

  const std::vector<double> smooth{0.0, 0.1, 0.2};
  CHECK(unwrap_phase(smooth) == smooth);
  CHECK(unwrap_phase(std::vector<double>{}).empty());
}

TEST_CASE("unwrap_phase recovers a wrapped ramp") {
  std::vector<double> ramp, wrapped;
  for (int i = 0; i < 200; ++i) {
    ramp.push_back(0.5 * i);
    wrapped.push_back(std::remainder(0.5 * i, 2 * pi));
  }
  const auto u = unwrap_phase(wrapped);
  for (std::size_t i = 0; i < ramp.size(); ++i) CHECK(u[i] == doctest::Approx(ramp[i]).epsilon(1e-12));
}

TEST_CASE("unwrap_phase properties") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-10.0, 10.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(50);
    for (double& v : x) v = ang(rng);
    const auto u = unwrap_phase(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double k = (u[i] - x[i]) / (2 * pi);
      CHECK(std::abs(k - std::round(k)) < 1e-9);
      if (i > 0) {
        const double d = u[i] - u[i - 1];
        CHECK(d > -pi - 1e-12);
        CHECK(d <= pi + 1e-12);
      }
    }
    CHECK(unwrap_phase(u) == u);
  }
}

TEST_CASE("lasso_fit examples") {
  std::vector<double> x, y, zero;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i + 1.0);
    zero.push_back(0.0);
  }
  const LassoFit ols = lasso_fit(x, y, 0.0);
  CHECK(ols.slope == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(ols.intercept == doctest::Approx(1.0).epsilon(1e-8));

  for (double lambda : {0.0, 0.1, 5.0}) {
    const LassoFit z = lasso_fit(x, zero, lambda);
    CHECK(z.slope == 0.0);
    CHECK(z.intercept == 0.0);
  }

  CHECK_THROWS_AS(lasso_fit(std::vector<double>(5, 1.0), y, 0.1), Error);
  CHECK_THROWS_AS(lasso_fit(std::vector<double>{1.0}, std::vector<double>{1.0}, 0.1), Error);
  try {
    lasso_fit(std::vector<double>(3, 2.0), std::vector<double>(3, 0.0), 0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateInput);
  }
}

TEST_CASE("lasso_fit against a subgradient solver") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> x, y;
    for (int i = 0; i < 128; ++i) {
      x.push_back(i);
      y.push_back(0.3 * i + noise(rng));
    }
    const LassoFit fit = lasso_fit(x, y, 0.01);
    const double ours = lasso_objective(x, y, fit.slope, fit.intercept, 0.01);
    const double ref = oracle::subgradient_lasso(x, y, 0.01);
    CHECK(ours <= ref + 1e-6);
    CHECK(std::abs(ours - ref) < 1e-6 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("pure offsets sanitise to zero") {
  const CsiRecording r = recording_from([](int i, std::size_t) { return std::polar(1.0, 0.2 * i + 0.5); }, 10);
  const PhaseMatrix m = sanitize_recording(r);
  CHECK(m.num_frames == 10);
  CHECK(m.num_columns() == r.layout.active_indices().size());
  CHECK(m.active_indices == r.layout.active_indices());
  CHECK(max_abs(m) < 1e-6);
}

TEST_CASE("single frame gives a zero row") {
  const CsiRecording r = recording_from([](int i, std::size_t) { return std::polar(2.0, 0.7 * i - 1.0); }, 1, 40);
  const PhaseMatrix m = sanitize_recording(r);
  CHECK(m.num_frames == 1);
  CHECK(m.values.size() == m.num_columns());
  CHECK(max_abs(m) == 0.0);
}

TEST_CASE("doppler path leaves a time-varying residual") {
  ActivityScript s = oracle::constant_velocity_script(1.5);
  SynthConfig cfg;
  cfg.bandwidth_mhz = 20;
  cfg.antenna_count = 1;
  cfg.snr_db = kNoNoise;
  s.snr_db = kNoNoise;
  const CsiSample sample = render_sample(s, cfg, 0);
  const PhaseMatrix m = sanitize_recording(sample.recordings.front());
  for (std::size_t c = 0; c < m.num_columns(); c += 7) {
    const auto col = m.column(c);
    double mean = 0.0, var = 0.0;
    for (double v : col) mean += v / col.size();
    for (double v : col) var += (v - mean) * (v - mean) / col.size();
    CHECK(var > 1e-3);
  }
}

TEST_CASE("offset and amplitude invariance") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::complex<double>> base(64 * 30);
  for (auto& v : base) v = {n(rng), n(rng)};
  // keep each frame's unwrapped phase well inside a linear trend
  auto h = [&](int i, std::size_t f) {
    return std::polar(1.0 + 0.1 * std::abs(base[f * 64 + i]), 0.05 * i + 0.3 * std::sin(0.2 * f + 0.01 * i) +
                                                                   0.1 * std::arg(base[f * 64 + i]));
  };
  const PhaseMatrix ref = sanitize_recording(recording_from(h, 30));

  const PhaseMatrix shifted = sanitize_recording(recording_from(
      [&](int i, std::size_t f) { return h(i, f) * std::polar(1.0, 1.3 + 0.11 * i); }, 30));
  REQUIRE(shifted.values.size() == ref.values.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.values.size(); ++k) worst = std::max(worst, std::abs(shifted.values[k] - ref.values[k]));
  CHECK(worst < 1e-6);

  // Power-of-two scale keeps float32 inputs exact, so the angles are too.
  const PhaseMatrix scaled = sanitize_recording(recording_from([&](int i, std::size_t f) { return 4.0 * h(i, f); }, 30));
  CHECK(scaled.values == ref.values);
}

TEST_CASE("noise-free Empty sample sanitises to zero") {
  SynthConfig cfg;
  cfg.snr_db = kNoNoise;
  cfg.antenna_count = 2;
  cfg.samples_per_class = 1;
  cfg.bandwidth_mhz = 40;
  const CsiSample s = render_synthetic_sample(cfg, 0);
  REQUIRE(s.label() == ActivityLabel::Empty);
  for (const CsiRecording& r : s.recordings) CHECK(max_abs(sanitize_recording(r)) < 1e-6);
}
