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
#include <limits>
#include <vector>

#include "ibis/csi.hpp"

namespace ibis {

/// One propagation path. velocity is the radial speed that rotates the path
/// phase over time; zero for static paths.
struct MultipathComponent {
  double alpha = 0.0;     // amplitude
  double phi0 = 0.0;      // initial phase, rad
  double tau = 0.0;       // delay, s
  double velocity = 0.0;  // m/s
};

struct VelocityModulation {
  enum class Kind { Constant, Sinusoidal };
  Kind kind = Kind::Constant;
  double amplitude_mps = 0.0;  // sinusoidal only: v(t) = velocity + A sin(2 pi t / P + phase)
  double period_s = 1.0;
  double phase_rad = 0.0;
};

struct DynamicPath {
  MultipathComponent path;
  VelocityModulation modulation;

  /// Radial displacement since t = 0, metres.
  double displacement(double t) const noexcept;
  double velocity_at(double t) const noexcept;
};

struct ActivityScript {
  ActivityLabel label = ActivityLabel::Empty;
  std::vector<MultipathComponent> static_paths;
  std::vector<DynamicPath> dynamic_paths;
  double duration_s = 4.5;
  double snr_db = 20.0;  // +inf disables noise
};

void validate(const ActivityScript& script);

struct SynthConfig {
  double packet_rate_hz = 400.0;
  double center_freq_hz = 5.21e9;
  int bandwidth_mhz = 80;
  int antenna_count = 4;
  int samples_per_class = 40;
  double snr_db = 20.0;  // +inf disables noise
  double duration_s = 4.5;
  int reflection_factor = 2;
  std::uint64_t seed = 42;
};

void validate(const SynthConfig& cfg);

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Noise-free channel snapshot: H_i(t) = sum_l alpha_l exp(j(phi_l + 2 pi k (f_c/c) v_l t - 2 pi f_i tau_l)),
/// f_i the baseband frequency of subcarrier i. Guard subcarriers are zero.
CsiFrame csi_at(const std::vector<MultipathComponent>& components, double t, const SubcarrierLayout& layout,
                double center_freq_hz, int reflection_factor);

/// Reference scene for each activity; velocities, amplitudes and delays are
/// jittered from `seed`. Index i of the result holds label code i.
std::vector<ActivityScript> default_scripts(std::uint64_t seed);

/// Renders one script on `antenna_count` antennas. Antennas share the moving
/// paths; static-path phases and noise are drawn per antenna from
/// (seed, sample_id, antenna).
CsiSample render_sample(const ActivityScript& script, const SynthConfig& cfg, std::uint32_t sample_id);

/// samples_per_class samples of each of the five activities, sample ids
/// assigned class-major. Pure function of cfg.
CsiDataset generate_dataset(const SynthConfig& cfg, int threads = 1);

/// Sample `sample_id` of generate_dataset(cfg), rendered on its own.
CsiSample render_synthetic_sample(const SynthConfig& cfg, std::uint32_t sample_id);

}  // namespace ibis
