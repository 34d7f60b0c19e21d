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

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "ibis/csi.hpp"
#include "ibis/sanitizer.hpp"

namespace ibis {

enum class WindowKind { Hann, Rect };

struct StftConfig {
  std::size_t window_len = 128;
  std::size_t hop = 32;
  std::size_t fft_len = 256;
  WindowKind window = WindowKind::Hann;
};

void validate(const StftConfig& cfg);
std::vector<double> make_window(WindowKind kind, std::size_t length);

/// Row-major [frames x fft_len] spectrum, bins in FFT order (DC at column 0).
struct Spectrum {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> values;

  std::complex<double> at(std::size_t frame, std::size_t bin) const { return values[frame * bins + bin]; }
};

std::size_t stft_frame_count(std::size_t signal_len, const StftConfig& cfg);
Spectrum stft(std::span<const std::complex<double>> signal, const StftConfig& cfg);

inline constexpr double kTraceDurationS = 4.5;
inline constexpr double kMaxVelocityMps = 4.0;

struct DopplerConfig {
  double center_freq_hz = 5.21e9;
  int reflection_factor = 2;  // f_D = reflection_factor * v * f_c / c
  std::size_t velocity_bins = 81;
  StftConfig stft;
};

void validate(const DopplerConfig& cfg);

/// Doppler shift in Hz produced by radial velocity v under cfg.
double doppler_shift_hz(double velocity_mps, const DopplerConfig& cfg) noexcept;
double velocity_for_shift(double shift_hz, const DopplerConfig& cfg) noexcept;

/// Normalised time x velocity power map. power is row-major
/// [time_bins x velocity_bins], every entry in [0, 1].
struct DopplerTrace {
  std::size_t time_bins = 0;
  std::size_t velocity_bins = 0;
  std::vector<float> power;
  double duration_s = kTraceDurationS;
  double velocity_min = -kMaxVelocityMps;
  double velocity_max = kMaxVelocityMps;
  std::optional<ActivityLabel> label;
  int antenna_id = 0;

  float at(std::size_t t, std::size_t v) const { return power[t * velocity_bins + v]; }
  std::vector<double> velocity_axis() const;
  /// Velocity bin holding the largest power in time frame t (earliest on ties).
  std::size_t argmax_bin(std::size_t t) const;

  friend bool operator==(const DopplerTrace&, const DopplerTrace&) = default;
};

/// Number of STFT frames in a 4.5 s trace at the given packet rate.
std::size_t trace_time_bins(const DopplerConfig& cfg, double packet_rate_hz);

/// Builds the Doppler trace of one sanitised recording: each active
/// subcarrier's phase becomes a unit phasor, per-subcarrier |STFT|^2 maps are
/// averaged (fixed column order), shifted so 0 Hz is central, remapped onto
/// velocity_bins points over [-4, 4] m/s by linear interpolation and
/// normalised by the global maximum. The centred 4.5 s of the input is used.
DopplerTrace doppler_trace(const PhaseMatrix& phase, const DopplerConfig& cfg);

/// Divides by the global maximum; an all-zero input comes back unchanged.
std::vector<double> normalize_trace(std::span<const double> power);

}  // namespace ibis
