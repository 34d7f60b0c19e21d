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

#include "ibis/doppler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ibis/error.hpp"
#include "ibis/fft.hpp"

namespace ibis {

void validate(const StftConfig& cfg) {
  require(cfg.hop > 0 && cfg.hop <= cfg.window_len && cfg.window_len <= cfg.fft_len, ErrorKind::InvariantViolation,
          "stft requires 0 < hop <= window_len <= fft_len");
  require(is_power_of_two(cfg.fft_len), ErrorKind::InvariantViolation, "stft fft_len must be a power of two");
}

std::vector<double> make_window(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::Hann) {
    // periodic Hann
    for (std::size_t n = 0; n < length; ++n)
      w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(length));
  }
  return w;
}

std::size_t stft_frame_count(std::size_t signal_len, const StftConfig& cfg) {
  if (signal_len < cfg.window_len) return 0;
  return (signal_len - cfg.window_len) / cfg.hop + 1;
}

Spectrum stft(std::span<const std::complex<double>> signal, const StftConfig& cfg) {
  validate(cfg);
  require(signal.size() >= cfg.window_len, ErrorKind::SignalTooShort,
          "signal of " + std::to_string(signal.size()) + " samples is shorter than the window (" +
              std::to_string(cfg.window_len) + ")");
  const std::vector<double> window = make_window(cfg.window, cfg.window_len);
  const Fft fft(cfg.fft_len);
  Spectrum out;
  out.frames = stft_frame_count(signal.size(), cfg);
  out.bins = cfg.fft_len;
  out.values.assign(out.frames * out.bins, {0.0, 0.0});
  for (std::size_t t = 0; t < out.frames; ++t) {
    std::span<std::complex<double>> row(out.values.data() + t * out.bins, out.bins);
    const std::size_t start = t * cfg.hop;
    for (std::size_t n = 0; n < cfg.window_len; ++n) row[n] = window[n] * signal[start + n];
    fft.transform(row);
  }
  return out;
}

void validate(const DopplerConfig& cfg) {
  validate(cfg.stft);
  require(cfg.center_freq_hz > 0.0 && std::isfinite(cfg.center_freq_hz), ErrorKind::InvariantViolation,
          "doppler.center_freq_hz must be positive");
  require(cfg.reflection_factor == 1 || cfg.reflection_factor == 2, ErrorKind::InvariantViolation,
          "doppler.reflection_factor must be 1 or 2");
  require(cfg.velocity_bins >= 3 && cfg.velocity_bins % 2 == 1, ErrorKind::InvariantViolation,
          "doppler.velocity_bins must be odd and >= 3");
}

double doppler_shift_hz(double velocity_mps, const DopplerConfig& cfg) noexcept {
  return cfg.reflection_factor * velocity_mps * cfg.center_freq_hz / kSpeedOfLight;
}

double velocity_for_shift(double shift_hz, const DopplerConfig& cfg) noexcept {
  return shift_hz * kSpeedOfLight / (cfg.reflection_factor * cfg.center_freq_hz);
}

std::vector<double> DopplerTrace::velocity_axis() const {
  std::vector<double> axis(velocity_bins);
  const double step = (velocity_max - velocity_min) / static_cast<double>(velocity_bins - 1);
  for (std::size_t j = 0; j < velocity_bins; ++j) axis[j] = velocity_min + step * static_cast<double>(j);
  // exact symmetry about zero for the odd-length axis
  const std::size_t mid = velocity_bins / 2;
  axis[mid] = 0.0;
  for (std::size_t j = 0; j < mid; ++j) axis[velocity_bins - 1 - j] = -axis[j];
  return axis;
}

std::size_t DopplerTrace::argmax_bin(std::size_t t) const {
  const auto begin = power.begin() + static_cast<std::ptrdiff_t>(t * velocity_bins);
  return static_cast<std::size_t>(std::max_element(begin, begin + static_cast<std::ptrdiff_t>(velocity_bins)) - begin);
}

std::size_t trace_time_bins(const DopplerConfig& cfg, double packet_rate_hz) {
  const auto samples = static_cast<std::size_t>(std::llround(kTraceDurationS * packet_rate_hz));
  return stft_frame_count(samples, cfg.stft);
}

std::vector<double> normalize_trace(std::span<const double> power) {
  double peak = 0.0;
  for (double p : power) {
    require(std::isfinite(p) && p >= 0.0, ErrorKind::InvariantViolation,
            "normalize_trace expects finite non-negative power");
    peak = std::max(peak, p);
  }
  std::vector<double> out(power.begin(), power.end());
  if (peak > 0.0)
    for (double& p : out) p /= peak;
  return out;
}

DopplerTrace doppler_trace(const PhaseMatrix& phase, const DopplerConfig& cfg) {
  validate(cfg);
  const double rate = phase.packet_rate_hz;
  require(rate > 0.0, ErrorKind::InvariantViolation, "phase matrix has no packet rate");
  const double max_shift = doppler_shift_hz(kMaxVelocityMps, cfg);
  require(rate >= 2.0 * max_shift, ErrorKind::NyquistViolation,
          "packet rate " + std::to_string(rate) + " Hz cannot resolve " + std::to_string(max_shift) +
              " Hz Doppler shifts (needs >= " + std::to_string(2.0 * max_shift) + " Hz)");
  const auto needed = static_cast<std::size_t>(std::llround(kTraceDurationS * rate));
  require(phase.num_frames >= needed && needed >= cfg.stft.window_len, ErrorKind::SignalTooShort,
          "trace needs " + std::to_string(needed) + " frames (4.5 s), recording has " +
              std::to_string(phase.num_frames));
  const std::size_t first = (phase.num_frames - needed) / 2;

  const std::size_t cols = phase.num_columns();
  const std::size_t nfft = cfg.stft.fft_len;
  const std::size_t time_bins = stft_frame_count(needed, cfg.stft);
  const std::vector<double> window = make_window(cfg.stft.window, cfg.stft.window_len);
  const Fft fft(nfft);

  // Mean |STFT|^2 over subcarriers, FFT bin order.
  std::vector<double> accum(time_bins * nfft, 0.0);
  std::vector<std::complex<double>> phasor(needed);
  std::vector<std::complex<double>> buffer(nfft);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t n = 0; n < needed; ++n) phasor[n] = std::polar(1.0, phase.at(first + n, c));
    for (std::size_t t = 0; t < time_bins; ++t) {
      std::fill(buffer.begin(), buffer.end(), std::complex<double>{});
      const std::size_t start = t * cfg.stft.hop;
      for (std::size_t n = 0; n < cfg.stft.window_len; ++n) buffer[n] = window[n] * phasor[start + n];
      fft.transform(buffer);
      double* row = accum.data() + t * nfft;
      for (std::size_t k = 0; k < nfft; ++k) row[k] += std::norm(buffer[k]);
    }
  }
  const double inv_cols = 1.0 / static_cast<double>(cols);

  DopplerTrace trace;
  trace.time_bins = time_bins;
  trace.velocity_bins = cfg.velocity_bins;
  const std::vector<double> axis = trace.velocity_axis();

  // Fractional FFT-order bin for every velocity-axis point.
  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  std::vector<Tap> taps(cfg.velocity_bins);
  for (std::size_t j = 0; j < cfg.velocity_bins; ++j) {
    const double shift = doppler_shift_hz(axis[j], cfg);
    double pos = shift * static_cast<double>(nfft) / rate;  // signed bin, 0 == DC
    const double floor_pos = std::floor(pos);
    const double frac = pos - floor_pos;
    const auto n = static_cast<long long>(nfft);
    const long long lo = ((static_cast<long long>(floor_pos) % n) + n) % n;
    taps[j] = {static_cast<std::size_t>(lo), static_cast<std::size_t>((lo + 1) % n), frac};
  }

  std::vector<double> power(time_bins * cfg.velocity_bins);
  for (std::size_t t = 0; t < time_bins; ++t) {
    const double* row = accum.data() + t * nfft;
    for (std::size_t j = 0; j < cfg.velocity_bins; ++j) {
      const Tap& tap = taps[j];
      power[t * cfg.velocity_bins + j] = inv_cols * ((1.0 - tap.frac) * row[tap.lo] + tap.frac * row[tap.hi]);
    }
  }
  const std::vector<double> normalized = normalize_trace(power);
  trace.power.assign(normalized.begin(), normalized.end());
  return trace;
}

}  // namespace ibis
