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

#include "ibis/synth.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "ibis/error.hpp"
#include "ibis/parallel.hpp"

namespace ibis {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-path frequency response alpha * exp(-j 2 pi f_i tau) over the layout.
std::vector<std::complex<double>> steering(const MultipathComponent& p, const SubcarrierLayout& layout) {
  std::vector<std::complex<double>> s(layout.total_count);
  for (int i = 0; i < layout.total_count; ++i) s[i] = std::polar(p.alpha, -kTwoPi * layout.baseband_hz(i) * p.tau);
  return s;
}

std::vector<bool> guard_mask(const SubcarrierLayout& layout) {
  std::vector<bool> guard(layout.total_count, false);
  for (int g : layout.guard_indices) guard[g] = true;
  return guard;
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double sign(std::mt19937_64& rng) { return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0; }

MultipathComponent body_path(std::mt19937_64& rng, double alpha_lo, double alpha_hi) {
  MultipathComponent p;
  p.alpha = uniform(rng, alpha_lo, alpha_hi);
  p.phi0 = uniform(rng, 0.0, kTwoPi);
  p.tau = uniform(rng, 15e-9, 60e-9);
  return p;
}

DynamicPath sinusoidal(MultipathComponent p, double amplitude, double period, std::mt19937_64& rng) {
  DynamicPath d{p, {}};
  d.modulation.kind = VelocityModulation::Kind::Sinusoidal;
  d.modulation.amplitude_mps = amplitude;
  d.modulation.period_s = period;
  d.modulation.phase_rad = uniform(rng, 0.0, kTwoPi);
  return d;
}

}  // namespace

double DynamicPath::displacement(double t) const noexcept {
  double d = path.velocity * t;
  if (modulation.kind == VelocityModulation::Kind::Sinusoidal) {
    const double w = kTwoPi / modulation.period_s;
    d += modulation.amplitude_mps / w * (std::cos(modulation.phase_rad) - std::cos(w * t + modulation.phase_rad));
  }
  return d;
}

double DynamicPath::velocity_at(double t) const noexcept {
  double v = path.velocity;
  if (modulation.kind == VelocityModulation::Kind::Sinusoidal)
    v += modulation.amplitude_mps * std::sin(kTwoPi * t / modulation.period_s + modulation.phase_rad);
  return v;
}

void validate(const ActivityScript& script) {
  require(script.duration_s >= 4.5, ErrorKind::InvariantViolation, "activity script shorter than 4.5 s");
  require(!script.static_paths.empty(), ErrorKind::InvariantViolation, "activity script needs a static (LoS) path");
  for (const auto& p : script.static_paths)
    require(p.alpha >= 0.0 && p.tau >= 0.0, ErrorKind::InvariantViolation, "path needs alpha >= 0 and tau >= 0");
  for (const auto& d : script.dynamic_paths) {
    require(d.path.alpha >= 0.0 && d.path.tau >= 0.0, ErrorKind::InvariantViolation,
            "path needs alpha >= 0 and tau >= 0");
    const double peak = std::abs(d.path.velocity) +
                        (d.modulation.kind == VelocityModulation::Kind::Sinusoidal ? d.modulation.amplitude_mps : 0.0);
    require(peak <= 4.0, ErrorKind::InvariantViolation, "dynamic path exceeds 4 m/s");
    require(d.modulation.kind == VelocityModulation::Kind::Constant || d.modulation.period_s > 0.0,
            ErrorKind::InvariantViolation, "sinusoidal modulation needs a positive period");
  }
}

void validate(const SynthConfig& cfg) {
  require(cfg.packet_rate_hz > 0.0, ErrorKind::InvariantViolation, "synth.packet_rate_hz must be positive");
  require(cfg.center_freq_hz > 0.0, ErrorKind::InvariantViolation, "synth.center_freq_hz must be positive");
  require(is_supported_bandwidth(cfg.bandwidth_mhz), ErrorKind::InvariantViolation,
          "synth.bandwidth_mhz must be 20, 40 or 80");
  require(cfg.antenna_count >= 1, ErrorKind::InvariantViolation, "synth.antenna_count must be >= 1");
  require(cfg.samples_per_class >= 1, ErrorKind::InvariantViolation, "synth.samples_per_class must be >= 1");
  require(cfg.duration_s >= 4.5, ErrorKind::InvariantViolation, "synth.duration_s must be >= 4.5");
  require(cfg.reflection_factor == 1 || cfg.reflection_factor == 2, ErrorKind::InvariantViolation,
          "synth.reflection_factor must be 1 or 2");
  require(!std::isnan(cfg.snr_db), ErrorKind::InvariantViolation, "synth.snr_db is NaN");
}

CsiFrame csi_at(const std::vector<MultipathComponent>& components, double t, const SubcarrierLayout& layout,
                double center_freq_hz, int reflection_factor) {
  const std::vector<bool> guard = guard_mask(layout);
  std::vector<std::complex<double>> h(layout.total_count);
  for (const auto& p : components) {
    const double phase = p.phi0 + kTwoPi * reflection_factor * (center_freq_hz / kSpeedOfLight) * p.velocity * t;
    for (int i = 0; i < layout.total_count; ++i)
      h[i] += std::polar(p.alpha, phase - kTwoPi * layout.baseband_hz(i) * p.tau);
  }
  CsiFrame frame;
  frame.timestamp_s = t;
  frame.values.resize(layout.total_count);
  for (int i = 0; i < layout.total_count; ++i)
    if (!guard[i]) frame.values[i] = {static_cast<float>(h[i].real()), static_cast<float>(h[i].imag())};
  return frame;
}

std::vector<ActivityScript> default_scripts(std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {0x5c41f7}));

  std::vector<MultipathComponent> room;
  room.push_back({1.0, uniform(rng, 0.0, kTwoPi), uniform(rng, 5e-9, 15e-9), 0.0});  // LoS
  for (int r = 0; r < 2; ++r) room.push_back({uniform(rng, 0.2, 0.4), uniform(rng, 0.0, kTwoPi), uniform(rng, 20e-9, 80e-9), 0.0});

  std::vector<ActivityScript> scripts(kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) {
    scripts[c].label = label_from_code(c);
    scripts[c].static_paths = room;
  }

  {  // Sitting: slow torso sway, |v| <= 0.3 m/s
    auto& d = scripts[label_code(ActivityLabel::Sitting)].dynamic_paths;
    d.push_back(sinusoidal(body_path(rng, 0.8, 1.2), uniform(rng, 0.15, 0.3), uniform(rng, 2.0, 3.5), rng));
  }
  {  // Walking: torso at ~1.2 m/s plus a limb swinging around it
    auto& d = scripts[label_code(ActivityLabel::Walking)].dynamic_paths;
    MultipathComponent torso = body_path(rng, 1.6, 2.2);
    torso.velocity = sign(rng) * uniform(rng, 1.0, 1.3);
    d.push_back({torso, {}});
    MultipathComponent limb = body_path(rng, 0.5, 0.8);
    limb.velocity = torso.velocity;
    d.push_back(sinusoidal(limb, uniform(rng, 0.4, 0.6), uniform(rng, 0.9, 1.2), rng));
  }
  {  // Running: torso at ~2.8 m/s, faster and wider limb swing
    auto& d = scripts[label_code(ActivityLabel::Running)].dynamic_paths;
    MultipathComponent torso = body_path(rng, 1.6, 2.2);
    torso.velocity = sign(rng) * uniform(rng, 2.6, 3.0);
    d.push_back({torso, {}});
    MultipathComponent limb = body_path(rng, 0.5, 0.8);
    limb.velocity = torso.velocity;
    d.push_back(sinusoidal(limb, uniform(rng, 0.6, 0.9), uniform(rng, 0.5, 0.7), rng));
  }
  {  // Jumping: vertical oscillation, 3.5 m/s amplitude, 0.8 s period
    auto& d = scripts[label_code(ActivityLabel::Jumping)].dynamic_paths;
    d.push_back(sinusoidal(body_path(rng, 1.6, 2.2), uniform(rng, 3.3, 3.7), uniform(rng, 0.75, 0.85), rng));
  }
  return scripts;
}

CsiSample render_sample(const ActivityScript& script, const SynthConfig& cfg, std::uint32_t sample_id) {
  validate(script);
  const SubcarrierLayout layout = default_layout(cfg.bandwidth_mhz);
  const std::vector<bool> guard = guard_mask(layout);
  const auto frames = static_cast<std::size_t>(std::llround(script.duration_s * cfg.packet_rate_hz));
  const double k = kTwoPi * cfg.reflection_factor * cfg.center_freq_hz / kSpeedOfLight;  // rad per metre

  double static_power = 0.0;
  for (const auto& p : script.static_paths) static_power += p.alpha * p.alpha;
  const bool noisy = std::isfinite(script.snr_db);
  const double noise_std = noisy ? std::sqrt(static_power / std::pow(10.0, script.snr_db / 10.0) / 2.0) : 0.0;

  std::vector<std::vector<std::complex<double>>> dynamic_steering;
  for (const auto& d : script.dynamic_paths) dynamic_steering.push_back(steering(d.path, layout));
  // Moving-path phase rotations are common to every antenna.
  std::vector<std::complex<double>> rotation(frames * script.dynamic_paths.size());
  for (std::size_t n = 0; n < frames; ++n) {
    const double t = static_cast<double>(n) / cfg.packet_rate_hz;
    for (std::size_t l = 0; l < script.dynamic_paths.size(); ++l) {
      const DynamicPath& d = script.dynamic_paths[l];
      rotation[n * script.dynamic_paths.size() + l] = std::polar(1.0, d.path.phi0 + k * d.displacement(t));
    }
  }

  CsiSample sample;
  sample.sample_id = sample_id;
  sample.recordings.resize(cfg.antenna_count);
  std::vector<std::complex<double>> h(layout.total_count);
  for (int a = 0; a < cfg.antenna_count; ++a) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {sample_id, static_cast<std::uint64_t>(a), 0xa7e4}));
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::complex<double>> static_response(layout.total_count);
    for (MultipathComponent p : script.static_paths) {
      p.phi0 = uniform(rng, 0.0, kTwoPi);
      const auto s = steering(p, layout);
      const std::complex<double> r = std::polar(1.0, p.phi0);
      for (int i = 0; i < layout.total_count; ++i) static_response[i] += r * s[i];
    }

    CsiRecording& rec = sample.recordings[a];
    rec.antenna_id = a;
    rec.center_freq_hz = cfg.center_freq_hz;
    rec.packet_rate_hz = cfg.packet_rate_hz;
    rec.layout = layout;
    rec.label = script.label;
    rec.frames.resize(frames);
    for (std::size_t n = 0; n < frames; ++n) {
      std::copy(static_response.begin(), static_response.end(), h.begin());
      for (std::size_t l = 0; l < script.dynamic_paths.size(); ++l) {
        const std::complex<double> r = rotation[n * script.dynamic_paths.size() + l];
        const auto& s = dynamic_steering[l];
        for (int i = 0; i < layout.total_count; ++i) h[i] += r * s[i];
      }
      CsiFrame& frame = rec.frames[n];
      frame.timestamp_s = static_cast<double>(n) / cfg.packet_rate_hz;
      frame.values.resize(layout.total_count);
      for (int i = 0; i < layout.total_count; ++i) {
        if (guard[i]) continue;
        std::complex<double> v = h[i];
        if (noisy) v += std::complex<double>(noise_std * gauss(rng), noise_std * gauss(rng));
        frame.values[i] = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
      }
    }
  }
  return sample;
}

CsiSample render_synthetic_sample(const SynthConfig& cfg, std::uint32_t sample_id) {
  const int label = static_cast<int>(sample_id) / cfg.samples_per_class;
  require(label < kNumClasses, ErrorKind::InvariantViolation, "sample id beyond the configured dataset");
  ActivityScript script = default_scripts(derive_seed(cfg.seed, {sample_id, 0x5c}))[static_cast<std::size_t>(label)];
  script.duration_s = cfg.duration_s;
  script.snr_db = cfg.snr_db;
  return render_sample(script, cfg, sample_id);
}

CsiDataset generate_dataset(const SynthConfig& cfg, int threads) {
  validate(cfg);
  CsiDataset dataset;
  dataset.antenna_count = cfg.antenna_count;
  const auto total = static_cast<std::size_t>(cfg.samples_per_class) * kNumClasses;
  dataset.samples.resize(total);
  parallel_for(total, threads, [&](std::size_t idx) {
    dataset.samples[idx] = render_synthetic_sample(cfg, static_cast<std::uint32_t>(idx));
  });
  return dataset;
}

}  // namespace ibis
