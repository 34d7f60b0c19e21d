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
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace ibis {

/// Per-subcarrier complex channel gain, stored at float32 like the capture files.
using ComplexValue = std::complex<float>;

enum class ActivityLabel : std::uint8_t { Empty = 0, Sitting = 1, Walking = 2, Running = 3, Jumping = 4 };

inline constexpr int kNumClasses = 5;
inline constexpr double kSubcarrierSpacingHz = 312.5e3;
inline constexpr double kSpeedOfLight = 299'792'458.0;

int label_code(ActivityLabel label) noexcept;
ActivityLabel label_from_code(int code);  // throws InvariantViolation outside 0..4
std::string_view label_name(ActivityLabel label) noexcept;

/// 802.11ac FFT grid for one channel width. Indices are in centred order:
/// index i holds subcarrier k = i - total_count/2, so DC sits at total_count/2.
struct SubcarrierLayout {
  int bandwidth_mhz = 0;
  int total_count = 0;
  std::vector<int> data_indices;
  std::vector<int> pilot_indices;
  std::vector<int> guard_indices;

  /// Data and pilot indices merged in ascending order.
  std::vector<int> active_indices() const;
  int dc_index() const noexcept { return total_count / 2; }
  /// Baseband frequency of index i relative to the channel centre.
  double baseband_hz(int index) const noexcept { return (index - dc_index()) * kSubcarrierSpacingHz; }

  friend bool operator==(const SubcarrierLayout&, const SubcarrierLayout&) = default;
};

SubcarrierLayout default_layout(int bandwidth_mhz);
bool is_supported_bandwidth(int bandwidth_mhz) noexcept;

struct CsiFrame {
  double timestamp_s = 0.0;
  std::vector<ComplexValue> values;

  friend bool operator==(const CsiFrame&, const CsiFrame&) = default;
};

struct CsiRecording {
  int antenna_id = 0;
  double center_freq_hz = 0.0;
  double packet_rate_hz = 0.0;
  SubcarrierLayout layout;
  std::vector<CsiFrame> frames;
  std::optional<ActivityLabel> label;

  std::size_t num_frames() const noexcept { return frames.size(); }
  double duration_s() const noexcept { return frames.size() / packet_rate_hz; }

  friend bool operator==(const CsiRecording&, const CsiRecording&) = default;
};

/// One physical event observed on every receive antenna.
struct CsiSample {
  std::uint32_t sample_id = 0;
  std::vector<CsiRecording> recordings;  // ordered by antenna

  std::optional<ActivityLabel> label() const { return recordings.empty() ? std::nullopt : recordings.front().label; }

  friend bool operator==(const CsiSample&, const CsiSample&) = default;
};

struct CsiDataset {
  int antenna_count = 0;
  std::vector<CsiSample> samples;

  friend bool operator==(const CsiDataset&, const CsiDataset&) = default;
};

/// Throws InvariantViolation (or NonFiniteValue) describing the first broken
/// invariant of a recording / dataset.
void validate(const CsiRecording& recording);
void validate(const CsiDataset& dataset);

/// Keeps the contiguous block of subcarriers centred on DC that makes up the
/// narrower channel. Timing, carrier and label metadata are untouched.
CsiRecording extract_subband(const CsiRecording& recording, int target_mhz);
CsiDataset extract_subband(const CsiDataset& dataset, int target_mhz);

}  // namespace ibis
