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

#include "ibis/csi.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ibis/error.hpp"

namespace ibis {

int label_code(ActivityLabel label) noexcept { return static_cast<int>(label); }

ActivityLabel label_from_code(int code) {
  require(code >= 0 && code < kNumClasses, ErrorKind::InvariantViolation,
          "activity label code " + std::to_string(code) + " outside 0..4");
  return static_cast<ActivityLabel>(code);
}

std::string_view label_name(ActivityLabel label) noexcept {
  switch (label) {
    case ActivityLabel::Empty: return "Empty";
    case ActivityLabel::Sitting: return "Sitting";
    case ActivityLabel::Walking: return "Walking";
    case ActivityLabel::Running: return "Running";
    case ActivityLabel::Jumping: return "Jumping";
  }
  return "?";
}

bool is_supported_bandwidth(int bandwidth_mhz) noexcept {
  return bandwidth_mhz == 20 || bandwidth_mhz == 40 || bandwidth_mhz == 80;
}

namespace {

struct Numerology {
  int total_count;
  int edge_low;   // lowest used subcarrier magnitude bound: used = [-edge_high, -edge_low] U [edge_low, edge_high]
  int edge_high;
  std::vector<int> pilots;  // positive pilot offsets, mirrored to negative
};

Numerology numerology(int bandwidth_mhz) {
  switch (bandwidth_mhz) {
    case 20: return {64, 1, 28, {7, 21}};
    case 40: return {128, 2, 58, {11, 25, 53}};
    case 80: return {256, 2, 122, {11, 39, 75, 103}};
    default:
      fail(ErrorKind::UnsupportedBandwidth, std::to_string(bandwidth_mhz) + " MHz (supported: 20, 40, 80)");
  }
}

}  // namespace

SubcarrierLayout default_layout(int bandwidth_mhz) {
  const Numerology n = numerology(bandwidth_mhz);
  SubcarrierLayout layout;
  layout.bandwidth_mhz = bandwidth_mhz;
  layout.total_count = n.total_count;
  const int half = n.total_count / 2;
  const std::set<int> pilots = [&] {
    std::set<int> s;
    for (int p : n.pilots) {
      s.insert(p);
      s.insert(-p);
    }
    return s;
  }();
  for (int i = 0; i < n.total_count; ++i) {
    const int k = i - half;
    const int mag = std::abs(k);
    if (mag < n.edge_low || mag > n.edge_high) layout.guard_indices.push_back(i);
    else if (pilots.contains(k)) layout.pilot_indices.push_back(i);
    else layout.data_indices.push_back(i);
  }
  return layout;
}

std::vector<int> SubcarrierLayout::active_indices() const {
  std::vector<int> out;
  out.reserve(data_indices.size() + pilot_indices.size());
  std::merge(data_indices.begin(), data_indices.end(), pilot_indices.begin(), pilot_indices.end(),
             std::back_inserter(out));
  return out;
}

void validate(const CsiRecording& r) {
  require(r.antenna_id >= 0, ErrorKind::InvariantViolation, "antenna_id must be >= 0");
  require(r.packet_rate_hz > 0.0 && std::isfinite(r.packet_rate_hz), ErrorKind::InvariantViolation,
          "packet_rate_hz must be positive");
  require(r.center_freq_hz > 0.0 && std::isfinite(r.center_freq_hz), ErrorKind::InvariantViolation,
          "center_freq_hz must be positive");
  require(is_supported_bandwidth(r.layout.bandwidth_mhz) && r.layout == default_layout(r.layout.bandwidth_mhz),
          ErrorKind::InvariantViolation, "recording layout is not a canonical 20/40/80 MHz layout");
  require(!r.frames.empty(), ErrorKind::InvariantViolation, "recording has no frames");
  const auto width = static_cast<std::size_t>(r.layout.total_count);
  for (std::size_t f = 0; f < r.frames.size(); ++f) {
    const CsiFrame& frame = r.frames[f];
    require(frame.values.size() == width, ErrorKind::InvariantViolation,
            "frame " + std::to_string(f) + " has " + std::to_string(frame.values.size()) + " values, layout needs " +
                std::to_string(width));
    require(std::isfinite(frame.timestamp_s), ErrorKind::NonFiniteValue, "timestamp of frame " + std::to_string(f));
    if (f > 0) {
      require(frame.timestamp_s > r.frames[f - 1].timestamp_s, ErrorKind::InvariantViolation,
              "timestamps not strictly increasing at frame " + std::to_string(f));
    }
    for (const ComplexValue& v : frame.values) {
      require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorKind::NonFiniteValue,
              "non-finite CSI value in frame " + std::to_string(f));
    }
  }
}

void validate(const CsiDataset& d) {
  require(d.antenna_count >= 1, ErrorKind::InvariantViolation, "antenna_count must be >= 1");
  std::set<std::uint32_t> ids;
  for (const CsiSample& s : d.samples) {
    const std::string where = "sample " + std::to_string(s.sample_id);
    require(ids.insert(s.sample_id).second, ErrorKind::InvariantViolation, "duplicate " + where);
    require(s.recordings.size() == static_cast<std::size_t>(d.antenna_count), ErrorKind::InvariantViolation,
            where + " has " + std::to_string(s.recordings.size()) + " recordings, expected " +
                std::to_string(d.antenna_count));
    const CsiRecording& first = s.recordings.front();
    for (std::size_t a = 0; a < s.recordings.size(); ++a) {
      const CsiRecording& r = s.recordings[a];
      validate(r);
      require(r.antenna_id == static_cast<int>(a), ErrorKind::InvariantViolation,
              where + ": recordings must be ordered by antenna id");
      require(r.label == first.label, ErrorKind::InvariantViolation, where + ": antennas disagree on label");
      require(r.frames.size() == first.frames.size(), ErrorKind::InvariantViolation,
              where + ": antennas disagree on frame count");
      require(r.center_freq_hz == first.center_freq_hz && r.packet_rate_hz == first.packet_rate_hz &&
                  r.layout.bandwidth_mhz == first.layout.bandwidth_mhz,
              ErrorKind::InvariantViolation, where + ": antennas disagree on radio parameters");
      for (std::size_t f = 0; f < r.frames.size(); ++f) {
        require(r.frames[f].timestamp_s == first.frames[f].timestamp_s, ErrorKind::InvariantViolation,
                where + ": antennas disagree on timestamps");
      }
    }
  }
}

CsiRecording extract_subband(const CsiRecording& recording, int target_mhz) {
  const SubcarrierLayout target = default_layout(target_mhz);
  const int source_mhz = recording.layout.bandwidth_mhz;
  require(is_supported_bandwidth(source_mhz), ErrorKind::UnsupportedBandwidth,
          "source recording at " + std::to_string(source_mhz) + " MHz");
  require(target_mhz <= source_mhz, ErrorKind::UpsampleRequested,
          std::to_string(source_mhz) + " MHz -> " + std::to_string(target_mhz) + " MHz");

  CsiRecording out;
  out.antenna_id = recording.antenna_id;
  out.center_freq_hz = recording.center_freq_hz;
  out.packet_rate_hz = recording.packet_rate_hz;
  out.label = recording.label;
  out.layout = target;
  const int offset = recording.layout.total_count / 2 - target.total_count / 2;
  out.frames.reserve(recording.frames.size());
  for (const CsiFrame& frame : recording.frames) {
    CsiFrame f;
    f.timestamp_s = frame.timestamp_s;
    f.values.assign(frame.values.begin() + offset, frame.values.begin() + offset + target.total_count);
    out.frames.push_back(std::move(f));
  }
  return out;
}

CsiDataset extract_subband(const CsiDataset& dataset, int target_mhz) {
  CsiDataset out;
  out.antenna_count = dataset.antenna_count;
  out.samples.reserve(dataset.samples.size());
  for (const CsiSample& s : dataset.samples) {
    CsiSample ns;
    ns.sample_id = s.sample_id;
    for (const CsiRecording& r : s.recordings) ns.recordings.push_back(extract_subband(r, target_mhz));
    out.samples.push_back(std::move(ns));
  }
  return out;
}

}  // namespace ibis
