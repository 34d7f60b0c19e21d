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

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "ibis/binary_io.hpp"
#include "ibis/csi.hpp"

namespace ibis {

/// CSIF v1 container (little-endian):
///
///   "CSIF" | u16 version = 1 | u32 header_len | JSON header (UTF-8)
///   per sample: f64 timestamps[num_frames]
///               then frame-major, antenna, subcarrier: f32 re, f32 im
///
/// Header: {"schema": "csif/1", "antenna_count": A, "samples": [{"sample_id",
/// "label_code" (0..4 or null), "center_freq_hz", "packet_rate_hz",
/// "bandwidth_mhz", "num_frames"}]}
inline constexpr std::uint16_t kCsifVersion = 1;

Bytes write_csif(const CsiDataset& dataset);
CsiDataset parse_csif(std::span<const std::uint8_t> bytes);

CsiDataset load_csif(const std::filesystem::path& path);
void save_csif(const std::filesystem::path& path, const CsiDataset& dataset);

/// Same bytes as save_csif, but samples are produced one at a time by
/// fetch(0..count-1) and never held together in memory.
void save_csif_streamed(const std::filesystem::path& path, std::size_t count, int antenna_count,
                        const std::function<CsiSample(std::size_t)>& fetch);

/// Random access to the samples of a CSIF file without loading the payload.
/// read() opens its own stream, so concurrent calls are fine.
class CsifFile {
 public:
  explicit CsifFile(std::filesystem::path path);

  std::size_t size() const noexcept { return entries_.size(); }
  int antenna_count() const noexcept { return antenna_count_; }
  std::uint32_t sample_id(std::size_t index) const { return entries_.at(index).sample_id; }
  CsiSample read(std::size_t index) const;

 private:
  struct Entry {
    std::uint32_t sample_id = 0;
    std::size_t offset = 0;
    std::size_t bytes = 0;
  };
  std::filesystem::path path_;
  int antenna_count_ = 0;
  std::vector<Entry> entries_;
};

}  // namespace ibis
