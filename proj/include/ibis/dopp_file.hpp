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
#include <span>
#include <string>

#include "ibis/binary_io.hpp"
#include "ibis/doppler.hpp"

namespace ibis {

/// DOPP v1: "DOPP" | u16 version = 1 | u32 header_len | JSON header
/// {time_bins, velocity_bins, duration_s, velocity_min, velocity_max,
/// label_code (0..4 or null), antenna_id} | f32 power, row-major.
inline constexpr std::uint16_t kDoppVersion = 1;

Bytes write_dopp(const DopplerTrace& trace);
DopplerTrace parse_dopp(std::span<const std::uint8_t> bytes);

DopplerTrace load_dopp(const std::filesystem::path& path);
void save_dopp(const std::filesystem::path& path, const DopplerTrace& trace);

/// 8-bit binary PGM (P5): time runs left to right, +velocity at the top.
Bytes render_pgm(const DopplerTrace& trace);
/// CSV with a header row of bin velocities, then one row per time bin.
std::string render_csv(const DopplerTrace& trace);

}  // namespace ibis
