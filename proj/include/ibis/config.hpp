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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ibis/pipeline.hpp"
#include "ibis/synth.hpp"

namespace ibis {

/// One document holding every knob of a run. The top-level seed drives both
/// the synthetic generator and the pipeline.
struct RunConfig {
  std::uint64_t seed = 42;
  std::optional<std::string> data;  // CSIF path; synthetic data when absent
  SynthConfig synth;
  PipelineConfig pipeline;
};

void validate(const RunConfig& cfg);

/// Strict parse: unknown keys raise UnknownKey, malformed JSON raises
/// ParseError with line and column, bad values raise InvariantViolation.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Fully defaulted document, stable key order (parse_config round-trips it).
std::string resolved_config_json(const RunConfig& cfg);

/// Short hex digest of the resolved document.
std::string config_hash(const RunConfig& cfg);

}  // namespace ibis
