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

#include "ibis/log.hpp"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>

#include "ibis/error.hpp"

namespace ibis {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnsupportedBandwidth: return "UnsupportedBandwidth";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::HeaderMismatch: return "HeaderMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::UpsampleRequested: return "UpsampleRequested";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::SignalTooShort: return "SignalTooShort";
    case ErrorKind::NyquistViolation: return "NyquistViolation";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingleClassInput: return "SingleClassInput";
    case ErrorKind::InsufficientClassMembers: return "InsufficientClassMembers";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::MixedSampleIds: return "MixedSampleIds";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::CountExceedsAntennas: return "CountExceedsAntennas";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto log = spdlog::stderr_color_mt("ibis");
    log->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    log->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("IBIS_LOG")) {
      std::string_view level(env);
      if (level == "error") log->set_level(spdlog::level::err);
      else if (level == "info") log->set_level(spdlog::level::info);
      else if (level == "debug") log->set_level(spdlog::level::debug);
    }
    return log;
  }();
  return instance;
}

}  // namespace ibis
