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

#include <stdexcept>
#include <string>
#include <string_view>

namespace ibis {

/// Failure categories surfaced by the toolkit. Every thrown ibis::Error
/// carries exactly one of these so callers (and the CLI exit-code mapping)
/// can branch on the kind instead of parsing messages.
enum class ErrorKind {
  // csi-core
  UnsupportedBandwidth,
  BadMagic,
  UnsupportedVersion,
  HeaderMismatch,
  NonFiniteValue,
  InvariantViolation,
  UpsampleRequested,
  // sanitizer
  DegenerateInput,
  // doppler
  SignalTooShort,
  NyquistViolation,
  // neuralnet
  ShapeMismatch,
  EmptyDataset,
  // svm
  DimensionMismatch,
  SingleClassInput,
  InsufficientClassMembers,
  // pipeline
  EmptyInput,
  MixedSampleIds,
  LengthMismatch,
  CountExceedsAntennas,
  EmptySelection,
  // config / io
  ParseError,
  UnknownKey,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace ibis
