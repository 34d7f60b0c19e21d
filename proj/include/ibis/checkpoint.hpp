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
#include <optional>
#include <span>

#include "ibis/binary_io.hpp"
#include "ibis/network.hpp"
#include "ibis/svm.hpp"

namespace ibis {

/// Model checkpoint:
///
///   "IBN1" | u32 header_len | JSON header | f64 blobs
///
/// Header: {"format": "ibn/1", "architecture": {...}, "blocks": [{"name",
/// "shape"}], "svm": null | {"kernel", "C", "gamma", "degree", "poly_coef0",
/// "sigmoid_coef0", "pairs": [{"positive", "negative", "support_vectors",
/// "dims"}]}}
/// Blobs: network parameters in block order, then per SVM pair the support
/// vectors (row-major), dual coefficients and bias.
struct Checkpoint {
  Network network;
  std::optional<MulticlassSvm> svm;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

Bytes write_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

Checkpoint load_checkpoint(const std::filesystem::path& path);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

}  // namespace ibis
