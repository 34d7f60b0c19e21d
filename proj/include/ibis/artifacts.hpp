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
#include <string>

#include "ibis/config.hpp"
#include "ibis/pipeline.hpp"

namespace ibis {

std::string report_json(const ExperimentReport& report);

/// rows = true label, columns = predicted, with a header row of label names.
std::string confusion_csv(const ConfusionMatrix& cm);

/// One row per (repetition, bandwidth, variant) with accuracy/precision/recall/F1.
std::string runs_csv(const ExperimentReport& report);

/// Reference accuracies on the real dataset (percent) for the Inception-only
/// baseline and the full pipeline.
struct ReferenceAccuracy {
  int bandwidth_mhz = 0;
  double baseline = 0.0;
  double ibis = 0.0;
};
std::optional<ReferenceAccuracy> reference_accuracy(int bandwidth_mhz);

/// bandwidth, variant, reference, measured, delta, within_3pp.
std::string comparison_csv(const ExperimentReport& report);

/// Directory name "<config hash>-seed<seed>".
std::string run_directory_name(const RunConfig& cfg);

/// report.json, resolved_config.json, runs.csv, confusion_<bw>_<variant>.csv
/// and, when `comparison` is set, comparison.csv.
void write_report(const std::filesystem::path& dir, const ExperimentReport& report, const RunConfig& cfg,
                  bool comparison);

/// First antenna's Doppler trace of the first sample of each class at each
/// bandwidth, as spectrogram_<bw>_<label>.pgm.
void write_example_spectrograms(const std::filesystem::path& dir, const PreparedData& data);

}  // namespace ibis
