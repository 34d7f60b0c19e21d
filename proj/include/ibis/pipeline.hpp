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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibis/csi.hpp"
#include "ibis/doppler.hpp"
#include "ibis/grid_search.hpp"
#include "ibis/metrics.hpp"
#include "ibis/network.hpp"
#include "ibis/synth.hpp"
#include "ibis/train.hpp"

namespace ibis {

struct PipelineConfig {
  std::uint64_t seed = 42;
  int repetitions = 10;
  double train_fraction = 0.7;
  std::vector<int> bandwidths{20, 40, 80};
  double lasso_lambda = 1e-2;
  DopplerConfig doppler;
  Architecture network;  // input_channels is set from the data
  TrainConfig train;     // train.seed is replaced per repetition
  SvmGrid grid;
  int cv_folds = 5;
  SmoOptions smo;
  std::vector<int> antenna_counts{1, 2, 3, 4};
  int threads = 1;

  friend bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
    return a.seed == b.seed && a.repetitions == b.repetitions && a.train_fraction == b.train_fraction &&
           a.bandwidths == b.bandwidths && a.lasso_lambda == b.lasso_lambda && a.network == b.network &&
           a.train == b.train && a.grid == b.grid && a.cv_folds == b.cv_folds && a.antenna_counts == b.antenna_counts;
  }
};

void validate(const PipelineConfig& cfg);

/// Stratified split at sample level: per class, round(fraction * n) samples
/// (at least one on each side when the class has two or more) go to train.
struct SampleSplit {
  std::vector<std::uint32_t> train, test;  // sample ids, ascending
};

struct SampleMeta {
  std::uint32_t sample_id = 0;
  int label = 0;
};

SampleSplit stratified_split(std::span<const SampleMeta> samples, double train_fraction, std::uint64_t seed);
SampleSplit stratified_split(const CsiDataset& dataset, double train_fraction, std::uint64_t seed);

/// Sanitised phase averaged over each STFT window of the centred 4.5 s, so it
/// lines up with the Doppler trace's time bins. [time_bins x subcarriers].
Sequence phase_sequence(const PhaseMatrix& phase, const DopplerConfig& cfg);

/// Network inputs for one antenna of one sample.
struct AntennaInput {
  int antenna_id = 0;
  DopplerTrace trace;
  Sequence doppler;
  Sequence phase;
};

struct SampleInputs {
  std::uint32_t sample_id = 0;
  int label = 0;
  std::vector<AntennaInput> antennas;
};

/// Samples fetched one at a time, so a study never holds more than a few raw
/// recordings in memory.
struct SampleSource {
  std::size_t count = 0;
  int antenna_count = 0;
  std::function<CsiSample(std::size_t index)> fetch;
};

SampleSource dataset_source(const CsiDataset& dataset);  // borrows dataset
SampleSource synthetic_source(const SynthConfig& cfg);
SampleSource csif_source(const std::filesystem::path& path);  // reads samples lazily

/// Network inputs for every configured bandwidth (sub-band extraction,
/// sanitising and Doppler per antenna).
struct PreparedData {
  int antenna_count = 0;
  std::vector<SampleMeta> samples;
  std::vector<int> bandwidths;
  std::vector<std::vector<SampleInputs>> inputs;  // [bandwidth][sample]
};

PreparedData prepare_inputs(const SampleSource& source, const PipelineConfig& cfg);

enum class Variant { Ibis, Baseline, NoSvm, NoDoppler };
std::string_view variant_name(Variant v) noexcept;

struct StudyOptions {
  bool baseline = true;
  bool no_svm = true;
  bool no_doppler = false;
  bool antenna_sweep = false;
};

struct VariantOutcome {
  Variant variant = Variant::Ibis;
  Evaluation evaluation;
};

struct RepetitionResult {
  int repetition = 0;
  std::uint64_t seed = 0;
  int bandwidth_mhz = 0;
  std::vector<VariantOutcome> variants;
  std::optional<GridSearchResult> grid;
  std::optional<GridSearchResult> no_doppler_grid;
  std::vector<std::pair<int, Evaluation>> antenna_sweep;
  std::vector<double> hybrid_loss;
  std::vector<Prediction> predictions;  // IBIS per-antenna test predictions
};

struct BandwidthSummary {
  int bandwidth_mhz = 0;
  std::vector<std::pair<Variant, MetricsReport>> variants;  // means over repetitions
  std::vector<std::pair<Variant, ConfusionMatrix>> confusion;  // summed over repetitions
  std::vector<std::pair<int, MetricsReport>> antenna_sweep;

  const MetricsReport* find(Variant v) const;
};

struct ExperimentReport {
  std::string kind = "experiment";
  std::uint64_t seed = 0;
  int repetitions = 0;
  std::vector<BandwidthSummary> bandwidths;
  std::vector<RepetitionResult> runs;

  const BandwidthSummary* find(int bandwidth_mhz) const;
};

/// Everything requested in `options`, sharing trained networks between the
/// variants of a repetition.
ExperimentReport run_study(const PreparedData& data, const PipelineConfig& cfg, const StudyOptions& options);
ExperimentReport run_study(const SampleSource& source, const PipelineConfig& cfg, const StudyOptions& options);

ExperimentReport run_experiment(const SampleSource& source, const PipelineConfig& cfg);

enum class AblationKind { NoDoppler, NoSvm };
ExperimentReport ablate(AblationKind kind, const SampleSource& source, const PipelineConfig& cfg);

/// Accuracy per antenna count (first k antennas), averaged over repetitions.
ExperimentReport antenna_sweep(const SampleSource& source, const PipelineConfig& cfg, std::span<const int> counts);

}  // namespace ibis
