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

#include "ibis/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>

#include "ibis/csif.hpp"
#include "ibis/error.hpp"
#include "ibis/log.hpp"
#include "ibis/parallel.hpp"
#include "ibis/sanitizer.hpp"

namespace ibis {

void validate(const PipelineConfig& cfg) {
  require(cfg.repetitions >= 1, ErrorKind::InvariantViolation, "repetitions must be >= 1");
  require(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0, ErrorKind::InvariantViolation,
          "split.train_fraction must lie in (0, 1)");
  require(!cfg.bandwidths.empty(), ErrorKind::InvariantViolation, "bandwidths must not be empty");
  for (int bw : cfg.bandwidths)
    require(is_supported_bandwidth(bw), ErrorKind::UnsupportedBandwidth, std::to_string(bw) + " MHz");
  require(cfg.lasso_lambda >= 0.0, ErrorKind::InvariantViolation, "sanitizer.lambda must be >= 0");
  validate(cfg.doppler);
  validate(cfg.train);
  validate(cfg.grid);
  require(cfg.cv_folds >= 2, ErrorKind::InvariantViolation, "svm.folds must be >= 2");
  require(cfg.threads >= 1, ErrorKind::InvariantViolation, "threads must be >= 1");
}

SampleSplit stratified_split(std::span<const SampleMeta> samples, double train_fraction, std::uint64_t seed) {
  std::array<std::vector<std::uint32_t>, kNumClasses> by_class;
  for (const SampleMeta& s : samples) {
    require(s.label >= 0 && s.label < kNumClasses, ErrorKind::InvariantViolation, "label outside 0..4");
    by_class[s.label].push_back(s.sample_id);
  }
  SampleSplit split;
  for (int c = 0; c < kNumClasses; ++c) {
    auto& ids = by_class[c];
    if (ids.empty()) continue;
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(derive_seed(seed, {0x5b1, static_cast<std::uint64_t>(c)}));
    std::shuffle(ids.begin(), ids.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ids.size())));
    if (ids.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
    split.train.insert(split.train.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

namespace {

SampleMeta meta_of(const CsiSample& s) {
  const auto& label = s.recordings.front().label;
  require(label.has_value(), ErrorKind::InvariantViolation, "sample " + std::to_string(s.sample_id) + " has no label");
  return {s.sample_id, label_code(*label)};
}

}  // namespace

SampleSplit stratified_split(const CsiDataset& dataset, double train_fraction, std::uint64_t seed) {
  std::vector<SampleMeta> meta;
  for (const CsiSample& s : dataset.samples) meta.push_back(meta_of(s));
  return stratified_split(meta, train_fraction, seed);
}

Sequence phase_sequence(const PhaseMatrix& phase, const DopplerConfig& cfg) {
  const auto needed = static_cast<std::size_t>(std::llround(kTraceDurationS * phase.packet_rate_hz));
  require(phase.num_frames >= needed && needed >= cfg.stft.window_len, ErrorKind::SignalTooShort,
          "phase sequence needs 4.5 s of frames");
  const std::size_t first = (phase.num_frames - needed) / 2;
  const std::size_t bins = stft_frame_count(needed, cfg.stft);
  const std::size_t cols = phase.num_columns();
  Sequence out = Sequence::Zero(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(cols));
  for (std::size_t t = 0; t < bins; ++t) {
    const std::size_t start = first + t * cfg.stft.hop;
    for (std::size_t n = 0; n < cfg.stft.window_len; ++n) {
      const auto row = phase.row(start + n);
      for (std::size_t c = 0; c < cols; ++c) out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) += row[c];
    }
  }
  out /= static_cast<double>(cfg.stft.window_len);
  return out;
}

SampleSource dataset_source(const CsiDataset& dataset) {
  validate(dataset);
  return {dataset.samples.size(), dataset.antenna_count,
          [&dataset](std::size_t i) { return dataset.samples[i]; }};
}

SampleSource synthetic_source(const SynthConfig& cfg) {
  validate(cfg);
  const auto per_class = static_cast<std::size_t>(cfg.samples_per_class);
  return {per_class * kNumClasses, cfg.antenna_count, [cfg](std::size_t i) {
            return render_synthetic_sample(cfg, static_cast<std::uint32_t>(i));
          }};
}

SampleSource csif_source(const std::filesystem::path& path) {
  auto file = std::make_shared<const CsifFile>(path);
  return {file->size(), file->antenna_count(), [file](std::size_t i) { return file->read(i); }};
}

PreparedData prepare_inputs(const SampleSource& source, const PipelineConfig& cfg) {
  require(source.count > 0, ErrorKind::EmptyInput, "dataset has no samples");
  PreparedData out;
  out.antenna_count = source.antenna_count;
  out.bandwidths = cfg.bandwidths;
  out.samples.resize(source.count);
  out.inputs.assign(cfg.bandwidths.size(), std::vector<SampleInputs>(source.count));
  parallel_for(source.count, cfg.threads, [&](std::size_t i) {
    const CsiSample s = source.fetch(i);
    require(static_cast<int>(s.recordings.size()) == source.antenna_count, ErrorKind::InvariantViolation,
            "sample " + std::to_string(s.sample_id) + " has the wrong antenna count");
    out.samples[i] = meta_of(s);
    for (std::size_t b = 0; b < cfg.bandwidths.size(); ++b) {
      SampleInputs& si = out.inputs[b][i];
      si.sample_id = s.sample_id;
      si.label = out.samples[i].label;
      for (const CsiRecording& full : s.recordings) {
        const PhaseMatrix phase = sanitize_recording(extract_subband(full, cfg.bandwidths[b]), cfg.lasso_lambda);
        AntennaInput in;
        in.antenna_id = full.antenna_id;
        in.trace = doppler_trace(phase, cfg.doppler);
        in.trace.label = full.label;
        in.trace.antenna_id = full.antenna_id;
        in.doppler = to_sequence(in.trace);
        in.phase = phase_sequence(phase, cfg.doppler);
        si.antennas.push_back(std::move(in));
      }
    }
  });
  std::set<std::uint32_t> ids;
  for (const SampleMeta& m : out.samples)
    require(ids.insert(m.sample_id).second, ErrorKind::InvariantViolation,
            "duplicate sample id " + std::to_string(m.sample_id));
  return out;
}

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::Ibis: return "ibis";
    case Variant::Baseline: return "baseline";
    case Variant::NoSvm: return "no_svm";
    case Variant::NoDoppler: return "no_doppler";
  }
  return "?";
}

const MetricsReport* BandwidthSummary::find(Variant v) const {
  for (const auto& [variant, report] : variants)
    if (variant == v) return &report;
  return nullptr;
}

const BandwidthSummary* ExperimentReport::find(int bandwidth_mhz) const {
  for (const BandwidthSummary& b : bandwidths)
    if (b.bandwidth_mhz == bandwidth_mhz) return &b;
  return nullptr;
}

namespace {

enum class Input { Doppler, Phase };

struct ModelJob {
  std::size_t run = 0;  // index into (repetition, bandwidth) runs
  Variant variant = Variant::Ibis;
  ModelKind kind = ModelKind::Hybrid;
  Input input = Input::Doppler;
  Network network;
  std::vector<double> loss;
};

struct RunSlot {
  int repetition = 0;
  std::uint64_t seed = 0;
  std::size_t bandwidth_index = 0;
  const SampleSplit* split = nullptr;
};

const Sequence& input_of(const AntennaInput& a, Input input) { return input == Input::Doppler ? a.doppler : a.phase; }

std::vector<LabeledSequence> training_set(const std::vector<SampleInputs>& samples, const std::set<std::uint32_t>& ids,
                                          Input input) {
  std::vector<LabeledSequence> out;
  for (const SampleInputs& s : samples) {
    if (!ids.contains(s.sample_id)) continue;
    for (const AntennaInput& a : s.antennas)
      out.push_back({input_of(a, input), s.label, (static_cast<std::uint64_t>(s.sample_id) << 8) | a.antenna_id});
  }
  return out;
}

/// Per-antenna probabilities for the samples in `ids`, in sample then antenna order.
std::vector<Prediction> network_predictions(const Network& net, const std::vector<SampleInputs>& samples,
                                            const std::set<std::uint32_t>& ids, Input input) {
  std::vector<Sequence> xs;
  std::vector<Prediction> out;
  for (const SampleInputs& s : samples) {
    if (!ids.contains(s.sample_id)) continue;
    for (const AntennaInput& a : s.antennas) {
      xs.push_back(input_of(a, input));
      out.push_back({s.sample_id, a.antenna_id, {}, ActivityLabel::Empty});
    }
  }
  const std::vector<Probabilities> probs = predict_proba(net, xs);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].probabilities = probs[i];
    out[i].label = label_from_code(
        static_cast<int>(std::max_element(probs[i].begin(), probs[i].end()) - probs[i].begin()));
  }
  return out;
}

FeatureMatrix features_of(std::span<const Prediction> preds) {
  FeatureMatrix X;
  X.cols = kNumClasses;
  for (const Prediction& p : preds) X.push_back(p.probabilities);
  return X;
}

std::vector<int> labels_of(std::span<const Prediction> preds, const std::map<std::uint32_t, int>& truth) {
  std::vector<int> y;
  for (const Prediction& p : preds) y.push_back(truth.at(p.sample_id));
  return y;
}

/// Fuses the first `antennas` predictions of each sample and scores them.
Evaluation fuse_and_evaluate(std::span<const Prediction> preds, const std::map<std::uint32_t, int>& truth,
                             int antennas) {
  require(antennas >= 1, ErrorKind::EmptySelection, "antenna selection is empty");
  std::vector<int> t, p;
  std::size_t i = 0;
  while (i < preds.size()) {
    std::size_t j = i;
    while (j < preds.size() && preds[j].sample_id == preds[i].sample_id) ++j;
    std::vector<Prediction> group(preds.begin() + static_cast<std::ptrdiff_t>(i),
                                  preds.begin() + static_cast<std::ptrdiff_t>(j));
    std::sort(group.begin(), group.end(), [](const auto& a, const auto& b) { return a.antenna_id < b.antenna_id; });
    group.resize(std::min(group.size(), static_cast<std::size_t>(antennas)));
    t.push_back(truth.at(preds[i].sample_id));
    p.push_back(label_code(majority_vote(group)));
    i = j;
  }
  return evaluate(t, p);
}

struct SvmStage {
  GridSearchResult grid;
  std::vector<Prediction> test;  // labels replaced by SVM decisions
};

SvmStage svm_stage(const std::vector<Prediction>& train, std::vector<Prediction> test,
                   const std::map<std::uint32_t, int>& truth, const PipelineConfig& cfg, std::uint64_t seed) {
  const FeatureMatrix X = features_of(train);
  const std::vector<int> y = labels_of(train, truth);
  SvmStage out;
  out.grid = grid_search(X, y, cfg.grid, cfg.cv_folds, seed, 1, cfg.smo);
  const MulticlassSvm svm = fit_multiclass(X, y, out.grid.best, cfg.smo);
  for (Prediction& p : test) p.label = label_from_code(predict(svm, p.probabilities).label);
  out.test = std::move(test);
  return out;
}

}  // namespace

ExperimentReport run_study(const PreparedData& data, const PipelineConfig& cfg, const StudyOptions& options) {
  validate(cfg);
  require(!data.samples.empty(), ErrorKind::EmptyInput, "dataset has no samples");
  require(data.bandwidths == cfg.bandwidths, ErrorKind::InvariantViolation,
          "prepared data and config disagree on bandwidths");
  if (options.antenna_sweep) {
    for (int k : cfg.antenna_counts) {
      require(k >= 1, ErrorKind::EmptySelection, "antenna count " + std::to_string(k) + " selects nothing");
      require(k <= data.antenna_count, ErrorKind::CountExceedsAntennas,
              "antenna count " + std::to_string(k) + " exceeds the " + std::to_string(data.antenna_count) +
                  " antennas in the dataset");
    }
  }

  std::map<std::uint32_t, int> truth;
  for (const SampleMeta& m : data.samples) truth[m.sample_id] = m.label;
  const auto& inputs = data.inputs;

  std::vector<SampleSplit> splits;
  for (int r = 0; r < cfg.repetitions; ++r) {
    splits.push_back(stratified_split(data.samples, cfg.train_fraction, cfg.seed + static_cast<std::uint64_t>(r)));
    std::vector<std::uint32_t> both;
    std::set_intersection(splits.back().train.begin(), splits.back().train.end(), splits.back().test.begin(),
                          splits.back().test.end(), std::back_inserter(both));
    require(both.empty(), ErrorKind::InvariantViolation, "train/test split shares sample ids");
    require(!splits.back().train.empty() && !splits.back().test.empty(), ErrorKind::EmptyInput,
            "split leaves an empty side");
  }

  std::vector<RunSlot> slots;
  for (int r = 0; r < cfg.repetitions; ++r)
    for (std::size_t b = 0; b < cfg.bandwidths.size(); ++b)
      slots.push_back({r, cfg.seed + static_cast<std::uint64_t>(r), b, &splits[static_cast<std::size_t>(r)]});

  std::vector<ModelJob> jobs;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    jobs.push_back({s, Variant::Ibis, ModelKind::Hybrid, Input::Doppler, {}, {}});
    if (options.baseline) jobs.push_back({s, Variant::Baseline, ModelKind::InceptionOnly, Input::Doppler, {}, {}});
    if (options.no_doppler) jobs.push_back({s, Variant::NoDoppler, ModelKind::Hybrid, Input::Phase, {}, {}});
  }

  parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
    ModelJob& job = jobs[j];
    const RunSlot& slot = slots[job.run];
    const int bw = cfg.bandwidths[slot.bandwidth_index];
    const std::set<std::uint32_t> train_ids(slot.split->train.begin(), slot.split->train.end());
    const std::vector<LabeledSequence> data = training_set(inputs[slot.bandwidth_index], train_ids, job.input);
    Architecture arch = cfg.network;
    arch.kind = job.kind;
    arch.input_channels = static_cast<std::size_t>(data.front().input.cols());
    const auto tag = static_cast<std::uint64_t>(job.variant);
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(slot.seed, {static_cast<std::uint64_t>(bw), tag, 1});
    TrainResult tr = train(Network::initialized(arch, derive_seed(slot.seed, {static_cast<std::uint64_t>(bw), tag})),
                           data, tc);
    logger()->info("rep {} {} MHz {}: trained, final loss {:.4f}", slot.repetition, bw, variant_name(job.variant),
                   tr.loss_history.back());
    job.network = std::move(tr.network);
    job.loss = std::move(tr.loss_history);
  });

  std::vector<RepetitionResult> runs(slots.size());
  parallel_for(slots.size(), cfg.threads, [&](std::size_t s) {
    const RunSlot& slot = slots[s];
    const auto& samples = inputs[slot.bandwidth_index];
    const std::set<std::uint32_t> train_ids(slot.split->train.begin(), slot.split->train.end());
    const std::set<std::uint32_t> test_ids(slot.split->test.begin(), slot.split->test.end());
    RepetitionResult& out = runs[s];
    out.repetition = slot.repetition;
    out.seed = slot.seed;
    out.bandwidth_mhz = cfg.bandwidths[slot.bandwidth_index];
    const std::uint64_t grid_seed = derive_seed(slot.seed, {static_cast<std::uint64_t>(out.bandwidth_mhz), 0x9d});
    for (const ModelJob& job : jobs) {
      if (job.run != s) continue;
      const std::vector<Prediction> test = network_predictions(job.network, samples, test_ids, job.input);
      if (job.variant == Variant::Baseline) {
        out.variants.push_back({Variant::Baseline, fuse_and_evaluate(test, truth, data.antenna_count)});
        continue;
      }
      const std::vector<Prediction> train = network_predictions(job.network, samples, train_ids, job.input);
      SvmStage stage = svm_stage(train, test, truth, cfg, grid_seed);
      if (job.variant == Variant::NoDoppler) {
        out.variants.push_back({Variant::NoDoppler, fuse_and_evaluate(stage.test, truth, data.antenna_count)});
        out.no_doppler_grid = std::move(stage.grid);
        continue;
      }
      out.variants.push_back({Variant::Ibis, fuse_and_evaluate(stage.test, truth, data.antenna_count)});
      if (options.no_svm) out.variants.push_back({Variant::NoSvm, fuse_and_evaluate(test, truth, data.antenna_count)});
      if (options.antenna_sweep)
        for (int k : cfg.antenna_counts) out.antenna_sweep.emplace_back(k, fuse_and_evaluate(stage.test, truth, k));
      out.grid = std::move(stage.grid);
      out.hybrid_loss = job.loss;
      out.predictions = std::move(stage.test);
    }
    logger()->info("rep {} {} MHz: ibis accuracy {:.2f}%", out.repetition, out.bandwidth_mhz,
                   out.variants.front().evaluation.metrics.accuracy);
  });

  ExperimentReport report;
  report.seed = cfg.seed;
  report.repetitions = cfg.repetitions;
  for (std::size_t b = 0; b < cfg.bandwidths.size(); ++b) {
    BandwidthSummary summary;
    summary.bandwidth_mhz = cfg.bandwidths[b];
    for (Variant v : {Variant::Ibis, Variant::Baseline, Variant::NoSvm, Variant::NoDoppler}) {
      std::vector<MetricsReport> reports;
      ConfusionMatrix total;
      for (const RepetitionResult& run : runs) {
        if (run.bandwidth_mhz != summary.bandwidth_mhz) continue;
        for (const VariantOutcome& o : run.variants) {
          if (o.variant != v) continue;
          reports.push_back(o.evaluation.metrics);
          for (int i = 0; i < kNumClasses; ++i)
            for (int j = 0; j < kNumClasses; ++j) total.counts[i][j] += o.evaluation.confusion.counts[i][j];
        }
      }
      if (reports.empty()) continue;
      summary.variants.emplace_back(v, mean_report(reports));
      summary.confusion.emplace_back(v, total);
    }
    if (options.antenna_sweep) {
      for (std::size_t c = 0; c < cfg.antenna_counts.size(); ++c) {
        std::vector<MetricsReport> reports;
        for (const RepetitionResult& run : runs)
          if (run.bandwidth_mhz == summary.bandwidth_mhz) reports.push_back(run.antenna_sweep[c].second.metrics);
        summary.antenna_sweep.emplace_back(cfg.antenna_counts[c], mean_report(reports));
      }
    }
    report.bandwidths.push_back(std::move(summary));
  }
  report.runs = std::move(runs);
  return report;
}

ExperimentReport run_study(const SampleSource& source, const PipelineConfig& cfg, const StudyOptions& options) {
  validate(cfg);
  logger()->info("preparing inputs for {} samples", source.count);
  return run_study(prepare_inputs(source, cfg), cfg, options);
}

ExperimentReport run_experiment(const SampleSource& source, const PipelineConfig& cfg) {
  return run_study(source, cfg, {});
}

ExperimentReport ablate(AblationKind kind, const SampleSource& source, const PipelineConfig& cfg) {
  StudyOptions options;
  options.baseline = false;
  options.no_svm = kind == AblationKind::NoSvm;
  options.no_doppler = kind == AblationKind::NoDoppler;
  ExperimentReport report = run_study(source, cfg, options);
  report.kind = kind == AblationKind::NoSvm ? "ablation:no_svm" : "ablation:no_doppler";
  return report;
}

ExperimentReport antenna_sweep(const SampleSource& source, const PipelineConfig& cfg, std::span<const int> counts) {
  PipelineConfig c = cfg;
  c.antenna_counts.assign(counts.begin(), counts.end());
  require(!c.antenna_counts.empty(), ErrorKind::EmptySelection, "no antenna counts given");
  StudyOptions options;
  options.baseline = false;
  options.no_svm = false;
  options.antenna_sweep = true;
  ExperimentReport report = run_study(source, c, options);
  report.kind = "antenna_sweep";
  return report;
}

}  // namespace ibis
