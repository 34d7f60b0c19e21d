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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <unistd.h>

#include <json.hpp>

#include "ibis/artifacts.hpp"
#include "ibis/error.hpp"
#include "ibis/pipeline.hpp"

using namespace ibis;
namespace fs = std::filesystem;

namespace {

Prediction pred(std::uint32_t id, int antenna, int label, double p) {
  Prediction out;
  out.sample_id = id;
  out.antenna_id = antenna;
  out.label = label_from_code(label);
  out.probabilities.fill((1.0 - p) / 4.0);
  out.probabilities[label] = p;
  return out;
}

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no ibis::Error thrown");
  return ErrorKind::IoError;
}

SynthConfig tiny_synth() {
  SynthConfig s;
  s.bandwidth_mhz = 20;
  s.antenna_count = 2;
  s.samples_per_class = 4;
  s.seed = 11;
  return s;
}

PipelineConfig tiny_pipeline() {
  PipelineConfig p;
  p.seed = 11;
  p.repetitions = 1;
  p.bandwidths = {20};
  p.network.filters = 4;
  p.network.pool_filters = 4;
  p.network.hidden = 6;
  p.train.epochs = 3;
  p.train.batch_size = 8;
  p.train.learning_rate = 5e-3;
  p.grid.kernels = {KernelKind::Rbf};
  p.grid.C = {1.0};
  p.grid.gamma = {1.0};
  p.cv_folds = 2;
  p.antenna_counts = {1, 2};
  return p;
}

}  // namespace

TEST_CASE("majority vote") {
  const std::vector<Prediction> clear{pred(1, 0, 2, 0.6), pred(1, 1, 2, 0.5), pred(1, 2, 4, 0.9)};
  CHECK(majority_vote(clear) == ActivityLabel::Walking);
  // two-two tie: larger summed mass wins
  const std::vector<Prediction> tie{pred(3, 0, 1, 0.9), pred(3, 1, 3, 0.7), pred(3, 2, 1, 0.4), pred(3, 3, 3, 0.7)};
  CHECK(majority_vote(tie) == ActivityLabel::Running);
  // identical masses: smaller code
  const std::vector<Prediction> flat{pred(3, 0, 4, 0.5), pred(3, 1, 0, 0.5)};
  CHECK(majority_vote(flat) == ActivityLabel::Empty);
  CHECK(majority_vote(std::vector<Prediction>{pred(9, 0, 3, 0.3)}) == ActivityLabel::Running);

  CHECK(kind_of([] { majority_vote(std::vector<Prediction>{}); }) == ErrorKind::EmptyInput);
  CHECK(kind_of([] { majority_vote(std::vector<Prediction>{pred(1, 0, 1, 0.5), pred(2, 1, 1, 0.5)}); }) ==
        ErrorKind::MixedSampleIds);
}

TEST_CASE("majority vote is permutation invariant") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> lab(0, 4);
  std::uniform_real_distribution<double> p(0.2, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<Prediction> v;
    const int n = 1 + rep % 6;
    for (int a = 0; a < n; ++a) v.push_back(pred(7, a, lab(rng), p(rng)));
    const ActivityLabel ref = majority_vote(v);
    for (int s = 0; s < 5; ++s) {
      std::shuffle(v.begin(), v.end(), rng);
      CHECK(majority_vote(v) == ref);
    }
  }
}

TEST_CASE("evaluate small example") {
  const std::vector<int> truth{0, 0, 1, 1}, predicted{0, 1, 1, 1};
  const Evaluation ev = evaluate(truth, predicted);
  CHECK(ev.confusion.total() == 4);
  CHECK(ev.confusion.correct() == 3);
  CHECK(ev.confusion.counts[0][1] == 1);
  CHECK(ev.metrics.accuracy == doctest::Approx(75.0));
  CHECK(ev.metrics.per_class[0].precision == doctest::Approx(100.0));
  CHECK(ev.metrics.per_class[0].recall == doctest::Approx(50.0));
  CHECK(ev.metrics.per_class[1].precision == doctest::Approx(200.0 / 3.0));
  CHECK(ev.metrics.per_class[1].recall == doctest::Approx(100.0));
  CHECK(ev.metrics.per_class[1].f1 == doctest::Approx(80.0));
  // absent classes count as zero in the macro average
  CHECK(ev.metrics.precision == doctest::Approx((100.0 + 200.0 / 3.0) / 5.0));
  CHECK(ev.metrics.recall == doctest::Approx(150.0 / 5.0));
  for (int c = 2; c < 5; ++c) CHECK(ev.metrics.per_class[c].f1 == 0.0);

  CHECK(kind_of([] { evaluate(std::vector<int>{0, 1}, std::vector<int>{0}); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("perfect predictions give 100 everywhere for present classes") {
  std::vector<int> y;
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < 3; ++i) y.push_back(c);
  const MetricsReport m = evaluate(y, y).metrics;
  CHECK(m.accuracy == 100.0);
  CHECK(m.precision == doctest::Approx(100.0));
  CHECK(m.recall == doctest::Approx(100.0));
  CHECK(m.f1 == doctest::Approx(100.0));
  CHECK(metrics_from(evaluate(y, y).confusion).f1 == m.f1);
}

TEST_CASE("metrics stay in range on random confusions") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> lab(0, 4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> t(20), p(20);
    for (int i = 0; i < 20; ++i) {
      t[i] = lab(rng);
      p[i] = lab(rng);
    }
    const Evaluation ev = evaluate(t, p);
    long sum = 0;
    for (const auto& r : ev.confusion.counts)
      for (long v : r) sum += v;
    CHECK(sum == 20);
    for (double v : {ev.metrics.accuracy, ev.metrics.precision, ev.metrics.recall, ev.metrics.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 100.0);
    }
  }
}

TEST_CASE("mean_report is the field-wise mean") {
  MetricsReport a, b;
  a.accuracy = 90;
  a.precision = 80;
  a.recall = 70;
  a.f1 = 60;
  a.per_class[2].recall = 50;
  b.accuracy = 70;
  b.precision = 60;
  b.recall = 50;
  b.f1 = 40;
  b.per_class[2].recall = 100;
  const std::vector<MetricsReport> both{a, b};
  const MetricsReport m = mean_report(both);
  CHECK(m.accuracy == 80.0);
  CHECK(m.precision == 70.0);
  CHECK(m.recall == 60.0);
  CHECK(m.f1 == 50.0);
  CHECK(m.per_class[2].recall == 75.0);
}

TEST_CASE("stratified split") {
  std::vector<SampleMeta> meta;
  for (std::uint32_t i = 0; i < 50; ++i) meta.push_back({i, static_cast<int>(i / 10)});
  const SampleSplit s = stratified_split(meta, 0.7, 3);
  CHECK(s.train.size() == 35);
  CHECK(s.test.size() == 15);
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));
  CHECK(std::is_sorted(s.test.begin(), s.test.end()));
  std::set<std::uint32_t> all(s.train.begin(), s.train.end());
  for (auto id : s.test) CHECK(all.insert(id).second);
  CHECK(all.size() == 50);
  for (int c = 0; c < 5; ++c)
    CHECK(std::count_if(s.train.begin(), s.train.end(), [&](auto id) { return static_cast<int>(id / 10) == c; }) == 7);

  const SampleSplit again = stratified_split(meta, 0.7, 3);
  CHECK(again.train == s.train);
  std::vector<SampleMeta> rev(meta.rbegin(), meta.rend());
  CHECK(stratified_split(rev, 0.7, 3).train == s.train);
  CHECK(stratified_split(meta, 0.7, 4).train != s.train);

  // two samples of a class: one each side
  const std::vector<SampleMeta> pair{{0, 1}, {1, 1}};
  for (double f : {0.05, 0.95}) {
    const SampleSplit p = stratified_split(pair, f, 1);
    CHECK(p.train.size() == 1);
    CHECK(p.test.size() == 1);
  }
}

TEST_CASE("phase sequence averages per window") {
  PhaseMatrix pm;
  pm.num_frames = 1800;
  pm.packet_rate_hz = 400.0;
  pm.active_indices = {1, 2};
  for (std::size_t f = 0; f < pm.num_frames; ++f) {
    pm.values.push_back(static_cast<double>(f));
    pm.values.push_back(3.0);
  }
  const DopplerConfig dc;
  const Sequence s = phase_sequence(pm, dc);
  CHECK(s.rows() == 53);
  CHECK(s.cols() == 2);
  CHECK(s(0, 0) == doctest::Approx(63.5));
  CHECK(s(1, 0) == doctest::Approx(95.5));
  CHECK(s(52, 1) == doctest::Approx(3.0));
  pm.num_frames = 1000;
  pm.values.resize(2000);
  CHECK(kind_of([&] { phase_sequence(pm, dc); }) == ErrorKind::SignalTooShort);
}

TEST_CASE("prepared inputs have trace-aligned shapes") {
  const SynthConfig sc = tiny_synth();
  PipelineConfig pc = tiny_pipeline();
  pc.bandwidths = {20};
  const PreparedData d = prepare_inputs(synthetic_source(sc), pc);
  CHECK(d.antenna_count == 2);
  CHECK(d.samples.size() == 20);
  REQUIRE(d.inputs.size() == 1);
  for (const SampleInputs& s : d.inputs[0]) {
    REQUIRE(s.antennas.size() == 2);
    for (const AntennaInput& a : s.antennas) {
      CHECK(a.doppler.rows() == 53);
      CHECK(a.doppler.cols() == 81);
      CHECK(a.phase.rows() == 53);
      CHECK(a.phase.cols() == 56);
    }
  }
}

TEST_CASE("study is deterministic and reports every variant") {
  const SynthConfig sc = tiny_synth();
  const PipelineConfig pc = tiny_pipeline();
  const SampleSource src = synthetic_source(sc);
  const ExperimentReport a = run_experiment(src, pc);
  CHECK(a.kind == "experiment");
  REQUIRE(a.bandwidths.size() == 1);
  CHECK(a.bandwidths[0].bandwidth_mhz == 20);
  CHECK(a.bandwidths[0].find(Variant::Ibis) != nullptr);
  CHECK(a.bandwidths[0].find(Variant::Baseline) != nullptr);
  CHECK(a.bandwidths[0].find(Variant::NoSvm) != nullptr);
  REQUIRE(a.runs.size() == 1);
  CHECK(a.runs[0].hybrid_loss.size() == 3);
  CHECK(a.runs[0].grid.has_value());

  PipelineConfig threaded = pc;
  threaded.threads = 3;
  const ExperimentReport b = run_experiment(src, threaded);
  CHECK(report_json(b) == report_json(a));
}

TEST_CASE("ablation and sweep metadata") {
  const SampleSource src = synthetic_source(tiny_synth());
  const PipelineConfig pc = tiny_pipeline();
  const ExperimentReport nd = ablate(AblationKind::NoDoppler, src, pc);
  CHECK(nd.kind == "ablation:no_doppler");
  CHECK(nd.bandwidths[0].find(Variant::NoDoppler) != nullptr);
  CHECK(nd.bandwidths[0].find(Variant::Baseline) == nullptr);
  CHECK(ablate(AblationKind::NoSvm, src, pc).kind == "ablation:no_svm");

  const std::vector<int> counts{1, 2};
  const ExperimentReport sw = antenna_sweep(src, pc, counts);
  CHECK(sw.kind == "antenna_sweep");
  REQUIRE(sw.bandwidths[0].antenna_sweep.size() == 2);
  CHECK(sw.bandwidths[0].antenna_sweep[0].first == 1);
  CHECK(sw.bandwidths[0].antenna_sweep[1].first == 2);

  CHECK(kind_of([&] { antenna_sweep(src, pc, std::vector<int>{0}); }) == ErrorKind::EmptySelection);
  CHECK(kind_of([&] { antenna_sweep(src, pc, std::vector<int>{3}); }) == ErrorKind::CountExceedsAntennas);
  CHECK(kind_of([&] { antenna_sweep(src, pc, std::vector<int>{}); }) == ErrorKind::EmptySelection);
}

TEST_CASE("report artifacts") {
  RunConfig cfg;
  cfg.synth = tiny_synth();
  cfg.pipeline = tiny_pipeline();
  const ExperimentReport r = run_experiment(synthetic_source(cfg.synth), cfg.pipeline);
  const fs::path dir = fs::temp_directory_path() / ("ibis_artifacts_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  write_report(dir, r, cfg, true);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "resolved_config.json"));
  CHECK(fs::exists(dir / "runs.csv"));
  CHECK(fs::exists(dir / "comparison.csv"));
  CHECK(fs::exists(dir / "confusion_20_ibis.csv"));
  std::ifstream in(dir / "report.json");
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc.at("kind") == "experiment");

  const std::string runs = runs_csv(r);
  CHECK(std::count(runs.begin(), runs.end(), '\n') == 4);  // header + 3 variants
  const std::string cm = confusion_csv(r.bandwidths[0].confusion.front().second);
  CHECK(std::count(cm.begin(), cm.end(), '\n') == 6);

  CHECK(reference_accuracy(80).has_value());
  CHECK_FALSE(reference_accuracy(160).has_value());

  const std::string name = run_directory_name(cfg);
  CHECK(name.ends_with("-seed" + std::to_string(cfg.seed)));
  RunConfig other = cfg;
  other.pipeline.train.epochs = 4;
  CHECK(run_directory_name(other) != name);
  fs::remove_all(dir);
}
