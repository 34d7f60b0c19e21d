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

#include "ibis/artifacts.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "ibis/binary_io.hpp"
#include "ibis/dopp_file.hpp"
#include "ibis/error.hpp"

namespace ibis {

namespace {

using nlohmann::json;

json metrics_json(const MetricsReport& m) {
  json per_class = json::object();
  for (int k = 0; k < kNumClasses; ++k) {
    const ClassMetrics& c = m.per_class[k];
    per_class[std::string(label_name(label_from_code(k)))] = {
        {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
  }
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"per_class", per_class}};
}

json confusion_json(const ConfusionMatrix& cm) { return cm.counts; }

json grid_json(const GridSearchResult& g) {
  json surface = json::array();
  for (const GridCell& c : g.surface)
    surface.push_back(
        {{"kernel", kernel_name(c.hyper.kernel)}, {"C", c.hyper.C}, {"gamma", c.hyper.gamma}, {"accuracy", c.accuracy}});
  return {{"cv_folds", g.cv_folds},
          {"best", {{"kernel", kernel_name(g.best.kernel)}, {"C", g.best.C}, {"gamma", g.best.gamma}}},
          {"best_accuracy", g.best_accuracy},
          {"surface", surface}};
}

}  // namespace

std::string report_json(const ExperimentReport& report) {
  json doc;
  doc["kind"] = report.kind;
  doc["seed"] = report.seed;
  doc["repetitions"] = report.repetitions;
  doc["bandwidths"] = json::array();
  for (const BandwidthSummary& b : report.bandwidths) {
    json entry = {{"bandwidth_mhz", b.bandwidth_mhz}};
    for (const auto& [v, m] : b.variants) entry["mean"][std::string(variant_name(v))] = metrics_json(m);
    for (const auto& [v, cm] : b.confusion) entry["confusion"][std::string(variant_name(v))] = confusion_json(cm);
    if (!b.antenna_sweep.empty()) {
      entry["antenna_sweep"] = json::array();
      for (const auto& [k, m] : b.antenna_sweep) entry["antenna_sweep"].push_back({{"antennas", k}, {"metrics", metrics_json(m)}});
    }
    doc["bandwidths"].push_back(std::move(entry));
  }
  doc["runs"] = json::array();
  for (const RepetitionResult& r : report.runs) {
    json run = {{"repetition", r.repetition}, {"seed", r.seed}, {"bandwidth_mhz", r.bandwidth_mhz}};
    for (const VariantOutcome& o : r.variants) {
      run["variants"][std::string(variant_name(o.variant))] = {{"metrics", metrics_json(o.evaluation.metrics)},
                                                                {"confusion", confusion_json(o.evaluation.confusion)}};
    }
    if (r.grid) run["grid_search"] = grid_json(*r.grid);
    if (r.no_doppler_grid) run["no_doppler_grid_search"] = grid_json(*r.no_doppler_grid);
    if (!r.antenna_sweep.empty()) {
      run["antenna_sweep"] = json::array();
      for (const auto& [k, e] : r.antenna_sweep) run["antenna_sweep"].push_back({{"antennas", k}, {"accuracy", e.metrics.accuracy}});
    }
    run["loss_history"] = r.hybrid_loss;
    doc["runs"].push_back(std::move(run));
  }
  return doc.dump(2) + "\n";
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "true\\predicted";
  for (int k = 0; k < kNumClasses; ++k) out += fmt::format(",{}", label_name(label_from_code(k)));
  out += "\n";
  for (int i = 0; i < kNumClasses; ++i) {
    out += label_name(label_from_code(i));
    for (int j = 0; j < kNumClasses; ++j) out += fmt::format(",{}", cm.counts[i][j]);
    out += "\n";
  }
  return out;
}

std::string runs_csv(const ExperimentReport& report) {
  std::string out = "repetition,seed,bandwidth_mhz,variant,accuracy,precision,recall,f1\n";
  for (const RepetitionResult& r : report.runs)
    for (const VariantOutcome& o : r.variants) {
      const MetricsReport& m = o.evaluation.metrics;
      out += fmt::format("{},{},{},{},{:.4f},{:.4f},{:.4f},{:.4f}\n", r.repetition, r.seed, r.bandwidth_mhz,
                         variant_name(o.variant), m.accuracy, m.precision, m.recall, m.f1);
    }
  return out;
}

std::optional<ReferenceAccuracy> reference_accuracy(int bandwidth_mhz) {
  static constexpr std::array<ReferenceAccuracy, 3> kTable{{{20, 73.22, 89.27}, {40, 86.48, 94.13}, {80, 88.17, 95.13}}};
  for (const ReferenceAccuracy& r : kTable)
    if (r.bandwidth_mhz == bandwidth_mhz) return r;
  return std::nullopt;
}

std::string comparison_csv(const ExperimentReport& report) {
  std::string out = "bandwidth_mhz,variant,reference,measured,delta,within_3pp\n";
  for (const BandwidthSummary& b : report.bandwidths) {
    const auto ref = reference_accuracy(b.bandwidth_mhz);
    if (!ref) continue;
    for (auto [v, expected] : {std::pair{Variant::Baseline, ref->baseline}, std::pair{Variant::Ibis, ref->ibis}}) {
      const MetricsReport* m = b.find(v);
      if (!m) continue;
      const double delta = m->accuracy - expected;
      out += fmt::format("{},{},{:.2f},{:.2f},{:+.2f},{}\n", b.bandwidth_mhz, variant_name(v), expected, m->accuracy,
                         delta, std::abs(delta) <= 3.0 ? "yes" : "no");
    }
  }
  return out;
}

std::string run_directory_name(const RunConfig& cfg) { return fmt::format("{}-seed{}", config_hash(cfg), cfg.seed); }

void write_report(const std::filesystem::path& dir, const ExperimentReport& report, const RunConfig& cfg,
                  bool comparison) {
  write_text_file(dir / "report.json", report_json(report));
  write_text_file(dir / "resolved_config.json", resolved_config_json(cfg));
  write_text_file(dir / "runs.csv", runs_csv(report));
  for (const BandwidthSummary& b : report.bandwidths)
    for (const auto& [v, cm] : b.confusion)
      write_text_file(dir / fmt::format("confusion_{}_{}.csv", b.bandwidth_mhz, variant_name(v)), confusion_csv(cm));
  if (comparison) write_text_file(dir / "comparison.csv", comparison_csv(report));
}

void write_example_spectrograms(const std::filesystem::path& dir, const PreparedData& data) {
  for (std::size_t b = 0; b < data.bandwidths.size(); ++b) {
    std::array<bool, kNumClasses> done{};
    for (const SampleInputs& s : data.inputs[b]) {
      if (done[s.label] || s.antennas.empty()) continue;
      done[s.label] = true;
      write_file(dir / fmt::format("spectrogram_{}_{}.pgm", data.bandwidths[b], label_name(label_from_code(s.label))),
                 render_pgm(s.antennas.front().trace));
    }
  }
}

}  // namespace ibis
