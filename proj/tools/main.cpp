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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ibis/artifacts.hpp"
#include "ibis/checkpoint.hpp"
#include "ibis/config.hpp"
#include "ibis/csif.hpp"
#include "ibis/dopp_file.hpp"
#include "ibis/error.hpp"
#include "ibis/log.hpp"
#include "ibis/pipeline.hpp"
#include "ibis/sanitizer.hpp"
#include "ibis/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ibis;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

// Flags shared by the run-style subcommands.
struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string data;
  std::string bandwidth;
  std::optional<int> threads;
  std::optional<int> reflection_factor;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "overrides the configuration seed");
    app->add_option("--data", data, "CSIF dataset; synthetic data from the config when omitted")
        ->check(CLI::ExistingFile);
    app->add_option("--bandwidth", bandwidth, "20, 40, 80 or all")
        ->check(CLI::IsMember({"20", "40", "80", "all"}));
    app->add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
    app->add_option("--reflection-factor", reflection_factor, "1 or 2")->check(CLI::IsMember({1, 2}));
  }

  /// Config file, then flags.
  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? parse_config("{}") : load_config(config);
    if (seed) {
      cfg.seed = *seed;
      cfg.synth.seed = *seed;
      cfg.pipeline.seed = *seed;
    }
    if (!data.empty()) cfg.data = data;
    if (bandwidth == "all")
      cfg.pipeline.bandwidths = {20, 40, 80};
    else if (!bandwidth.empty())
      cfg.pipeline.bandwidths = {std::stoi(bandwidth)};
    if (threads) cfg.pipeline.threads = *threads;
    if (reflection_factor) {
      cfg.pipeline.doppler.reflection_factor = *reflection_factor;
      cfg.synth.reflection_factor = *reflection_factor;
    }
    validate(cfg);
    return cfg;
  }
};

SampleSource source_for(const RunConfig& cfg) {
  if (cfg.data) return csif_source(*cfg.data);
  logger()->info("rendering synthetic samples ({} per class)", cfg.synth.samples_per_class);
  return synthetic_source(cfg.synth);
}

int single_bandwidth(const RunConfig& cfg) {
  require(cfg.pipeline.bandwidths.size() == 1, ErrorKind::InvariantViolation,
          "this subcommand needs exactly one bandwidth (--bandwidth 20|40|80)");
  return cfg.pipeline.bandwidths.front();
}

CsiRecording pick_recording(const fs::path& path, std::optional<std::uint32_t> sample, int antenna) {
  const CsifFile file(path);
  require(file.size() > 0, ErrorKind::EmptyInput, "dataset has no samples");
  std::size_t index = 0;
  if (sample) {
    index = file.size();
    for (std::size_t i = 0; i < file.size(); ++i)
      if (file.sample_id(i) == *sample) index = i;
    require(index < file.size(), ErrorKind::EmptySelection, fmt::format("no sample with id {}", *sample));
  }
  require(antenna >= 0 && antenna < file.antenna_count(), ErrorKind::CountExceedsAntennas,
          fmt::format("antenna {} not in 0..{}", antenna, file.antenna_count() - 1));
  return std::move(file.read(index).recordings[static_cast<std::size_t>(antenna)]);
}

json inspect_file(const fs::path& path) {
  const Bytes bytes = read_file(path);
  const std::string magic(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(4, bytes.size())));
  if (magic == "CSIF") {
    const CsiDataset ds = parse_csif(bytes);
    std::map<std::string, int> labels;
    std::set<int> bandwidths;
    std::set<std::size_t> frames;
    for (const CsiSample& s : ds.samples) {
      const CsiRecording& r = s.recordings.front();
      ++labels[r.label ? std::string(label_name(*r.label)) : "unlabeled"];
      bandwidths.insert(r.layout.bandwidth_mhz);
      frames.insert(r.num_frames());
    }
    return {{"format", "CSIF"},   {"version", kCsifVersion},       {"antenna_count", ds.antenna_count},
            {"samples", ds.samples.size()}, {"bandwidth_mhz", bandwidths}, {"num_frames", frames},
            {"labels", labels},   {"errors", 0}};
  }
  if (magic == "DOPP") {
    const DopplerTrace t = parse_dopp(bytes);
    return {{"format", "DOPP"},
            {"version", kDoppVersion},
            {"time_bins", t.time_bins},
            {"velocity_bins", t.velocity_bins},
            {"duration_s", t.duration_s},
            {"velocity_min", t.velocity_min},
            {"velocity_max", t.velocity_max},
            {"label", t.label ? json(label_name(*t.label)) : json(nullptr)},
            {"antenna_id", t.antenna_id},
            {"errors", 0}};
  }
  if (magic == "IBN1") {
    const Checkpoint cp = parse_checkpoint(bytes);
    json out = {{"format", "IBN1"},
                {"model", cp.network.arch().kind == ModelKind::Hybrid ? "hybrid" : "inception_only"},
                {"input_channels", cp.network.arch().input_channels},
                {"parameters", cp.network.params().size()},
                {"errors", 0}};
    if (cp.svm)
      out["svm"] = {{"kernel", kernel_name(cp.svm->hyper.kernel)},
                    {"C", cp.svm->hyper.C},
                    {"gamma", cp.svm->hyper.gamma},
                    {"pairs", cp.svm->pairs.size()}};
    return out;
  }
  fail(ErrorKind::BadMagic, path.string() + ": unrecognised file type");
}

struct TrainedStage {
  std::vector<SampleInputs> inputs;
  SampleSplit split;
};

TrainedStage stage_inputs(const RunConfig& cfg, int bw) {
  PipelineConfig pc = cfg.pipeline;
  pc.bandwidths = {bw};
  PreparedData data = prepare_inputs(source_for(cfg), pc);
  TrainedStage st;
  st.split = stratified_split(data.samples, cfg.pipeline.train_fraction, cfg.seed);
  st.inputs = std::move(data.inputs.front());
  return st;
}

void collect(const TrainedStage& st, bool train_side, std::vector<LabeledSequence>* seqs,
             std::vector<std::pair<std::uint32_t, int>>* ids) {
  const auto& side = train_side ? st.split.train : st.split.test;
  const std::set<std::uint32_t> wanted(side.begin(), side.end());
  for (const SampleInputs& s : st.inputs) {
    if (!wanted.contains(s.sample_id)) continue;
    for (const AntennaInput& a : s.antennas) {
      seqs->push_back({a.doppler, s.label, (static_cast<std::uint64_t>(s.sample_id) << 8) | a.antenna_id});
      if (ids) ids->emplace_back(s.sample_id, a.antenna_id);
    }
  }
}

FeatureMatrix probability_features(const Network& net, const std::vector<LabeledSequence>& seqs, int threads,
                                   std::vector<int>* labels) {
  std::vector<Sequence> xs;
  for (const LabeledSequence& s : seqs) {
    xs.push_back(s.input);
    labels->push_back(s.label);
  }
  FeatureMatrix X;
  X.cols = kNumClasses;
  for (const Probabilities& p : predict_proba(net, xs, threads)) X.push_back(p);
  return X;
}

void print_summary(const ExperimentReport& report) {
  for (const BandwidthSummary& b : report.bandwidths) {
    std::string line = fmt::format("{:>3} MHz", b.bandwidth_mhz);
    for (const auto& [v, m] : b.variants) line += fmt::format("  {} {:.2f}%", variant_name(v), m.accuracy);
    for (const auto& [k, m] : b.antenna_sweep) line += fmt::format("  k={} {:.2f}%", k, m.accuracy);
    std::cout << line << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wi-Fi CSI activity recognition toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // synth
  RunFlags synth_flags;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic CSIF dataset");
  synth_flags.attach(synth);
  synth->add_option("--out", synth_out, "output CSIF path")->required();
  std::optional<int> synth_per_class, synth_antennas;
  std::string synth_snr;
  synth->add_option("--samples-per-class", synth_per_class, "samples of each activity")->check(CLI::PositiveNumber);
  synth->add_option("--antennas", synth_antennas, "receive antennas")->check(CLI::PositiveNumber);
  synth->add_option("--snr-db", synth_snr, "noise level in dB, or inf for none");

  // sanitize
  std::string san_in, san_out;
  std::optional<std::uint32_t> san_sample;
  int san_antenna = 0;
  double san_lambda = kDefaultLassoLambda;
  auto* sanitize = app.add_subcommand("sanitize", "write the sanitised phase of one recording as CSV");
  sanitize->add_option("--in", san_in, "CSIF input")->required()->check(CLI::ExistingFile);
  sanitize->add_option("--out", san_out, "CSV output")->required();
  sanitize->add_option("--sample", san_sample, "sample id (default: first)");
  sanitize->add_option("--antenna", san_antenna, "antenna index");
  sanitize->add_option("--lambda", san_lambda, "LASSO penalty");

  // doppler
  RunFlags dop_flags;
  std::string dop_in, dop_out, dop_pgm, dop_csv;
  std::optional<std::uint32_t> dop_sample;
  int dop_antenna = 0;
  auto* doppler = app.add_subcommand("doppler", "Doppler trace of one recording");
  dop_flags.attach(doppler);
  doppler->add_option("--in", dop_in, "CSIF input")->required()->check(CLI::ExistingFile);
  doppler->add_option("--out", dop_out, "DOPP output")->required();
  doppler->add_option("--pgm", dop_pgm, "optional PGM image");
  doppler->add_option("--csv", dop_csv, "optional CSV dump");
  doppler->add_option("--sample", dop_sample, "sample id (default: first)");
  doppler->add_option("--antenna", dop_antenna, "antenna index");

  // train
  RunFlags train_flags;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "train the hybrid network and its SVM on the training split");
  train_flags.attach(train_cmd);
  train_cmd->add_option("--out", train_out, "checkpoint path")->required();

  // gridsearch
  RunFlags grid_flags;
  std::string grid_model, grid_out;
  auto* grid_cmd = app.add_subcommand("gridsearch", "SVM grid search on a trained network's training-set outputs");
  grid_flags.attach(grid_cmd);
  grid_cmd->add_option("--model", grid_model, "checkpoint")->required()->check(CLI::ExistingFile);
  grid_cmd->add_option("--out", grid_out, "JSON output")->required();

  // eval
  RunFlags eval_flags;
  std::string eval_model, eval_out;
  bool eval_all = false;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  eval_flags.attach(eval_cmd);
  eval_cmd->add_option("--model", eval_model, "checkpoint")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "JSON output")->required();
  eval_cmd->add_flag("--all-samples", eval_all, "evaluate every sample, not only the test split");

  // experiment / ablate / sweep-antennas
  RunFlags exp_flags;
  std::string exp_out;
  auto* experiment = app.add_subcommand("experiment", "full pipeline with baseline over the configured bandwidths");
  exp_flags.attach(experiment);
  experiment->add_option("--out", exp_out, "results directory")->required();

  RunFlags abl_flags;
  std::string abl_out, abl_kind;
  auto* ablate_cmd = app.add_subcommand("ablate", "pipeline with one component removed");
  abl_flags.attach(ablate_cmd);
  ablate_cmd->add_option("--kind", abl_kind, "no_doppler or no_svm")
      ->required()
      ->check(CLI::IsMember({"no_doppler", "no_svm"}));
  ablate_cmd->add_option("--out", abl_out, "results directory")->required();

  RunFlags sweep_flags;
  std::string sweep_out;
  std::vector<int> sweep_counts;
  auto* sweep = app.add_subcommand("sweep-antennas", "accuracy against the number of fused antennas");
  sweep_flags.attach(sweep);
  sweep->add_option("--counts", sweep_counts, "antenna counts (default from config)")->delimiter(',');
  sweep->add_option("--out", sweep_out, "results directory")->required();

  // inspect
  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "validate a CSIF, DOPP or checkpoint file and print its header");
  inspect->add_option("path", inspect_path, "file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (*synth) {
      RunConfig cfg = synth_flags.resolve();
      require(!cfg.data, ErrorKind::InvariantViolation, "synth does not read --data");
      if (!synth_flags.bandwidth.empty()) cfg.synth.bandwidth_mhz = single_bandwidth(cfg);
      if (synth_per_class) cfg.synth.samples_per_class = *synth_per_class;
      if (synth_antennas) cfg.synth.antenna_count = *synth_antennas;
      if (!synth_snr.empty()) {
        try {
          cfg.synth.snr_db = synth_snr == "inf" ? kNoNoise : std::stod(synth_snr);
        } catch (const std::logic_error&) {
          fail(ErrorKind::InvariantViolation, "--snr-db must be a number or inf");
        }
      }
      validate(cfg.synth);
      const SampleSource src = synthetic_source(cfg.synth);
      save_csif_streamed(synth_out, src.count, src.antenna_count, src.fetch);
      std::cout << synth_out << "\n";
    } else if (*sanitize) {
      const PhaseMatrix pm = sanitize_recording(pick_recording(san_in, san_sample, san_antenna), san_lambda);
      std::string csv = "frame";
      for (int idx : pm.active_indices) csv += fmt::format(",sc{}", idx);
      csv += "\n";
      for (std::size_t f = 0; f < pm.num_frames; ++f) {
        csv += std::to_string(f);
        for (double v : pm.row(f)) csv += fmt::format(",{:.9g}", v);
        csv += "\n";
      }
      write_text_file(san_out, csv);
    } else if (*doppler) {
      RunConfig cfg = dop_flags.resolve();
      CsiRecording rec = pick_recording(dop_in, dop_sample, dop_antenna);
      if (!dop_flags.bandwidth.empty()) rec = extract_subband(rec, single_bandwidth(cfg));
      DopplerConfig dc = cfg.pipeline.doppler;
      if (!dop_flags.reflection_factor && dop_flags.config.empty()) dc.center_freq_hz = rec.center_freq_hz;
      DopplerTrace trace = doppler_trace(sanitize_recording(rec, cfg.pipeline.lasso_lambda), dc);
      trace.label = rec.label;
      trace.antenna_id = rec.antenna_id;
      save_dopp(dop_out, trace);
      if (!dop_pgm.empty()) write_file(dop_pgm, render_pgm(trace));
      if (!dop_csv.empty()) write_text_file(dop_csv, render_csv(trace));
    } else if (*train_cmd) {
      const RunConfig cfg = train_flags.resolve();
      const int bw = single_bandwidth(cfg);
      const TrainedStage st = stage_inputs(cfg, bw);
      std::vector<LabeledSequence> seqs;
      collect(st, true, &seqs, nullptr);
      Architecture arch = cfg.pipeline.network;
      arch.input_channels = static_cast<std::size_t>(seqs.front().input.cols());
      TrainConfig tc = cfg.pipeline.train;
      tc.seed = cfg.seed;
      const TrainResult tr = train(Network::initialized(arch, cfg.seed), seqs, tc);
      std::vector<int> labels;
      const FeatureMatrix X = probability_features(tr.network, seqs, cfg.pipeline.threads, &labels);
      const GridSearchResult grid =
          grid_search(X, labels, cfg.pipeline.grid, cfg.pipeline.cv_folds, cfg.seed, cfg.pipeline.threads, cfg.pipeline.smo);
      Checkpoint cp{tr.network, fit_multiclass(X, labels, grid.best, cfg.pipeline.smo)};
      save_checkpoint(train_out, cp);
      std::string loss = "epoch,loss\n";
      for (std::size_t e = 0; e < tr.loss_history.size(); ++e) loss += fmt::format("{},{:.9g}\n", e + 1, tr.loss_history[e]);
      write_text_file(fs::path(train_out).replace_extension(".loss.csv"), loss);
      std::cout << fmt::format("svm {} C={} gamma={} cv {:.2f}%\n", kernel_name(grid.best.kernel), grid.best.C,
                               grid.best.gamma, grid.best_accuracy);
    } else if (*grid_cmd) {
      const RunConfig cfg = grid_flags.resolve();
      const int bw = single_bandwidth(cfg);
      const Checkpoint cp = load_checkpoint(grid_model);
      const TrainedStage st = stage_inputs(cfg, bw);
      std::vector<LabeledSequence> seqs;
      collect(st, true, &seqs, nullptr);
      std::vector<int> labels;
      const FeatureMatrix X = probability_features(cp.network, seqs, cfg.pipeline.threads, &labels);
      const GridSearchResult grid =
          grid_search(X, labels, cfg.pipeline.grid, cfg.pipeline.cv_folds, cfg.seed, cfg.pipeline.threads, cfg.pipeline.smo);
      json surface = json::array();
      for (const GridCell& c : grid.surface)
        surface.push_back({{"kernel", kernel_name(c.hyper.kernel)}, {"C", c.hyper.C}, {"gamma", c.hyper.gamma},
                           {"accuracy", c.accuracy}});
      const json out = {{"bandwidth_mhz", bw},
                        {"cv_folds", grid.cv_folds},
                        {"best", {{"kernel", kernel_name(grid.best.kernel)}, {"C", grid.best.C}, {"gamma", grid.best.gamma}}},
                        {"best_accuracy", grid.best_accuracy},
                        {"surface", surface}};
      write_text_file(grid_out, out.dump(2) + "\n");
      std::cout << fmt::format("best {} C={} gamma={} {:.2f}%\n", kernel_name(grid.best.kernel), grid.best.C,
                               grid.best.gamma, grid.best_accuracy);
    } else if (*eval_cmd) {
      const RunConfig cfg = eval_flags.resolve();
      const int bw = single_bandwidth(cfg);
      const Checkpoint cp = load_checkpoint(eval_model);
      const TrainedStage st = stage_inputs(cfg, bw);
      std::vector<LabeledSequence> seqs;
      std::vector<std::pair<std::uint32_t, int>> ids;
      if (eval_all) collect(st, true, &seqs, &ids);
      collect(st, false, &seqs, &ids);
      std::vector<Sequence> xs;
      for (const auto& s : seqs) xs.push_back(s.input);
      const std::vector<Probabilities> probs = predict_proba(cp.network, xs, cfg.pipeline.threads);
      std::map<std::uint32_t, std::pair<int, std::vector<Prediction>>> by_sample;
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        const int label = cp.svm ? predict(*cp.svm, probs[i]).label
                                 : static_cast<int>(std::max_element(probs[i].begin(), probs[i].end()) - probs[i].begin());
        auto& slot = by_sample[ids[i].first];
        slot.first = seqs[i].label;
        slot.second.push_back({ids[i].first, ids[i].second, probs[i], label_from_code(label)});
      }
      std::vector<int> truth, pred;
      for (const auto& [id, slot] : by_sample) {
        truth.push_back(slot.first);
        pred.push_back(label_code(majority_vote(slot.second)));
      }
      const Evaluation ev = evaluate(truth, pred);
      const json out = {{"bandwidth_mhz", bw},
                        {"samples", truth.size()},
                        {"accuracy", ev.metrics.accuracy},
                        {"precision", ev.metrics.precision},
                        {"recall", ev.metrics.recall},
                        {"f1", ev.metrics.f1},
                        {"confusion", ev.confusion.counts}};
      write_text_file(eval_out, out.dump(2) + "\n");
      std::cout << fmt::format("accuracy {:.2f}% over {} samples\n", ev.metrics.accuracy, truth.size());
    } else if (*experiment || *ablate_cmd || *sweep) {
      RunFlags& flags = *experiment ? exp_flags : *ablate_cmd ? abl_flags : sweep_flags;
      const std::string& out_root = *experiment ? exp_out : *ablate_cmd ? abl_out : sweep_out;
      RunConfig cfg = flags.resolve();
      if (*sweep && !sweep_counts.empty()) cfg.pipeline.antenna_counts = sweep_counts;
      const SampleSource src = source_for(cfg);
      ExperimentReport report;
      std::optional<PreparedData> prepared;
      if (*experiment) {
        prepared = prepare_inputs(src, cfg.pipeline);
        report = run_study(*prepared, cfg.pipeline, {});
      } else if (*ablate_cmd) {
        report = ablate(abl_kind == "no_svm" ? AblationKind::NoSvm : AblationKind::NoDoppler, src, cfg.pipeline);
      } else {
        report = antenna_sweep(src, cfg.pipeline, cfg.pipeline.antenna_counts);
      }
      const fs::path dir = fs::path(out_root) / run_directory_name(cfg);
      write_report(dir, report, cfg, cfg.data.has_value() && *experiment);
      if (prepared) write_example_spectrograms(dir, *prepared);
      print_summary(report);
      std::cout << dir.string() << "\n";
    } else if (*inspect) {
      std::cout << inspect_file(inspect_path).dump(2) << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return 0;
}
