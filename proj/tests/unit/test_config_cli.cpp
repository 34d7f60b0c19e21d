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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ibis/artifacts.hpp"
#include "ibis/config.hpp"
#include "ibis/csif.hpp"
#include "ibis/error.hpp"

using namespace ibis;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ErrorKind kind_of(const auto& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("no ibis::Error thrown");
  return ErrorKind::IoError;
}

const char* kTiny = R"({
  "seed": 3,
  "repetitions": 1,
  "bandwidths": [20],
  "antenna_counts": [1, 2],
  "synth": {"bandwidth_mhz": 20, "antenna_count": 2, "samples_per_class": 4},
  "network": {"filters": 4, "pool_filters": 4, "hidden": 6},
  "train": {"epochs": 2, "batch_size": 8},
  "svm": {"kernels": ["rbf"], "C": [1.0], "gamma": [1.0], "folds": 2}
})";

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::temp_directory_path() / ("ibis_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args, const Scratch& s) {
  const fs::path out = s.dir / "stdout.txt";
  const std::string cmd = std::string(IBIS_CLI_PATH) + " " + args + " >" + out.string() + " 2>" +
                          (s.dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("missing keys take defaults") {
  const RunConfig c = parse_config(R"({"seed": 1})");
  CHECK(c.seed == 1);
  CHECK(c.synth.seed == 1);
  CHECK(c.pipeline.seed == 1);
  CHECK_FALSE(c.data.has_value());
  CHECK(c.pipeline.repetitions == 10);
  CHECK(c.pipeline.bandwidths == std::vector<int>{20, 40, 80});
  CHECK(c.pipeline.doppler.velocity_bins == 81);
  CHECK(c.pipeline.doppler.stft.window_len == 128);
  CHECK(c.pipeline.cv_folds == 5);
  CHECK(c.pipeline.train.epochs == 30);
  CHECK(c.synth.snr_db == 20.0);
}

TEST_CASE("strict keys and values") {
  CHECK(kind_of([] { parse_config(R"({"dopler": {}})"); }) == ErrorKind::UnknownKey);
  CHECK(kind_of([] { parse_config(R"({"doppler": {"hops": 3}})"); }) == ErrorKind::UnknownKey);
  std::string msg;
  CHECK(kind_of([] { parse_config(R"({"svm": {"gamma": [-1]}})"); }, &msg) == ErrorKind::InvariantViolation);
  CHECK(msg.find("svm.gamma") != std::string::npos);
  CHECK(kind_of([] { parse_config(R"({"bandwidths": [30]})"); }) == ErrorKind::UnsupportedBandwidth);
  CHECK(kind_of([] { parse_config(R"({"repetitions": "ten"})"); }) == ErrorKind::InvariantViolation);
  CHECK(kind_of([] { parse_config(R"({"split": {"train_fraction": 1.0}})"); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("parse errors carry line and column") {
  std::string msg;
  CHECK(kind_of([] { parse_config("{\n  \"seed\": 1,\n  oops\n}"); }, &msg) == ErrorKind::ParseError);
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("column") != std::string::npos);
  CHECK(kind_of([] { load_config("/nonexistent/ibis.json"); }) == ErrorKind::IoError);
}

TEST_CASE("resolved config round-trips") {
  const RunConfig a = parse_config(kTiny);
  const std::string text = resolved_config_json(a);
  const RunConfig b = parse_config(text);
  CHECK(resolved_config_json(b) == text);
  CHECK(b.pipeline == a.pipeline);
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(parse_config("{}")));
  RunConfig noiseless = parse_config(R"({"synth": {"snr_db": null}})");
  CHECK(std::isinf(noiseless.synth.snr_db));
  CHECK(std::isinf(parse_config(resolved_config_json(noiseless)).synth.snr_db));
}

TEST_CASE("cli exit codes") {
  const Scratch s;
  CHECK(cli("", s).code == 1);
  CHECK(cli("frobnicate", s).code == 1);
  CHECK(cli("synth", s).code == 1);
  CHECK(cli("--help", s).code == 0);
  const fs::path junk = s.write("junk.bin", "not a file format");
  CHECK(cli("inspect " + junk.string(), s).code == 2);
  const fs::path bad = s.write("bad.json", R"({"dopler": {}})");
  CHECK(cli("synth --config " + bad.string() + " --out " + (s.dir / "x.csif").string(), s).code == 2);
}

TEST_CASE("cli synth, doppler and inspect") {
  const Scratch s;
  const fs::path cfg = s.write("tiny.json", kTiny);
  const fs::path csif = s.dir / "tiny.csif";
  REQUIRE(cli("synth --config " + cfg.string() + " --out " + csif.string(), s).code == 0);
  const CsiDataset ds = load_csif(csif);
  CHECK(ds.samples.size() == 20);
  CHECK(ds.antenna_count == 2);

  Run r = cli("inspect " + csif.string(), s);
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(doc.at("format") == "CSIF");
  CHECK(doc.at("samples") == 20);

  const fs::path dopp = s.dir / "t.dopp";
  REQUIRE(cli("doppler --in " + csif.string() + " --out " + dopp.string() + " --pgm " + (s.dir / "t.pgm").string(),
              s)
              .code == 0);
  CHECK(fs::exists(s.dir / "t.pgm"));
  r = cli("inspect " + dopp.string(), s);
  REQUIRE(r.code == 0);
  doc = json::parse(r.out);
  CHECK(doc.at("velocity_bins") == 81);
  CHECK(doc.at("time_bins") == 53);
  CHECK(doc.at("duration_s").get<double>() == doctest::Approx(4.5));

  const fs::path phase = s.dir / "phase.csv";
  CHECK(cli("sanitize --in " + csif.string() + " --out " + phase.string() + " --antenna 1", s).code == 0);
  CHECK(slurp(phase).starts_with("frame,sc"));
  CHECK(cli("doppler --in " + csif.string() + " --out " + dopp.string() + " --antenna 5", s).code == 2);
}

TEST_CASE("cli seed flag overrides the config") {
  const Scratch s;
  const fs::path cfg = s.write("tiny.json", kTiny);
  const fs::path a = s.dir / "a.csif", b = s.dir / "b.csif", c = s.dir / "c.csif";
  REQUIRE(cli("synth --config " + cfg.string() + " --out " + a.string() + " --samples-per-class 1", s).code == 0);
  REQUIRE(cli("synth --config " + cfg.string() + " --out " + b.string() + " --samples-per-class 1 --seed 9", s).code ==
          0);
  json doc = json::parse(kTiny);
  doc["seed"] = 9;
  const fs::path cfg9 = s.write("nine.json", doc.dump());
  REQUIRE(cli("synth --config " + cfg9.string() + " --out " + c.string() + " --samples-per-class 1", s).code == 0);
  CHECK(slurp(a) != slurp(b));
  CHECK(slurp(b) == slurp(c));
}

TEST_CASE("cli experiment, train and eval") {
  const Scratch s;
  const fs::path cfg = s.write("tiny.json", kTiny);
  Run r = cli("experiment --config " + cfg.string() + " --out " + (s.dir / "runs").string(), s);
  REQUIRE(r.code == 0);
  const fs::path run = s.dir / "runs" / run_directory_name(load_config(cfg));
  CHECK(fs::exists(run / "report.json"));
  CHECK(fs::exists(run / "resolved_config.json"));
  CHECK(fs::exists(run / "runs.csv"));
  CHECK(fs::exists(run / "spectrogram_20_Walking.pgm"));
  CHECK(json::parse(slurp(run / "report.json")).at("kind") == "experiment");
  CHECK(resolved_config_json(parse_config(slurp(run / "resolved_config.json"))) ==
        resolved_config_json(load_config(cfg)));

  const fs::path model = s.dir / "m.ibn";
  REQUIRE(cli("train --config " + cfg.string() + " --out " + model.string(), s).code == 0);
  r = cli("inspect " + model.string(), s);
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("format") == "IBN1");
  CHECK(json::parse(r.out).contains("svm"));
  const fs::path ev = s.dir / "eval.json";
  REQUIRE(cli("eval --config " + cfg.string() + " --model " + model.string() + " --out " + ev.string(), s).code == 0);
  const json e = json::parse(slurp(ev));
  CHECK(e.at("accuracy").get<double>() >= 0.0);
  CHECK(e.at("samples") == 5);
}
