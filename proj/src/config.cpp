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

#include "ibis/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ibis/binary_io.hpp"
#include "ibis/error.hpp"

namespace ibis {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& object, std::string path) : obj_(object), path_(std::move(path)) {
    require(obj_.is_object(), ErrorKind::InvariantViolation, where("") + " must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : obj_.items())
      require(allowed.contains(key), ErrorKind::UnknownKey, "\"" + where(key) + "\"");
  }

  template <typename T>
  void get(const char* key, T& out) const {
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(ErrorKind::InvariantViolation, where(key) + " has the wrong type");
    }
  }

  std::optional<Reader> child(const char* key) const {
    if (!obj_.contains(key)) return std::nullopt;
    return Reader(obj_.at(key), where(key));
  }

  const json& raw() const { return obj_; }
  std::string where(std::string_view key) const {
    if (path_.empty()) return std::string(key);
    return key.empty() ? path_ : path_ + "." + std::string(key);
  }

 private:
  const json& obj_;
  std::string path_;
};

std::string window_name(WindowKind k) { return k == WindowKind::Hann ? "hann" : "rect"; }

json to_json(const RunConfig& c) {
  const SynthConfig& s = c.synth;
  const PipelineConfig& p = c.pipeline;
  json kernels = json::array();
  for (KernelKind k : p.grid.kernels) kernels.push_back(kernel_name(k));
  return {
      {"seed", c.seed},
      {"data", c.data ? json(*c.data) : json(nullptr)},
      {"threads", p.threads},
      {"repetitions", p.repetitions},
      {"bandwidths", p.bandwidths},
      {"antenna_counts", p.antenna_counts},
      {"synth",
       {{"packet_rate_hz", s.packet_rate_hz},
        {"center_freq_hz", s.center_freq_hz},
        {"bandwidth_mhz", s.bandwidth_mhz},
        {"antenna_count", s.antenna_count},
        {"samples_per_class", s.samples_per_class},
        {"snr_db", std::isinf(s.snr_db) ? json(nullptr) : json(s.snr_db)},
        {"duration_s", s.duration_s},
        {"reflection_factor", s.reflection_factor}}},
      {"sanitizer", {{"lambda", p.lasso_lambda}}},
      {"doppler",
       {{"center_freq_hz", p.doppler.center_freq_hz},
        {"reflection_factor", p.doppler.reflection_factor},
        {"velocity_bins", p.doppler.velocity_bins},
        {"window_len", p.doppler.stft.window_len},
        {"hop", p.doppler.stft.hop},
        {"fft_len", p.doppler.stft.fft_len},
        {"window", window_name(p.doppler.stft.window)}}},
      {"network",
       {{"filters", p.network.filters},
        {"pool_filters", p.network.pool_filters},
        {"hidden", p.network.hidden},
        {"kernels", p.network.kernels}}},
      {"train",
       {{"epochs", p.train.epochs},
        {"batch_size", p.train.batch_size},
        {"learning_rate", p.train.learning_rate},
        {"optimizer", p.train.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
        {"beta1", p.train.beta1},
        {"beta2", p.train.beta2},
        {"epsilon", p.train.epsilon},
        {"momentum", p.train.momentum}}},
      {"svm",
       {{"kernels", kernels},
        {"C", p.grid.C},
        {"gamma", p.grid.gamma},
        {"degree", p.grid.degree},
        {"poly_coef0", p.grid.poly_coef0},
        {"sigmoid_coef0", p.grid.sigmoid_coef0},
        {"folds", p.cv_folds},
        {"tolerance", p.smo.tolerance},
        {"max_iterations", p.smo.max_iterations}}},
      {"split", {{"train_fraction", p.train_fraction}}},
  };
}

RunConfig from_json(const json& doc) {
  RunConfig c;
  const Reader top(doc, "");
  top.allow({"seed", "data", "threads", "repetitions", "bandwidths", "antenna_counts", "synth", "sanitizer", "doppler",
             "network", "train", "svm", "split"});
  top.get("seed", c.seed);
  if (doc.contains("data") && !doc.at("data").is_null()) {
    std::string path;
    top.get("data", path);
    c.data = path;
  }
  PipelineConfig& p = c.pipeline;
  top.get("threads", p.threads);
  top.get("repetitions", p.repetitions);
  top.get("bandwidths", p.bandwidths);
  top.get("antenna_counts", p.antenna_counts);

  if (auto r = top.child("synth")) {
    r->allow({"packet_rate_hz", "center_freq_hz", "bandwidth_mhz", "antenna_count", "samples_per_class", "snr_db",
              "duration_s", "reflection_factor"});
    SynthConfig& s = c.synth;
    r->get("packet_rate_hz", s.packet_rate_hz);
    r->get("center_freq_hz", s.center_freq_hz);
    r->get("bandwidth_mhz", s.bandwidth_mhz);
    r->get("antenna_count", s.antenna_count);
    r->get("samples_per_class", s.samples_per_class);
    if (r->raw().contains("snr_db") && r->raw().at("snr_db").is_null())
      s.snr_db = kNoNoise;
    else
      r->get("snr_db", s.snr_db);
    r->get("duration_s", s.duration_s);
    r->get("reflection_factor", s.reflection_factor);
  }
  if (auto r = top.child("sanitizer")) {
    r->allow({"lambda"});
    r->get("lambda", p.lasso_lambda);
  }
  if (auto r = top.child("doppler")) {
    r->allow({"center_freq_hz", "reflection_factor", "velocity_bins", "window_len", "hop", "fft_len", "window"});
    r->get("center_freq_hz", p.doppler.center_freq_hz);
    r->get("reflection_factor", p.doppler.reflection_factor);
    r->get("velocity_bins", p.doppler.velocity_bins);
    r->get("window_len", p.doppler.stft.window_len);
    r->get("hop", p.doppler.stft.hop);
    r->get("fft_len", p.doppler.stft.fft_len);
    std::string window = window_name(p.doppler.stft.window);
    r->get("window", window);
    require(window == "hann" || window == "rect", ErrorKind::InvariantViolation,
            "doppler.window must be \"hann\" or \"rect\"");
    p.doppler.stft.window = window == "hann" ? WindowKind::Hann : WindowKind::Rect;
  }
  if (auto r = top.child("network")) {
    r->allow({"filters", "pool_filters", "hidden", "kernels"});
    r->get("filters", p.network.filters);
    r->get("pool_filters", p.network.pool_filters);
    r->get("hidden", p.network.hidden);
    r->get("kernels", p.network.kernels);
  }
  if (auto r = top.child("train")) {
    r->allow({"epochs", "batch_size", "learning_rate", "optimizer", "beta1", "beta2", "epsilon", "momentum"});
    r->get("epochs", p.train.epochs);
    r->get("batch_size", p.train.batch_size);
    r->get("learning_rate", p.train.learning_rate);
    std::string opt = p.train.optimizer == OptimizerKind::Adam ? "adam" : "sgd";
    r->get("optimizer", opt);
    require(opt == "adam" || opt == "sgd", ErrorKind::InvariantViolation, "train.optimizer must be adam or sgd");
    p.train.optimizer = opt == "adam" ? OptimizerKind::Adam : OptimizerKind::Sgd;
    r->get("beta1", p.train.beta1);
    r->get("beta2", p.train.beta2);
    r->get("epsilon", p.train.epsilon);
    r->get("momentum", p.train.momentum);
  }
  if (auto r = top.child("svm")) {
    r->allow({"kernels", "C", "gamma", "degree", "poly_coef0", "sigmoid_coef0", "folds", "tolerance",
              "max_iterations"});
    if (r->raw().contains("kernels")) {
      std::vector<std::string> names;
      r->get("kernels", names);
      p.grid.kernels.clear();
      for (const std::string& n : names) {
        const auto k = kernel_from_name(n);
        require(k.has_value(), ErrorKind::InvariantViolation, "svm.kernels: unknown kernel \"" + n + "\"");
        p.grid.kernels.push_back(*k);
      }
    }
    r->get("C", p.grid.C);
    r->get("gamma", p.grid.gamma);
    r->get("degree", p.grid.degree);
    r->get("poly_coef0", p.grid.poly_coef0);
    r->get("sigmoid_coef0", p.grid.sigmoid_coef0);
    r->get("folds", p.cv_folds);
    r->get("tolerance", p.smo.tolerance);
    r->get("max_iterations", p.smo.max_iterations);
  }
  if (auto r = top.child("split")) {
    r->allow({"train_fraction"});
    r->get("train_fraction", p.train_fraction);
  }
  c.synth.seed = c.seed;
  p.seed = c.seed;
  return c;
}

}  // namespace

void validate(const RunConfig& cfg) {
  validate(cfg.synth);
  validate(cfg.pipeline);
  require(cfg.synth.seed == cfg.seed && cfg.pipeline.seed == cfg.seed, ErrorKind::InvariantViolation,
          "seed must be set through RunConfig::seed");
  require(cfg.pipeline.smo.tolerance > 0.0 && cfg.pipeline.smo.max_iterations >= 1, ErrorKind::InvariantViolation,
          "svm.tolerance must be > 0 and svm.max_iterations >= 1");
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line/column
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorKind::ParseError, fmt::format("line {}, column {}: {}", line, col, e.what()));
  }
  RunConfig cfg = from_json(doc);
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string resolved_config_json(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const RunConfig& cfg) {
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : resolved_config_json(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h).substr(0, 12);
}

}  // namespace ibis
