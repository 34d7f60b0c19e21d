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

#include "ibis/checkpoint.hpp"

#include <string>

#include <json.hpp>

#include "ibis/error.hpp"

namespace ibis {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "IBN1";

std::string_view kind_name(ModelKind kind) { return kind == ModelKind::Hybrid ? "hybrid" : "inception_only"; }

json architecture_json(const Architecture& a) {
  return {{"kind", kind_name(a.kind)},         {"input_channels", a.input_channels},
          {"filters", a.filters},              {"pool_filters", a.pool_filters},
          {"hidden", a.hidden},                {"kernels", a.kernels}};
}

template <typename T>
T field(const json& object, const char* key) {
  require(object.is_object() && object.contains(key), ErrorKind::HeaderMismatch,
          std::string("checkpoint header lacks field '") + key + "'");
  try {
    return object.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::HeaderMismatch, std::string("checkpoint header field '") + key + "': " + e.what());
  }
}

Architecture architecture_from(const json& j) {
  Architecture a;
  const auto kind = field<std::string>(j, "kind");
  require(kind == "hybrid" || kind == "inception_only", ErrorKind::HeaderMismatch, "unknown model kind " + kind);
  a.kind = kind == "hybrid" ? ModelKind::Hybrid : ModelKind::InceptionOnly;
  a.input_channels = field<std::size_t>(j, "input_channels");
  a.filters = field<std::size_t>(j, "filters");
  a.pool_filters = field<std::size_t>(j, "pool_filters");
  a.hidden = field<std::size_t>(j, "hidden");
  a.kernels = field<std::array<std::size_t, 3>>(j, "kernels");
  try {
    validate(a);
  } catch (const Error& e) {
    fail(ErrorKind::HeaderMismatch, std::string("checkpoint architecture: ") + e.what());
  }
  return a;
}

}  // namespace

Bytes write_checkpoint(const Checkpoint& cp) {
  json header;
  header["format"] = "ibn/1";
  header["architecture"] = architecture_json(cp.network.arch());
  header["blocks"] = json::array();
  for (const ParamBlock& b : cp.network.blocks()) header["blocks"].push_back({{"name", b.name}, {"shape", b.shape}});
  if (cp.svm) {
    const SvmHyperParams& h = cp.svm->hyper;
    json svm = {{"kernel", kernel_name(h.kernel)}, {"C", h.C},
                {"gamma", h.gamma},                {"degree", h.degree},
                {"poly_coef0", h.poly_coef0},      {"sigmoid_coef0", h.sigmoid_coef0},
                {"pairs", json::array()}};
    for (const PairModel& p : cp.svm->pairs) {
      require(p.model.hyper == h, ErrorKind::InvariantViolation, "SVM pair models must share hyperparameters");
      svm["pairs"].push_back({{"positive", p.positive},
                              {"negative", p.negative},
                              {"support_vectors", p.model.support_vectors.rows},
                              {"dims", p.model.support_vectors.cols}});
    }
    header["svm"] = std::move(svm);
  } else {
    header["svm"] = nullptr;
  }
  const std::string text = header.dump();

  ByteWriter w;
  w.put_raw(kMagic);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
  w.put_raw(text);
  w.put_all(cp.network.params());
  if (cp.svm) {
    for (const PairModel& p : cp.svm->pairs) {
      w.put_all(std::span<const double>(p.model.support_vectors.values));
      w.put_all(std::span<const double>(p.model.dual_coefs));
      w.put<double>(p.model.bias);
    }
  }
  return std::move(w).take();
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  require(bytes.size() >= kMagic.size() && r.get_string(kMagic.size()) == kMagic, ErrorKind::BadMagic,
          "stream does not start with \"IBN1\"");
  const auto header_len = r.get<std::uint32_t>();
  json header;
  try {
    header = json::parse(r.get_string(header_len));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::HeaderMismatch, std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  require(field<std::string>(header, "format") == "ibn/1", ErrorKind::UnsupportedVersion,
          "checkpoint format " + field<std::string>(header, "format"));

  Checkpoint cp{Network(architecture_from(field<json>(header, "architecture"))), std::nullopt};
  const json blocks = field<json>(header, "blocks");
  require(blocks.is_array() && blocks.size() == cp.network.blocks().size(), ErrorKind::HeaderMismatch,
          "checkpoint block list does not match the architecture");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const ParamBlock& b = cp.network.blocks()[i];
    require(field<std::string>(blocks[i], "name") == b.name &&
                field<std::vector<std::size_t>>(blocks[i], "shape") == b.shape,
            ErrorKind::HeaderMismatch, "checkpoint block " + std::to_string(i) + " does not match " + b.name);
  }
  r.get_all(cp.network.params());

  const json svm = field<json>(header, "svm");
  if (!svm.is_null()) {
    MulticlassSvm model;
    const auto kernel = kernel_from_name(field<std::string>(svm, "kernel"));
    require(kernel.has_value(), ErrorKind::HeaderMismatch, "unknown SVM kernel");
    model.hyper = {*kernel,
                   field<double>(svm, "C"),
                   field<double>(svm, "gamma"),
                   field<int>(svm, "degree"),
                   field<double>(svm, "poly_coef0"),
                   field<double>(svm, "sigmoid_coef0")};
    for (const json& p : field<json>(svm, "pairs")) {
      PairModel pm;
      pm.positive = field<int>(p, "positive");
      pm.negative = field<int>(p, "negative");
      require(pm.positive >= 0 && pm.negative < kNumClasses && pm.positive < pm.negative, ErrorKind::HeaderMismatch,
              "bad SVM class pair");
      pm.model.hyper = model.hyper;
      auto& sv = pm.model.support_vectors;
      sv.rows = field<std::size_t>(p, "support_vectors");
      sv.cols = field<std::size_t>(p, "dims");
      require(sv.rows * sv.cols <= r.remaining() / sizeof(double), ErrorKind::HeaderMismatch,
              "SVM pair sizes exceed the payload");
      sv.values.resize(sv.rows * sv.cols);
      r.get_all(std::span<double>(sv.values));
      pm.model.dual_coefs.resize(sv.rows);
      r.get_all(std::span<double>(pm.model.dual_coefs));
      pm.model.bias = r.get<double>();
      model.pairs.push_back(std::move(pm));
    }
    cp.svm = std::move(model);
  }
  require(r.remaining() == 0, ErrorKind::HeaderMismatch,
          std::to_string(r.remaining()) + " trailing bytes after checkpoint payload");
  return cp;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file(path, write_checkpoint(checkpoint));
}

}  // namespace ibis
