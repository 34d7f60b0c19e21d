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

#include "ibis/dopp_file.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ibis/error.hpp"

namespace ibis {

namespace {
using nlohmann::json;
constexpr std::string_view kMagic = "DOPP";
}  // namespace

Bytes write_dopp(const DopplerTrace& trace) {
  require(trace.power.size() == trace.time_bins * trace.velocity_bins, ErrorKind::InvariantViolation,
          "trace power size does not match its shape");
  json header;
  header["time_bins"] = trace.time_bins;
  header["velocity_bins"] = trace.velocity_bins;
  header["duration_s"] = trace.duration_s;
  header["velocity_min"] = trace.velocity_min;
  header["velocity_max"] = trace.velocity_max;
  header["label_code"] = trace.label ? json(label_code(*trace.label)) : json(nullptr);
  header["antenna_id"] = trace.antenna_id;
  const std::string text = header.dump();

  ByteWriter w;
  w.put_raw(kMagic);
  w.put<std::uint16_t>(kDoppVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
  w.put_raw(text);
  w.put_all(std::span<const float>(trace.power));
  return std::move(w).take();
}

DopplerTrace parse_dopp(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  require(bytes.size() >= kMagic.size() && r.get_string(kMagic.size()) == kMagic, ErrorKind::BadMagic,
          "stream does not start with \"DOPP\"");
  const auto version = r.get<std::uint16_t>();
  require(version == kDoppVersion, ErrorKind::UnsupportedVersion, "DOPP version " + std::to_string(version));
  const auto header_len = r.get<std::uint32_t>();

  DopplerTrace trace;
  try {
    const json header = json::parse(r.get_string(header_len));
    trace.time_bins = header.at("time_bins").get<std::size_t>();
    trace.velocity_bins = header.at("velocity_bins").get<std::size_t>();
    trace.duration_s = header.at("duration_s").get<double>();
    trace.velocity_min = header.at("velocity_min").get<double>();
    trace.velocity_max = header.at("velocity_max").get<double>();
    const json& code = header.at("label_code");
    if (!code.is_null()) trace.label = label_from_code(code.get<int>());
    trace.antenna_id = header.at("antenna_id").get<int>();
  } catch (const json::exception& e) {
    fail(ErrorKind::HeaderMismatch, std::string("DOPP header: ") + e.what());
  }
  const std::size_t count = trace.time_bins * trace.velocity_bins;
  require(r.remaining() == count * sizeof(float), ErrorKind::HeaderMismatch,
          "header declares " + std::to_string(count) + " power values, payload holds " +
              std::to_string(r.remaining()) + " bytes");
  trace.power.resize(count);
  r.get_all(std::span(trace.power));
  for (std::size_t i = 0; i < count; ++i)
    require(std::isfinite(trace.power[i]), ErrorKind::NonFiniteValue, "power entry " + std::to_string(i));
  return trace;
}

DopplerTrace load_dopp(const std::filesystem::path& path) { return parse_dopp(read_file(path)); }

void save_dopp(const std::filesystem::path& path, const DopplerTrace& trace) { write_file(path, write_dopp(trace)); }

Bytes render_pgm(const DopplerTrace& trace) {
  ByteWriter w;
  w.put_raw(fmt::format("P5\n{} {}\n255\n", trace.time_bins, trace.velocity_bins));
  for (std::size_t v = trace.velocity_bins; v-- > 0;) {
    for (std::size_t t = 0; t < trace.time_bins; ++t) {
      const double p = std::clamp(static_cast<double>(trace.at(t, v)), 0.0, 1.0);
      w.put<std::uint8_t>(static_cast<std::uint8_t>(std::lround(p * 255.0)));
    }
  }
  return std::move(w).take();
}

std::string render_csv(const DopplerTrace& trace) {
  std::ostringstream out;
  out << "time_bin";
  for (double v : trace.velocity_axis()) out << ',' << fmt::format("{:.4f}", v);
  out << '\n';
  for (std::size_t t = 0; t < trace.time_bins; ++t) {
    out << t;
    for (std::size_t v = 0; v < trace.velocity_bins; ++v) out << ',' << fmt::format("{:.9g}", trace.at(t, v));
    out << '\n';
  }
  return out.str();
}

}  // namespace ibis
