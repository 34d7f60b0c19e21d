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

#include "ibis/csif.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "ibis/error.hpp"

namespace ibis {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "CSIF";

template <typename T>
T header_field(const json& object, const char* key) {
  require(object.is_object() && object.contains(key), ErrorKind::HeaderMismatch,
          std::string("CSIF header lacks field '") + key + "'");
  try {
    return object.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::HeaderMismatch, std::string("CSIF header field '") + key + "': " + e.what());
  }
}

}  // namespace

namespace {

json sample_entry(const CsiSample& s) {
  const CsiRecording& r = s.recordings.front();
  json entry;
  entry["sample_id"] = s.sample_id;
  entry["label_code"] = r.label ? json(label_code(*r.label)) : json(nullptr);
  entry["center_freq_hz"] = r.center_freq_hz;
  entry["packet_rate_hz"] = r.packet_rate_hz;
  entry["bandwidth_mhz"] = r.layout.bandwidth_mhz;
  entry["num_frames"] = r.frames.size();
  return entry;
}

void put_preamble(ByteWriter& w, const json& header) {
  const std::string text = header.dump();
  w.put_raw(kMagic);
  w.put<std::uint16_t>(kCsifVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
  w.put_raw(text);
}

void put_payload(ByteWriter& w, const CsiSample& s) {
  for (const CsiFrame& f : s.recordings.front().frames) w.put<double>(f.timestamp_s);
  const std::size_t frames = s.recordings.front().frames.size();
  for (std::size_t f = 0; f < frames; ++f)
    for (const CsiRecording& r : s.recordings)
      for (const ComplexValue& v : r.frames[f].values) {
        w.put<float>(v.real());
        w.put<float>(v.imag());
      }
}

struct Declared {
  std::uint32_t sample_id = 0;
  std::optional<ActivityLabel> label;
  double center_freq_hz = 0.0, packet_rate_hz = 0.0;
  SubcarrierLayout layout;
  std::size_t num_frames = 0;
  std::size_t payload_bytes = 0;
};

struct Header {
  int antenna_count = 0;
  std::vector<Declared> samples;
  std::size_t payload_bytes = 0;
};

/// Magic, version and JSON header; leaves the reader at the payload.
Header read_header(ByteReader& r, std::size_t total_size) {
  require(total_size >= kMagic.size() && r.get_string(kMagic.size()) == kMagic, ErrorKind::BadMagic,
          "stream does not start with \"CSIF\"");
  const auto version = r.get<std::uint16_t>();
  require(version == kCsifVersion, ErrorKind::UnsupportedVersion, "CSIF version " + std::to_string(version));
  const auto header_len = r.get<std::uint32_t>();
  json header;
  try {
    header = json::parse(r.get_string(header_len));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::HeaderMismatch, std::string("CSIF header is not valid JSON: ") + e.what());
  }

  const auto schema = header_field<std::string>(header, "schema");
  require(schema == "csif/1", ErrorKind::UnsupportedVersion, "CSIF schema '" + schema + "'");
  Header h;
  h.antenna_count = header_field<int>(header, "antenna_count");
  require(h.antenna_count >= 1, ErrorKind::HeaderMismatch, "antenna_count must be >= 1");
  const json samples = header_field<json>(header, "samples");
  require(samples.is_array(), ErrorKind::HeaderMismatch, "'samples' must be an array");

  for (const json& entry : samples) {
    Declared d;
    d.sample_id = header_field<std::uint32_t>(entry, "sample_id");
    const json code = header_field<json>(entry, "label_code");
    if (!code.is_null()) {
      require(code.is_number_integer(), ErrorKind::HeaderMismatch, "label_code must be an integer or null");
      d.label = label_from_code(code.get<int>());
    }
    d.center_freq_hz = header_field<double>(entry, "center_freq_hz");
    d.packet_rate_hz = header_field<double>(entry, "packet_rate_hz");
    d.layout = default_layout(header_field<int>(entry, "bandwidth_mhz"));
    d.num_frames = header_field<std::size_t>(entry, "num_frames");
    require(d.num_frames >= 1, ErrorKind::InvariantViolation,
            "sample " + std::to_string(d.sample_id) + " declares zero frames");
    const std::size_t per_frame = static_cast<std::size_t>(h.antenna_count) * d.layout.total_count;
    d.payload_bytes = d.num_frames * (sizeof(double) + per_frame * 2 * sizeof(float));
    h.payload_bytes += d.payload_bytes;
    h.samples.push_back(std::move(d));
  }
  return h;
}

CsiSample read_payload(ByteReader& r, const Declared& d, int antenna_count) {
  CsiSample sample;
  sample.sample_id = d.sample_id;
  std::vector<double> timestamps(d.num_frames);
  r.get_all(std::span(timestamps));
  sample.recordings.resize(antenna_count);
  for (int a = 0; a < antenna_count; ++a) {
    CsiRecording& rec = sample.recordings[a];
    rec.antenna_id = a;
    rec.center_freq_hz = d.center_freq_hz;
    rec.packet_rate_hz = d.packet_rate_hz;
    rec.layout = d.layout;
    rec.label = d.label;
    rec.frames.resize(d.num_frames);
    for (std::size_t f = 0; f < d.num_frames; ++f) rec.frames[f].timestamp_s = timestamps[f];
  }
  std::vector<float> scratch(static_cast<std::size_t>(d.layout.total_count) * 2);
  for (std::size_t f = 0; f < d.num_frames; ++f) {
    for (int a = 0; a < antenna_count; ++a) {
      r.get_all(std::span(scratch));
      auto& values = sample.recordings[a].frames[f].values;
      values.resize(d.layout.total_count);
      for (int i = 0; i < d.layout.total_count; ++i) {
        const float re = scratch[2 * i], im = scratch[2 * i + 1];
        require(std::isfinite(re) && std::isfinite(im), ErrorKind::NonFiniteValue,
                "sample " + std::to_string(d.sample_id) + " frame " + std::to_string(f) + " antenna " +
                    std::to_string(a) + " subcarrier " + std::to_string(i));
        values[i] = {re, im};
      }
    }
  }
  return sample;
}

}  // namespace

Bytes write_csif(const CsiDataset& dataset) {
  validate(dataset);
  json header;
  header["schema"] = "csif/1";
  header["antenna_count"] = dataset.antenna_count;
  header["samples"] = json::array();
  for (const CsiSample& s : dataset.samples) header["samples"].push_back(sample_entry(s));
  ByteWriter w;
  put_preamble(w, header);
  for (const CsiSample& s : dataset.samples) put_payload(w, s);
  return std::move(w).take();
}

CsiDataset parse_csif(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const Header h = read_header(r, bytes.size());
  require(r.remaining() == h.payload_bytes, ErrorKind::HeaderMismatch,
          "header declares " + std::to_string(h.payload_bytes) + " payload bytes, stream holds " +
              std::to_string(r.remaining()));
  CsiDataset dataset;
  dataset.antenna_count = h.antenna_count;
  for (const Declared& d : h.samples) dataset.samples.push_back(read_payload(r, d, h.antenna_count));
  validate(dataset);
  return dataset;
}

CsiDataset load_csif(const std::filesystem::path& path) { return parse_csif(read_file(path)); }

void save_csif(const std::filesystem::path& path, const CsiDataset& dataset) {
  write_file(path, write_csif(dataset));
}

void save_csif_streamed(const std::filesystem::path& path, std::size_t count, int antenna_count,
                        const std::function<CsiSample(std::size_t)>& fetch) {
  // Payload goes to a side file first; the header needs every sample's shape.
  const std::filesystem::path tmp = path.string() + ".payload";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  json header;
  header["schema"] = "csif/1";
  header["antenna_count"] = antenna_count;
  header["samples"] = json::array();
  {
    std::ofstream payload(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(payload), ErrorKind::IoError, "cannot write " + tmp.string());
    std::set<std::uint32_t> ids;
    for (std::size_t i = 0; i < count; ++i) {
      const CsiSample s = fetch(i);
      require(ids.insert(s.sample_id).second, ErrorKind::InvariantViolation,
              "duplicate sample id " + std::to_string(s.sample_id));
      validate(CsiDataset{antenna_count, {s}});
      header["samples"].push_back(sample_entry(s));
      ByteWriter w;
      put_payload(w, s);
      const Bytes bytes = std::move(w).take();
      payload.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      require(static_cast<bool>(payload), ErrorKind::IoError, "short write to " + tmp.string());
    }
  }
  {
    ByteWriter w;
    put_preamble(w, header);
    const Bytes head = std::move(w).take();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
    std::ifstream in(tmp, std::ios::binary);
    out << in.rdbuf();
    require(static_cast<bool>(out), ErrorKind::IoError, "short write to " + path.string());
  }
  std::filesystem::remove(tmp);
}

CsifFile::CsifFile(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot read " + path_.string());
  const auto file_size = static_cast<std::size_t>(std::filesystem::file_size(path_));
  Bytes preamble(std::min<std::size_t>(file_size, 10));
  in.read(reinterpret_cast<char*>(preamble.data()), static_cast<std::streamsize>(preamble.size()));
  std::size_t header_len = 0;
  if (preamble.size() == 10) {
    std::uint32_t len = 0;
    std::memcpy(&len, preamble.data() + 6, sizeof(len));
    header_len = std::min<std::size_t>(len, file_size - 10);
  }
  Bytes head(preamble.size() + header_len);
  std::copy(preamble.begin(), preamble.end(), head.begin());
  in.read(reinterpret_cast<char*>(head.data() + preamble.size()), static_cast<std::streamsize>(header_len));
  ByteReader r(head);
  const Header h = read_header(r, head.size());
  require(file_size - head.size() == h.payload_bytes, ErrorKind::HeaderMismatch,
          "header declares " + std::to_string(h.payload_bytes) + " payload bytes, file holds " +
              std::to_string(file_size - head.size()));
  antenna_count_ = h.antenna_count;
  std::size_t offset = head.size();
  std::set<std::uint32_t> ids;
  for (const Declared& d : h.samples) {
    require(ids.insert(d.sample_id).second, ErrorKind::InvariantViolation,
            "duplicate sample id " + std::to_string(d.sample_id));
    entries_.push_back({d.sample_id, offset, d.payload_bytes});
    offset += d.payload_bytes;
  }
}

CsiSample CsifFile::read(std::size_t index) const {
  require(index < entries_.size(), ErrorKind::EmptySelection, "sample index out of range");
  const Entry& e = entries_[index];
  std::ifstream in(path_, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot read " + path_.string());
  // Re-read the header so the declared shape travels with the sample.
  std::size_t header_end = entries_.front().offset;
  Bytes head(header_end);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  ByteReader hr(head);
  const Header h = read_header(hr, head.size());
  Bytes body(e.bytes);
  in.seekg(static_cast<std::streamoff>(e.offset));
  in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()));
  require(static_cast<bool>(in), ErrorKind::IoError, "short read from " + path_.string());
  ByteReader r(body);
  CsiSample s = read_payload(r, h.samples[index], h.antenna_count);
  validate(CsiDataset{h.antenna_count, {s}});
  return s;
}

}  // namespace ibis
