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
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "generators.hpp"
#include "ibis/csif.hpp"
#include "ibis/error.hpp"

using namespace ibis;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no ibis::Error thrown");
  return ErrorKind::IoError;
}

CsiDataset tiny(int antennas, int frames, int bw = 20) {
  CsiDataset d;
  d.antenna_count = antennas;
  CsiSample s;
  s.sample_id = 3;
  for (int a = 0; a < antennas; ++a) {
    CsiRecording r;
    r.antenna_id = a;
    r.center_freq_hz = 5.21e9;
    r.packet_rate_hz = 400.0;
    r.layout = default_layout(bw);
    r.label = ActivityLabel::Jumping;
    for (int f = 0; f < frames; ++f) {
      CsiFrame fr;
      fr.timestamp_s = f / 400.0;
      for (int i = 0; i < r.layout.total_count; ++i) fr.values.emplace_back(float(i + a), float(f) - 0.5f);
      r.frames.push_back(fr);
    }
    s.recordings.push_back(r);
  }
  d.samples.push_back(s);
  return d;
}

// Offset of the first payload byte.
std::size_t payload_start(const Bytes& b) {
  std::uint32_t len = 0;
  std::memcpy(&len, b.data() + 6, 4);
  return 10 + len;
}

nlohmann::json header_of(const Bytes& b) {
  std::uint32_t len = 0;
  std::memcpy(&len, b.data() + 6, 4);
  return nlohmann::json::parse(std::string(b.begin() + 10, b.begin() + 10 + len));
}

Bytes with_header(const Bytes& b, const nlohmann::json& h) {
  const std::string text = h.dump();
  Bytes out(b.begin(), b.begin() + 6);
  const auto len = static_cast<std::uint32_t>(text.size());
  const auto* p = reinterpret_cast<const std::uint8_t*>(&len);
  out.insert(out.end(), p, p + 4);
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), b.begin() + static_cast<long>(payload_start(b)), b.end());
  return out;
}

}  // namespace

TEST_CASE("layout sizes and DC guard") {
  CHECK(default_layout(80).total_count == 256);
  CHECK(default_layout(40).total_count == 128);
  const SubcarrierLayout l20 = default_layout(20);
  CHECK(l20.total_count == 64);
  CHECK(l20.dc_index() == 32);
  CHECK(std::ranges::find(l20.guard_indices, 32) != l20.guard_indices.end());
  CHECK(kind_of([] { default_layout(30); }) == ErrorKind::UnsupportedBandwidth);
}

TEST_CASE("layout index sets partition the grid") {
  for (int bw : {20, 40, 80}) {
    const SubcarrierLayout l = default_layout(bw);
    std::vector<int> all;
    for (const auto* v : {&l.data_indices, &l.pilot_indices, &l.guard_indices}) {
      CHECK(std::ranges::is_sorted(*v));
      all.insert(all.end(), v->begin(), v->end());
    }
    std::ranges::sort(all);
    std::vector<int> want(static_cast<std::size_t>(l.total_count));
    std::iota(want.begin(), want.end(), 0);
    CHECK(all == want);
    // edges and DC are guards
    CHECK(l.guard_indices.front() == 0);
    CHECK(l.guard_indices.back() == l.total_count - 1);
  }
  const SubcarrierLayout l20 = default_layout(20);
  CHECK(l20.pilot_indices == std::vector<int>{11, 25, 39, 53});
  CHECK(l20.data_indices.size() == 52);
  CHECK(default_layout(40).data_indices.size() == 108);
  CHECK(default_layout(80).data_indices.size() == 234);
}

TEST_CASE("label codes") {
  for (int c = 0; c < kNumClasses; ++c) CHECK(label_code(label_from_code(c)) == c);
  CHECK(label_name(ActivityLabel::Running) == "Running");
  CHECK(kind_of([] { label_from_code(5); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("csif round trip on a small dataset") {
  const CsiDataset d = tiny(2, 3);
  const CsiDataset back = parse_csif(write_csif(d));
  CHECK(back == d);
  CHECK(back.samples.front().recordings.size() == 2);
  CHECK(back.samples.front().recordings.front().num_frames() == 3);
  CHECK(header_of(write_csif(d))["samples"][0]["label_code"] == 4);
}

TEST_CASE("csif round trip, 200 random datasets") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const CsiDataset d = gen::dataset(rng);
    REQUIRE(parse_csif(write_csif(d)) == d);
  }
}

TEST_CASE("csif rejects malformed input") {
  const Bytes good = write_csif(tiny(2, 3));

  SUBCASE("magic") {
    Bytes b = good;
    b[0] = 'X';
    CHECK(kind_of([&] { parse_csif(b); }) == ErrorKind::BadMagic);
    CHECK(kind_of([&] { parse_csif(Bytes{'C', 'S'}); }) == ErrorKind::BadMagic);
  }
  SUBCASE("version") {
    Bytes b = good;
    b[4] = 2;
    CHECK(kind_of([&] { parse_csif(b); }) == ErrorKind::UnsupportedVersion);
  }
  SUBCASE("truncated payload") {
    const Bytes b(good.begin(), good.end() - 7);
    CHECK(kind_of([&] { parse_csif(b); }) == ErrorKind::HeaderMismatch);
  }
  SUBCASE("trailing bytes") {
    Bytes b = good;
    b.push_back(0);
    CHECK(kind_of([&] { parse_csif(b); }) == ErrorKind::HeaderMismatch);
  }
  SUBCASE("one subcarrier short per frame") {
    // 20 MHz payload re-labelled as 256 subcarriers does not fit; drop the
    // last complex value of every frame instead.
    const CsiDataset d = tiny(1, 2, 80);
    const Bytes full = write_csif(d);
    const std::size_t p0 = payload_start(full);
    Bytes b(full.begin(), full.begin() + static_cast<long>(p0 + 2 * 8));
    const std::size_t frame_bytes = 256 * 8;
    for (int f = 0; f < 2; ++f) {
      const auto start = full.begin() + static_cast<long>(p0 + 16 + f * frame_bytes);
      b.insert(b.end(), start, start + static_cast<long>(frame_bytes - 8));
    }
    CHECK(kind_of([&] { parse_csif(b); }) == ErrorKind::HeaderMismatch);
  }
  SUBCASE("non-finite value") {
    Bytes b = good;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(b.data() + payload_start(b) + 3 * 8 + 40, &nan, 4);
    CHECK(kind_of([&] { parse_csif(b); }) == ErrorKind::NonFiniteValue);
  }
  SUBCASE("header is not json") {
    Bytes b = good;
    b[10] = '#';
    CHECK(kind_of([&] { parse_csif(b); }) == ErrorKind::HeaderMismatch);
  }
  SUBCASE("missing header field") {
    nlohmann::json h = header_of(good);
    h["samples"][0].erase("num_frames");
    CHECK(kind_of([&] { parse_csif(with_header(good, h)); }) == ErrorKind::HeaderMismatch);
  }
  SUBCASE("bad label code") {
    nlohmann::json h = header_of(good);
    h["samples"][0]["label_code"] = 9;
    CHECK(kind_of([&] { parse_csif(with_header(good, h)); }) == ErrorKind::InvariantViolation);
  }
  SUBCASE("timestamps must increase") {
    CsiDataset d = tiny(1, 3);
    Bytes b = write_csif(d);
    const double t = 0.0;
    std::memcpy(b.data() + payload_start(b) + 16, &t, 8);  // third stamp back to 0
    CHECK(kind_of([&] { parse_csif(b); }) == ErrorKind::InvariantViolation);
  }
}

TEST_CASE("write_csif validates its input") {
  CsiDataset d = tiny(2, 2);
  d.samples.front().recordings[1].frames.clear();
  CHECK(kind_of([&] { write_csif(d); }) == ErrorKind::InvariantViolation);

  CsiDataset wrong_count = tiny(2, 2);
  wrong_count.antenna_count = 3;
  CHECK(kind_of([&] { write_csif(wrong_count); }) == ErrorKind::InvariantViolation);

  CsiDataset mixed = tiny(2, 2);
  mixed.samples.front().recordings[1].label = ActivityLabel::Empty;
  CHECK(kind_of([&] { write_csif(mixed); }) == ErrorKind::InvariantViolation);

  CsiDataset inf = tiny(1, 2);
  inf.samples.front().recordings[0].frames[1].values[5] = {std::numeric_limits<float>::infinity(), 0.0f};
  CHECK(kind_of([&] { write_csif(inf); }) == ErrorKind::NonFiniteValue);

  CsiDataset rate = tiny(1, 2);
  rate.samples.front().recordings[0].packet_rate_hz = 0.0;
  CHECK(kind_of([&] { write_csif(rate); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("streamed csif matches the in-memory writer and reads back lazily") {
  std::mt19937_64 rng(5);
  CsiDataset d = gen::dataset(rng);
  while (d.samples.size() < 3) d = gen::dataset(rng);
  const fs::path dir = fs::temp_directory_path() / "ibis_test_csif";
  fs::create_directories(dir);
  save_csif(dir / "a.csif", d);
  save_csif_streamed(dir / "b.csif", d.samples.size(), d.antenna_count,
                     [&](std::size_t i) { return d.samples[i]; });
  CHECK(read_file(dir / "a.csif") == read_file(dir / "b.csif"));
  CHECK_FALSE(fs::exists(dir / "b.csif.payload"));

  const CsifFile file(dir / "b.csif");
  REQUIRE(file.size() == d.samples.size());
  CHECK(file.antenna_count() == d.antenna_count);
  for (std::size_t i = file.size(); i-- > 0;) {
    CHECK(file.sample_id(i) == d.samples[i].sample_id);
    CHECK(file.read(i) == d.samples[i]);
  }
  CHECK(kind_of([&] { file.read(file.size()); }) == ErrorKind::EmptySelection);

  Bytes cut = read_file(dir / "a.csif");
  cut.pop_back();
  write_file(dir / "c.csif", cut);
  CHECK(kind_of([&] { CsifFile bad(dir / "c.csif"); }) == ErrorKind::HeaderMismatch);
  CHECK(kind_of([&] {
          save_csif_streamed(dir / "d.csif", 2, d.antenna_count, [&](std::size_t) { return d.samples[0]; });
        }) == ErrorKind::InvariantViolation);
  fs::remove_all(dir);
}

TEST_CASE("extract_subband keeps the centre block") {
  const CsiDataset d = tiny(1, 2, 80);
  const CsiRecording& r80 = d.samples.front().recordings.front();
  const CsiRecording r20 = extract_subband(r80, 20);
  CHECK(r20.layout == default_layout(20));
  REQUIRE(r20.frames.size() == r80.frames.size());
  for (std::size_t f = 0; f < r20.frames.size(); ++f) {
    CHECK(r20.frames[f].timestamp_s == r80.frames[f].timestamp_s);
    for (int i = 0; i < 64; ++i) CHECK(r20.frames[f].values[i] == r80.frames[f].values[96 + i]);
  }
  CHECK(r20.packet_rate_hz == r80.packet_rate_hz);
  CHECK(r20.center_freq_hz == r80.center_freq_hz);
  CHECK(r20.label == r80.label);

  CHECK(extract_subband(r80, 80) == r80);
  CHECK(extract_subband(extract_subband(r80, 40), 20) == r20);
  CHECK(kind_of([&] { extract_subband(r20, 40); }) == ErrorKind::UpsampleRequested);
  CHECK(kind_of([&] { extract_subband(r80, 30); }) == ErrorKind::UnsupportedBandwidth);

  const CsiDataset d20 = extract_subband(d, 20);
  CHECK(d20.samples.front().recordings.front() == r20);
}

TEST_CASE("extract_subband composition on random recordings") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    const CsiDataset d = gen::dataset(rng);
    for (const CsiSample& s : d.samples)
      for (const CsiRecording& r : s.recordings) {
        if (r.layout.bandwidth_mhz < 40) continue;
        CHECK(extract_subband(extract_subband(r, 40), 20) == extract_subband(r, 20));
        const CsiRecording x = extract_subband(r, 20);
        CHECK(x.frames.size() == r.frames.size());
      }
  }
}
