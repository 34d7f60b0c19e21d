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

#include "ibis/fft.hpp"

#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "ibis/error.hpp"

namespace ibis {

namespace {
// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

Fft::Fft(std::size_t size) : size_(size) {
  require(is_power_of_two(size), ErrorKind::InvariantViolation, "FFT length must be a power of two");
  std::vector<std::complex<double>> scratch(size);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_dft_1d(static_cast<int>(size), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  require(plan_ != nullptr, ErrorKind::InvariantViolation, "FFTW could not create a plan");
}

Fft::~Fft() {
  if (plan_) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

Fft::Fft(Fft&& other) noexcept : size_(other.size_), plan_(std::exchange(other.plan_, nullptr)) {}

Fft& Fft::operator=(Fft&& other) noexcept {
  std::swap(size_, other.size_);
  std::swap(plan_, other.plan_);
  return *this;
}

void Fft::transform(std::span<std::complex<double>> data) const {
  require(data.size() == size_, ErrorKind::ShapeMismatch, "FFT input length differs from plan length");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan_), buf, buf);
}

}  // namespace ibis
