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

#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace ibis {

/// Forward complex FFT of a fixed power-of-two length, backed by an FFTW plan.
/// X[k] = sum_n x[n] exp(-j 2 pi k n / N), unscaled. transform() may be called
/// concurrently from several threads on distinct buffers.
class Fft {
 public:
  explicit Fft(std::size_t size);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&& other) noexcept;
  Fft& operator=(Fft&& other) noexcept;

  std::size_t size() const noexcept { return size_; }
  void transform(std::span<std::complex<double>> data) const;

 private:
  std::size_t size_ = 0;
  void* plan_ = nullptr;
};

bool is_power_of_two(std::size_t n) noexcept;

}  // namespace ibis
