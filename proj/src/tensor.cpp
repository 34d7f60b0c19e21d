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

#include "ibis/tensor.hpp"

#include <functional>
#include <numeric>

#include "ibis/error.hpp"

namespace ibis {

std::size_t element_count(const std::vector<std::size_t>& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> dims) : shape(std::move(dims)), data(element_count(shape), 0.0) {}

RowMatrix to_matrix(const Tensor& t) {
  require(t.rank() == 2 && t.data.size() == element_count(t.shape), ErrorKind::ShapeMismatch,
          "expected a consistent 2-D tensor");
  return Eigen::Map<const RowMatrix>(t.data.data(), static_cast<Eigen::Index>(t.shape[0]),
                                     static_cast<Eigen::Index>(t.shape[1]));
}

Tensor to_tensor(const RowMatrix& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMatrix>(t.data.data(), m.rows(), m.cols()) = m;
  return t;
}

}  // namespace ibis
