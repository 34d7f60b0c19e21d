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

#include "ibis/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ibis/error.hpp"
#include "ibis/parallel.hpp"

namespace ibis {

namespace {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <typename S>
using ConstMap = Eigen::Map<const Mat<S>>;
template <typename S>
using ConstRowMap = Eigen::Map<const RowVec<S>>;

using Index = Eigen::Index;

// Offsets of every block inside the flat parameter buffer.
struct Offsets {
  std::array<std::size_t, 3> conv_w{}, conv_b{};
  std::size_t pool_w = 0, pool_b = 0;
  std::array<std::size_t, 2> lstm_w{}, lstm_u{}, lstm_b{};
  std::size_t head_w = 0, head_b = 0;
};

Offsets offsets_of(const std::vector<ParamBlock>& blocks, const Architecture& arch) {
  Offsets o;
  std::size_t i = 0;
  for (int k = 0; k < 3; ++k) {
    o.conv_w[k] = blocks[i++].offset;
    o.conv_b[k] = blocks[i++].offset;
  }
  o.pool_w = blocks[i++].offset;
  o.pool_b = blocks[i++].offset;
  if (arch.kind == ModelKind::Hybrid) {
    for (int d = 0; d < 2; ++d) {
      o.lstm_w[d] = blocks[i++].offset;
      o.lstm_u[d] = blocks[i++].offset;
      o.lstm_b[d] = blocks[i++].offset;
    }
  }
  o.head_w = blocks[i++].offset;
  o.head_b = blocks[i++].offset;
  return o;
}

template <typename S>
ConstMap<S> mat(std::span<const S> p, std::size_t offset, std::size_t rows, std::size_t cols) {
  return ConstMap<S>(p.data() + offset, static_cast<Index>(rows), static_cast<Index>(cols));
}

template <typename S>
ConstRowMap<S> vec(std::span<const S> p, std::size_t offset, std::size_t n) {
  return ConstRowMap<S>(p.data() + offset, static_cast<Index>(n));
}

// Rows of output and input that overlap for tap j of a same-padded kernel.
struct TapRange {
  Index out = 0, in = 0, count = 0;
};

TapRange tap_range(std::size_t j, std::size_t width, std::size_t T, std::size_t B) {
  const long shift = static_cast<long>(j) - static_cast<long>(width / 2);
  const long lo = std::max(0L, -shift);
  const long hi = std::min(static_cast<long>(T), static_cast<long>(T) - shift);
  if (hi <= lo) return {};
  const auto b = static_cast<long>(B);
  return {lo * b, (lo + shift) * b, (hi - lo) * b};
}

template <typename S>
S sigmoid(S v) {
  return S(1) / (S(1) + std::exp(-v));
}

template <typename S>
S relu(S v) {
  return v > S(0) ? v : S(0);
}

template <typename S>
struct LstmStep {
  Mat<S> i, f, o, g, tanh_c, h_prev, c_prev;
};

// Intermediate values kept for backprop. Rows of the time-major matrices are
// indexed t * batch + b.
template <typename S>
struct Cache {
  std::size_t batch = 0, time = 0;
  Mat<S> input;
  std::array<Mat<S>, 3> conv_z;
  Mat<S> pooled, pool_z;
  Mat<S> features;
  std::array<std::vector<LstmStep<S>>, 2> steps;
  Mat<S> head_input;
  Mat<S> probs;
};

template <typename S>
struct Forward {
  const Architecture& arch;
  const Offsets& off;
  std::span<const S> p;

  // [T*B x D] time-major inception features.
  Mat<S> inception(std::span<const Sequence* const> xs, Cache<S>* cache) const {
    const std::size_t B = xs.size();
    const std::size_t T = static_cast<std::size_t>(xs.front()->rows());
    const std::size_t C = arch.input_channels;
    const std::size_t F = arch.filters, Fp = arch.pool_filters;
    for (const Sequence* x : xs) {
      require(static_cast<std::size_t>(x->cols()) == C, ErrorKind::ShapeMismatch,
              "input has " + std::to_string(x->cols()) + " channels, network expects " + std::to_string(C));
      require(static_cast<std::size_t>(x->rows()) == T && T >= 1, ErrorKind::ShapeMismatch,
              "batch sequences must share a non-zero length");
    }
    const Index rows = static_cast<Index>(T * B);
    Mat<S> features(rows, static_cast<Index>(arch.feature_channels()));

    Mat<S> input(rows, static_cast<Index>(C));
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t b = 0; b < B; ++b)
        input.row(static_cast<Index>(t * B + b)) = xs[b]->row(static_cast<Index>(t)).template cast<S>();

    // Time shift by d is a row shift by d * B in the time-major layout, so
    // each tap is one GEMM over the overlapping rows.
    for (int k = 0; k < 3; ++k) {
      const std::size_t width = arch.kernels[k];
      const auto W = mat(p, off.conv_w[k], F, width * C);
      Mat<S> z = Mat<S>::Zero(rows, static_cast<Index>(F));
      for (std::size_t j = 0; j < width; ++j) {
        const TapRange r = tap_range(j, width, T, B);
        if (r.count == 0) continue;
        z.middleRows(r.out, r.count).noalias() +=
            input.middleRows(r.in, r.count) * W.middleCols(static_cast<Index>(j * C), static_cast<Index>(C)).transpose();
      }
      z.rowwise() += vec(p, off.conv_b[k], F);
      features.middleCols(static_cast<Index>(k * F), static_cast<Index>(F)) =
          z.unaryExpr([](S v) { return relu(v); });
      if (cache) cache->conv_z[k] = std::move(z);
    }

    Mat<S> pooled(rows, static_cast<Index>(C));
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t lo = t == 0 ? 0 : t - 1;
      const std::size_t hi = std::min(T - 1, t + 1);
      for (std::size_t b = 0; b < B; ++b) {
        const Index r = static_cast<Index>(t * B + b);
        for (std::size_t c = 0; c < C; ++c) {
          double best = (*xs[b])(static_cast<Index>(lo), static_cast<Index>(c));
          for (std::size_t s = lo + 1; s <= hi; ++s)
            best = std::max(best, (*xs[b])(static_cast<Index>(s), static_cast<Index>(c)));
          pooled(r, static_cast<Index>(c)) = static_cast<S>(best);
        }
      }
    }
    Mat<S> pool_z = pooled * mat(p, off.pool_w, Fp, C).transpose();
    pool_z.rowwise() += vec(p, off.pool_b, Fp);
    features.middleCols(static_cast<Index>(3 * F), static_cast<Index>(Fp)) = pool_z.unaryExpr([](S v) { return relu(v); });
    if (cache) {
      cache->input = std::move(input);
      cache->batch = B;
      cache->time = T;
      cache->pooled = std::move(pooled);
      cache->pool_z = std::move(pool_z);
    }
    return features;
  }

  // Final hidden states of both directions, [B x 2H].
  Mat<S> recurrent(const Mat<S>& features, std::size_t B, std::size_t T, Cache<S>* cache) const {
    const std::size_t H = arch.hidden, D = arch.feature_channels();
    Mat<S> out(static_cast<Index>(B), static_cast<Index>(2 * H));
    for (int d = 0; d < 2; ++d) {
      const auto W = mat(p, off.lstm_w[d], 4 * H, D);
      const auto U = mat(p, off.lstm_u[d], 4 * H, H);
      const auto bias = vec(p, off.lstm_b[d], 4 * H);
      const Mat<S> projected = features * W.transpose();
      Mat<S> h = Mat<S>::Zero(static_cast<Index>(B), static_cast<Index>(H));
      Mat<S> c = h;
      if (cache) cache->steps[d].resize(T);
      const Index h_cols = static_cast<Index>(H);
      for (std::size_t s = 0; s < T; ++s) {
        const std::size_t t = d == 0 ? s : T - 1 - s;
        Mat<S> gates = projected.middleRows(static_cast<Index>(t * B), static_cast<Index>(B));
        gates.noalias() += h * U.transpose();
        gates.rowwise() += bias;
        // sigmoid over all four gate blocks at once; the candidate block is
        // pre-scaled by 2 so tanh(x) = 2 sigmoid(2x) - 1.
        gates.rightCols(h_cols) *= S(2);
        const Mat<S> act = (S(1) + (-gates.array()).exp()).inverse().matrix();
        Mat<S> i = act.leftCols(h_cols);
        Mat<S> f = act.middleCols(h_cols, h_cols);
        Mat<S> o = act.middleCols(2 * h_cols, h_cols);
        Mat<S> g = (S(2) * act.rightCols(h_cols).array() - S(1)).matrix();
        Mat<S> c_next = f.cwiseProduct(c) + i.cwiseProduct(g);
        Mat<S> tanh_c = (S(2) / (S(1) + (S(-2) * c_next.array()).exp()) - S(1)).matrix();
        Mat<S> h_next = o.cwiseProduct(tanh_c);
        if (cache) {
          cache->steps[d][s] = {std::move(i), std::move(f), std::move(o), std::move(g), std::move(tanh_c), h, c};
        }
        h = std::move(h_next);
        c = std::move(c_next);
      }
      out.middleCols(static_cast<Index>(d * H), h_cols) = h;
    }
    return out;
  }

  Mat<S> average_pool(const Mat<S>& features, std::size_t B, std::size_t T) const {
    Mat<S> out = Mat<S>::Zero(static_cast<Index>(B), features.cols());
    for (std::size_t t = 0; t < T; ++t) out += features.middleRows(static_cast<Index>(t * B), static_cast<Index>(B));
    return out / static_cast<S>(T);
  }

  Mat<S> head(const Mat<S>& input) const {
    const std::size_t in = static_cast<std::size_t>(input.cols());
    Mat<S> logits = input * mat(p, off.head_w, kNumClasses, in).transpose();
    logits.rowwise() += vec(p, off.head_b, kNumClasses);
    for (Index r = 0; r < logits.rows(); ++r) {
      const S peak = logits.row(r).maxCoeff();
      logits.row(r) = (logits.row(r).array() - peak).unaryExpr([](S v) { return std::exp(v); }).matrix();
      logits.row(r) /= logits.row(r).sum();
    }
    return logits;
  }

  Mat<S> run(std::span<const Sequence* const> xs, Cache<S>* cache) const {
    const std::size_t B = xs.size();
    Mat<S> features = inception(xs, cache);
    const std::size_t T = static_cast<std::size_t>(features.rows()) / B;
    Mat<S> head_input = arch.kind == ModelKind::Hybrid ? recurrent(features, B, T, cache) : average_pool(features, B, T);
    Mat<S> probs = head(head_input);
    if (cache) {
      cache->features = std::move(features);
      cache->head_input = std::move(head_input);
      cache->probs = probs;
    }
    return probs;
  }
};

std::vector<double> backward(const Architecture& arch, const Offsets& off, std::span<const double> p,
                             const Cache<double>& cache, std::span<const int> labels) {
  using M = Mat<double>;
  std::vector<double> grad(p.size(), 0.0);
  auto gmat = [&](std::size_t offset, std::size_t rows, std::size_t cols) {
    return Eigen::Map<M>(grad.data() + offset, static_cast<Index>(rows), static_cast<Index>(cols));
  };
  auto gvec = [&](std::size_t offset, std::size_t n) {
    return Eigen::Map<RowVec<double>>(grad.data() + offset, static_cast<Index>(n));
  };

  const std::size_t B = cache.batch, T = cache.time;
  const std::size_t F = arch.filters, Fp = arch.pool_filters, C = arch.input_channels;
  const std::size_t D = arch.feature_channels();
  const auto Bi = static_cast<Index>(B);

  M dlogits = cache.probs;
  for (std::size_t b = 0; b < B; ++b) dlogits(static_cast<Index>(b), labels[b]) -= 1.0;
  dlogits /= static_cast<double>(B);

  const std::size_t head_in = static_cast<std::size_t>(cache.head_input.cols());
  gmat(off.head_w, kNumClasses, head_in) = dlogits.transpose() * cache.head_input;
  gvec(off.head_b, kNumClasses) = dlogits.colwise().sum();
  const M dhead = dlogits * mat(p, off.head_w, kNumClasses, head_in);

  M dfeatures = M::Zero(static_cast<Index>(T * B), static_cast<Index>(D));
  if (arch.kind == ModelKind::Hybrid) {
    const std::size_t H = arch.hidden;
    const auto Hi = static_cast<Index>(H);
    for (int d = 0; d < 2; ++d) {
      const auto W = mat(p, off.lstm_w[d], 4 * H, D);
      const auto U = mat(p, off.lstm_u[d], 4 * H, H);
      auto dU = gmat(off.lstm_u[d], 4 * H, H);
      auto db = gvec(off.lstm_b[d], 4 * H);
      M dprojected = M::Zero(static_cast<Index>(T * B), static_cast<Index>(4 * H));
      M dh = dhead.middleCols(static_cast<Index>(d * H), Hi);
      M dc = M::Zero(Bi, Hi);
      M dgates(Bi, static_cast<Index>(4 * H));
      for (std::size_t s = T; s-- > 0;) {
        const std::size_t t = d == 0 ? s : T - 1 - s;
        const LstmStep<double>& st = cache.steps[d][s];
        const auto ones = M::Ones(Bi, Hi);
        dc += dh.cwiseProduct(st.o).cwiseProduct(ones - st.tanh_c.cwiseProduct(st.tanh_c));
        dgates.leftCols(Hi) = dc.cwiseProduct(st.g).cwiseProduct(st.i).cwiseProduct(ones - st.i);
        dgates.middleCols(Hi, Hi) = dc.cwiseProduct(st.c_prev).cwiseProduct(st.f).cwiseProduct(ones - st.f);
        dgates.middleCols(2 * Hi, Hi) = dh.cwiseProduct(st.tanh_c).cwiseProduct(st.o).cwiseProduct(ones - st.o);
        dgates.rightCols(Hi) = dc.cwiseProduct(st.i).cwiseProduct(ones - st.g.cwiseProduct(st.g));
        dU.noalias() += dgates.transpose() * st.h_prev;
        db += dgates.colwise().sum();
        dh.noalias() = dgates * U;
        dc = dc.cwiseProduct(st.f).eval();
        dprojected.middleRows(static_cast<Index>(t * B), Bi) = dgates;
      }
      gmat(off.lstm_w[d], 4 * H, D).noalias() = dprojected.transpose() * cache.features;
      dfeatures.noalias() += dprojected * W;
    }
  } else {
    const M share = dhead / static_cast<double>(T);
    for (std::size_t t = 0; t < T; ++t) dfeatures.middleRows(static_cast<Index>(t * B), Bi) = share;
  }

  const auto relu_mask = [](const M& z) { return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }); };
  for (int k = 0; k < 3; ++k) {
    const std::size_t width = arch.kernels[k];
    const M dz =
        dfeatures.middleCols(static_cast<Index>(k * F), static_cast<Index>(F)).cwiseProduct(relu_mask(cache.conv_z[k]));
    auto dW = gmat(off.conv_w[k], F, width * C);
    for (std::size_t j = 0; j < width; ++j) {
      const TapRange r = tap_range(j, width, T, B);
      if (r.count == 0) continue;
      dW.middleCols(static_cast<Index>(j * C), static_cast<Index>(C)).noalias() =
          dz.middleRows(r.out, r.count).transpose() * cache.input.middleRows(r.in, r.count);
    }
    gvec(off.conv_b[k], F) = dz.colwise().sum();
  }
  const M dpool =
      dfeatures.middleCols(static_cast<Index>(3 * F), static_cast<Index>(Fp)).cwiseProduct(relu_mask(cache.pool_z));
  gmat(off.pool_w, Fp, C).noalias() = dpool.transpose() * cache.pooled;
  gvec(off.pool_b, Fp) = dpool.colwise().sum();
  return grad;
}

}  // namespace

Sequence to_sequence(const DopplerTrace& trace) {
  Sequence s(static_cast<Index>(trace.time_bins), static_cast<Index>(trace.velocity_bins));
  for (std::size_t t = 0; t < trace.time_bins; ++t)
    for (std::size_t v = 0; v < trace.velocity_bins; ++v)
      s(static_cast<Index>(t), static_cast<Index>(v)) = static_cast<double>(trace.at(t, v));
  return s;
}

void validate(const Architecture& arch) {
  require(arch.input_channels >= 1 && arch.filters >= 1 && arch.pool_filters >= 1, ErrorKind::InvariantViolation,
          "network sizes must be positive");
  require(arch.kind == ModelKind::InceptionOnly || arch.hidden >= 1, ErrorKind::InvariantViolation,
          "network.hidden must be positive");
  for (std::size_t k : arch.kernels)
    require(k % 2 == 1, ErrorKind::InvariantViolation, "inception kernels must be odd-sized");
}

std::size_t ParamBlock::size() const noexcept { return element_count(shape); }

std::vector<ParamBlock> parameter_layout(const Architecture& arch) {
  validate(arch);
  std::vector<ParamBlock> blocks;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::vector<std::size_t> shape) {
    ParamBlock b{std::move(name), std::move(shape), offset};
    offset += b.size();
    blocks.push_back(std::move(b));
  };
  const std::size_t C = arch.input_channels, F = arch.filters, Fp = arch.pool_filters;
  for (std::size_t k : arch.kernels) {
    add("inception.conv" + std::to_string(k) + ".weight", {F, k * C});
    add("inception.conv" + std::to_string(k) + ".bias", {F});
  }
  add("inception.pool.weight", {Fp, C});
  add("inception.pool.bias", {Fp});
  const std::size_t D = arch.feature_channels();
  std::size_t head_in = D;
  if (arch.kind == ModelKind::Hybrid) {
    const std::size_t H = arch.hidden;
    for (const char* dir : {"fwd", "bwd"}) {
      add(std::string("lstm.") + dir + ".W", {4 * H, D});
      add(std::string("lstm.") + dir + ".U", {4 * H, H});
      add(std::string("lstm.") + dir + ".b", {4 * H});
    }
    head_in = 2 * H;
  }
  add("head.weight", {static_cast<std::size_t>(kNumClasses), head_in});
  add("head.bias", {static_cast<std::size_t>(kNumClasses)});
  return blocks;
}

Network::Network(Architecture arch) : arch_(arch), blocks_(parameter_layout(arch)) {
  params_.assign(blocks_.back().offset + blocks_.back().size(), 0.0);
}

Network Network::initialized(Architecture arch, std::uint64_t seed) {
  Network net(arch);
  std::mt19937_64 rng(derive_seed(seed, {0x1e17}));
  for (const ParamBlock& b : net.blocks_) {
    auto values = net.params().subspan(b.offset, b.size());
    if (b.shape.size() == 2) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(b.shape[1]));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (double& v : values) v = dist(rng);
    } else if (b.name.starts_with("lstm.") && b.name.ends_with(".b")) {
      const std::size_t H = arch.hidden;
      std::fill(values.begin() + static_cast<std::ptrdiff_t>(H), values.begin() + static_cast<std::ptrdiff_t>(2 * H),
                1.0);
    }
  }
  return net;
}

const ParamBlock& Network::block(std::string_view name) const {
  for (const ParamBlock& b : blocks_)
    if (b.name == name) return b;
  fail(ErrorKind::ShapeMismatch, "network has no parameter block '" + std::string(name) + "'");
}

Tensor inception_forward(const Network& net, const Sequence& input) {
  const Offsets off = offsets_of(net.blocks(), net.arch());
  const Sequence* xs[] = {&input};
  const Forward<double> fwd{net.arch(), off, net.params()};
  return to_tensor(fwd.inception(xs, nullptr));
}

Probabilities bilstm_forward(const Network& net, const Tensor& features) {
  require(net.arch().kind == ModelKind::Hybrid, ErrorKind::ShapeMismatch, "bilstm_forward needs a hybrid network");
  require(features.rank() == 2 && features.shape[1] == net.arch().feature_channels() && features.shape[0] >= 1,
          ErrorKind::ShapeMismatch, "feature tensor does not match the BiLSTM input size");
  const Offsets off = offsets_of(net.blocks(), net.arch());
  const Forward<double> fwd{net.arch(), off, net.params()};
  const RowMatrix m = to_matrix(features);
  const RowMatrix probs = fwd.head(fwd.recurrent(m, 1, features.shape[0], nullptr));
  Probabilities out{};
  for (int k = 0; k < kNumClasses; ++k) out[k] = probs(0, k);
  return out;
}

Probabilities predict_proba(const Network& net, const Sequence& input) {
  return predict_proba(net, std::span<const Sequence>(&input, 1)).front();
}

std::vector<Probabilities> predict_proba(const Network& net, std::span<const Sequence> inputs, int threads) {
  const Offsets off = offsets_of(net.blocks(), net.arch());
  const Forward<double> fwd{net.arch(), off, net.params()};
  std::vector<Probabilities> out(inputs.size());
  // Fixed chunking keeps results independent of the thread count.
  constexpr std::size_t kChunk = 32;
  const std::size_t chunks = (inputs.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t ci) {
    const std::size_t begin = ci * kChunk, end = std::min(inputs.size(), begin + kChunk);
    // Sequences of different lengths cannot share a batch.
    std::size_t i = begin;
    while (i < end) {
      std::size_t j = i + 1;
      while (j < end && inputs[j].rows() == inputs[i].rows()) ++j;
      std::vector<const Sequence*> xs;
      for (std::size_t k = i; k < j; ++k) xs.push_back(&inputs[k]);
      const RowMatrix probs = fwd.run(xs, nullptr);
      for (std::size_t k = i; k < j; ++k)
        for (int c = 0; c < kNumClasses; ++c) out[k][c] = probs(static_cast<Index>(k - i), c);
      i = j;
    }
  });
  return out;
}

LossAndGradient loss_and_gradient(const Network& net, std::span<const Sequence* const> inputs,
                                  std::span<const int> labels) {
  require(!inputs.empty() && inputs.size() == labels.size(), ErrorKind::ShapeMismatch,
          "batch inputs and labels differ in length");
  for (int y : labels) require(y >= 0 && y < kNumClasses, ErrorKind::InvariantViolation, "label outside 0..4");
  const Offsets off = offsets_of(net.blocks(), net.arch());
  const Forward<double> fwd{net.arch(), off, net.params()};
  Cache<double> cache;
  const RowMatrix probs = fwd.run(inputs, &cache);
  LossAndGradient out;
  out.per_example_loss.resize(inputs.size());
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    out.per_example_loss[b] = -std::log(probs(static_cast<Index>(b), labels[b]));
    out.loss += out.per_example_loss[b];
  }
  out.loss /= static_cast<double>(inputs.size());
  out.gradient = backward(net.arch(), off, net.params(), cache, labels);
  return out;
}

long double loss_extended(const Architecture& arch, std::span<const long double> params, const Sequence& input,
                          int label) {
  const std::vector<ParamBlock> blocks = parameter_layout(arch);
  const Offsets off = offsets_of(blocks, arch);
  const Forward<long double> fwd{arch, off, params};
  const Sequence* xs[] = {&input};
  const Mat<long double> probs = fwd.run(xs, nullptr);
  return -std::log(probs(0, label));
}

double grad_check(const Network& net, const LabeledSequence& sample, const GradientMutator& mutate) {
  constexpr long double kEps = 1e-5L;
  const Sequence* xs[] = {&sample.input};
  const int labels[] = {sample.label};
  std::vector<double> analytic = loss_and_gradient(net, xs, labels).gradient;
  if (mutate) mutate(net, analytic);

  std::vector<long double> params(net.params().begin(), net.params().end());
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const long double saved = params[i];
    params[i] = saved + kEps;
    const long double up = loss_extended(net.arch(), params, sample.input, sample.label);
    params[i] = saved - kEps;
    const long double down = loss_extended(net.arch(), params, sample.input, sample.label);
    params[i] = saved;
    const double numeric = static_cast<double>((up - down) / (2.0L * kEps));
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace ibis
