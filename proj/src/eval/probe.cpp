// Copyright (c) 2026, The SPCL Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spcl/eval/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spcl/simd/kernels.hpp"

namespace spcl {

template <class T>
Matrix<float> embed_dataset(nn::Encoder<T>& encoder, const Dataset& data, std::size_t batch_size) {
  if (batch_size == 0) throw ShapeError("embed_dataset: batch size must be positive");
  Matrix<float> out(data.size(), encoder.output_dim());
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(data.size(), begin + batch_size);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Matrix<T> h = encoder.forward(data.gather(idx), false);
    for (std::size_t r = 0; r < h.rows(); ++r) {
      for (std::size_t e = 0; e < h.cols(); ++e) {
        if (!std::isfinite(h(r, e))) throw NumericError("non-finite embedding for sample " + std::to_string(begin + r));
        out(begin + r, e) = static_cast<float>(h(r, e));
      }
    }
  }
  return out;
}

ProbeResult linear_probe_features(const Matrix<float>& train_x, std::span<const int> train_y,
                                  const Matrix<float>& test_x, std::span<const int> test_y,
                                  const ProbeConfig& config, std::uint64_t seed) {
  const std::size_t n = train_x.rows(), d = train_x.cols();
  if (n == 0 || test_x.rows() == 0) throw DataError("linear probe needs non-empty train and test splits");
  if (train_y.size() != n || test_y.size() != test_x.rows()) throw ShapeError("linear probe: label count mismatch");
  if (test_x.cols() != d) throw ShapeError("linear probe: feature width mismatch");
  int classes = 0;
  for (int y : train_y) {
    if (y < 0) throw DataError("linear probe: negative label");
    classes = std::max(classes, y + 1);
  }
  std::vector<bool> seen(static_cast<std::size_t>(classes), false);
  for (int y : train_y) seen[static_cast<std::size_t>(y)] = true;
  for (int y : test_y) {
    if (y < 0 || y >= classes || !seen[static_cast<std::size_t>(y)]) {
      throw DataError("linear probe: class " + std::to_string(y) + " absent from the training split");
    }
  }
  const std::size_t k = static_cast<std::size_t>(classes);

  std::vector<double> mean(d, 0.0), inv_std(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = 0; e < d; ++e) mean[e] += train_x(i, e);
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = 0; e < d; ++e) inv_std[e] += (train_x(i, e) - mean[e]) * (train_x(i, e) - mean[e]);
  for (auto& s : inv_std) {
    const double sd = std::sqrt(s / static_cast<double>(n));
    s = sd > 1e-8 ? 1.0 / sd : 0.0;
  }
  auto standardize = [&](const Matrix<float>& x) {
    Matrix<float> out(x.rows(), d);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t e = 0; e < d; ++e) out(i, e) = static_cast<float>((x(i, e) - mean[e]) * inv_std[e]);
    return out;
  };
  const Matrix<float> xs = standardize(train_x);
  const Matrix<float> xt = standardize(test_x);

  std::vector<float> w(k * d, 0.0f), b(k, 0.0f), vw(k * d, 0.0f), vb(k, 0.0f), gw(k * d), gb(k);
  const std::size_t bs = static_cast<std::size_t>(std::max(1, config.batch_size));
  const std::size_t steps_per_epoch = (n + bs - 1) / bs;
  const std::size_t total = steps_per_epoch * static_cast<std::size_t>(std::max(1, config.epochs));
  std::vector<std::size_t> order(n);
  Matrix<float> xb, logits;
  std::size_t step = 0;
  for (int ep = 0; ep < config.epochs; ++ep) {
    std::iota(order.begin(), order.end(), 0);
    RandomStream rng = derive_rng(seed, "probe/" + std::to_string(ep));
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t begin = 0; begin < n; begin += bs, ++step) {
      const std::size_t m = std::min(n, begin + bs) - begin;
      xb.resize(m, d);
      for (std::size_t r = 0; r < m; ++r) std::copy_n(xs.row(order[begin + r]).data(), d, xb.row(r).data());
      logits.resize(m, k);
      simd::sgemm(false, true, m, k, d, 1.0f, xb.data(), d, w.data(), d, 0.0f, logits.data(), k);
      for (std::size_t r = 0; r < m; ++r) {
        auto row = logits.row(r);
        double mx = -1e300, s = 0.0;
        for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, static_cast<double>(row[c] + b[c]));
        for (std::size_t c = 0; c < k; ++c) s += std::exp(row[c] + b[c] - mx);
        const std::size_t y = static_cast<std::size_t>(train_y[order[begin + r]]);
        for (std::size_t c = 0; c < k; ++c) {
          const double p = std::exp(row[c] + b[c] - mx) / s;
          row[c] = static_cast<float>((p - (c == y ? 1.0 : 0.0)) / static_cast<double>(m));
        }
      }
      simd::sgemm(true, false, k, d, m, 1.0f, logits.data(), k, xb.data(), d, 0.0f, gw.data(), d);
      std::fill(gb.begin(), gb.end(), 0.0f);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < k; ++c) gb[c] += logits(r, c);
      const double lr = config.lr * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(total)));
      for (std::size_t j = 0; j < w.size(); ++j) {
        vw[j] = static_cast<float>(config.momentum * vw[j] + gw[j] + config.weight_decay * w[j]);
        w[j] = static_cast<float>(w[j] - lr * vw[j]);
      }
      for (std::size_t c = 0; c < k; ++c) {
        vb[c] = static_cast<float>(config.momentum * vb[c] + gb[c]);
        b[c] = static_cast<float>(b[c] - lr * vb[c]);
      }
    }
  }

  std::size_t hit1 = 0, hit5 = 0;
  const std::size_t nt = xt.rows();
  Matrix<float> tl(nt, k);
  simd::sgemm(false, true, nt, k, d, 1.0f, xt.data(), d, w.data(), d, 0.0f, tl.data(), k);
  for (std::size_t r = 0; r < nt; ++r) {
    const std::size_t y = static_cast<std::size_t>(test_y[r]);
    const float sy = tl(r, y) + b[y];
    // rank = number of classes scoring strictly higher; ties resolved toward the lower index
    std::size_t rank = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const float sc = tl(r, c) + b[c];
      if (sc > sy || (sc == sy && c < y)) ++rank;
    }
    if (rank == 0) ++hit1;
    if (rank < 5) ++hit5;
  }
  ProbeResult res;
  res.n_train = n;
  res.n_test = nt;
  res.top1 = 100.0 * static_cast<double>(hit1) / static_cast<double>(nt);
  res.top5 = 100.0 * static_cast<double>(hit5) / static_cast<double>(nt);
  return res;
}

template <class T>
ProbeResult linear_probe(nn::Encoder<T>& encoder, const Dataset& train, const Dataset& test,
                         const ProbeConfig& config, std::uint64_t seed) {
  const Matrix<float> a = embed_dataset(encoder, train);
  const Matrix<float> b = embed_dataset(encoder, test);
  return linear_probe_features(a, train.labels(), b, test.labels(), config, seed);
}

template Matrix<float> embed_dataset<float>(nn::Encoder<float>&, const Dataset&, std::size_t);
template Matrix<float> embed_dataset<double>(nn::Encoder<double>&, const Dataset&, std::size_t);
template ProbeResult linear_probe<float>(nn::Encoder<float>&, const Dataset&, const Dataset&, const ProbeConfig&,
                                         std::uint64_t);
template ProbeResult linear_probe<double>(nn::Encoder<double>&, const Dataset&, const Dataset&, const ProbeConfig&,
                                          std::uint64_t);

}  // namespace spcl
