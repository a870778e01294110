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

#include "spcl/eval/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spcl/data/augment.hpp"

namespace spcl {
namespace {

struct Welford {
  std::size_t n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stddev() const { return n > 0 ? std::sqrt(m2 / static_cast<double>(n)) : 0.0; }
};

}  // namespace

template <class T>
AnchorSimilarities anchor_similarities(const Matrix<T>& z, std::span<const int> sibling,
                                       std::span<const int> sample_slot, std::span<const int> labels) {
  const std::size_t v = z.rows(), d = z.cols();
  if (sibling.size() != v || sample_slot.size() != v || labels.size() != v) {
    throw ShapeError("anchor_similarities: metadata length mismatch");
  }
  Matrix<double> zh(v, d);
  for (std::size_t i = 0; i < v; ++i) {
    double s = 0.0;
    for (T x : z.row(i)) s += static_cast<double>(x) * x;
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("anchor_similarities: zero or non-finite projection");
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t e = 0; e < d; ++e) zh(i, e) = z(i, e) * inv;
  }
  auto cos = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t e = 0; e < d; ++e) s += zh(a, e) * zh(b, e);
    return s;
  };
  AnchorSimilarities out;
  out.tp.resize(v);
  out.fn.resize(v);
  for (std::size_t i = 0; i < v; ++i) {
    out.tp[i] = cos(i, static_cast<std::size_t>(sibling[i]));
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < v; ++k) {
      if (sample_slot[k] == sample_slot[i] || labels[k] != labels[i]) continue;
      sum += cos(i, k);
      ++cnt;
    }
    out.fn[i] = cnt > 0 ? sum / static_cast<double>(cnt) : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

DistanceReport summarize_similarities(const AnchorSimilarities& s, int epoch, double tau) {
  DistanceReport r;
  r.epoch = epoch;
  r.tau = tau;
  Welford tp, fn;
  for (double v : s.tp) tp.add(v);
  for (double v : s.fn) {
    if (std::isnan(v)) {
      ++r.n_skipped;
    } else {
      fn.add(v);
    }
  }
  r.n_anchors = tp.n;
  r.n_fn_anchors = fn.n;
  r.tp_mean = tp.mean;
  r.tp_std = tp.stddev();
  r.fn_mean = fn.mean;
  r.fn_std = fn.stddev();
  return r;
}

template <class T>
DistanceReport tp_fn_distances(ModelBundle<T>& bundle, const Dataset& data, const AugmentationSpec& aug,
                               std::uint64_t seed, std::size_t batch_size, int epoch, double tau) {
  if (data.empty()) throw DataError("tp_fn_distances: empty evaluation set");
  if (batch_size < 2) throw ShapeError("tp_fn_distances: batch size must be at least 2");
  AnchorSimilarities all;
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(data.size(), begin + batch_size);
    const std::size_t n = end - begin;
    ImageBatch views(data.shape(), 2 * n);
    std::vector<int> sibling(2 * n), slot(2 * n), labels(2 * n);
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t id = begin + s;
      for (std::size_t k = 0; k < 2; ++k) {
        const std::size_t v = 2 * s + k;
        RandomStream rng = derive_rng(seed, "eval/" + std::to_string(id) + "/" + std::to_string(k));
        augment_image(aug, data.shape(), data.image(id), views.image(v), rng);
        sibling[v] = static_cast<int>(v ^ 1);
        slot[v] = static_cast<int>(s);
        labels[v] = data.label(id);
      }
    }
    const Matrix<T> h = bundle.encoder->forward(views, false);
    const Matrix<T> z = bundle.head_c.forward(h);
    AnchorSimilarities part = anchor_similarities(z, sibling, slot, labels);
    all.tp.insert(all.tp.end(), part.tp.begin(), part.tp.end());
    all.fn.insert(all.fn.end(), part.fn.begin(), part.fn.end());
  }
  return summarize_similarities(all, epoch, tau);
}

template AnchorSimilarities anchor_similarities<float>(const Matrix<float>&, std::span<const int>, std::span<const int>,
                                                       std::span<const int>);
template AnchorSimilarities anchor_similarities<double>(const Matrix<double>&, std::span<const int>,
                                                        std::span<const int>, std::span<const int>);
template DistanceReport tp_fn_distances<float>(ModelBundle<float>&, const Dataset&, const AugmentationSpec&,
                                               std::uint64_t, std::size_t, int, double);
template DistanceReport tp_fn_distances<double>(ModelBundle<double>&, const Dataset&, const AugmentationSpec&,
                                                std::uint64_t, std::size_t, int, double);

}  // namespace spcl
