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

#include "spcl/clustering/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "spcl/data/augment.hpp"
#include "spcl/simd/kernels.hpp"

namespace spcl {
namespace {

double sqdist(std::span<const float> x, const Matrix<double>& c, std::size_t k) {
  double s = 0.0;
  const double* row = c.data() + k * c.cols();
  for (std::size_t e = 0; e < x.size(); ++e) {
    const double d = static_cast<double>(x[e]) - row[e];
    s += d * d;
  }
  return s;
}

// One assignment pass. The float kernel proposes the nearest centroid; a
// move is only accepted when the double-precision distance strictly
// improves, so every pass is exactly SSE non-increasing and ties keep the
// current cluster. Returns the number of moved samples.
std::size_t assign(const FeatureMatrix& f, const Matrix<double>& centroids, std::vector<int>& assignment) {
  const std::size_t n = f.size(), k = centroids.rows(), d = f.dim();
  const Matrix<float> cf = centroids.cast<float>();
  std::size_t moved = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const float* x = f.rows.data() + i * d;
    std::size_t best = 0;
    float best_d = std::numeric_limits<float>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const float dist = simd::ssqdist(d, x, cf.data() + c * d);
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    const int cur = assignment[i];
    if (cur < 0) {
      // First pass: resolve the float proposal exactly among all centroids.
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = sqdist(f.rows.row(i), centroids, c);
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      assignment[i] = static_cast<int>(best);
      ++moved;
      continue;
    }
    if (static_cast<int>(best) == cur) continue;
    if (sqdist(f.rows.row(i), centroids, best) < sqdist(f.rows.row(i), centroids, static_cast<std::size_t>(cur))) {
      assignment[i] = static_cast<int>(best);
      ++moved;
    }
  }
  return moved;
}

// Means of the non-empty clusters; empty clusters keep their centroid.
// Returns the largest Euclidean shift.
double update_centroids(const FeatureMatrix& f, const std::vector<int>& assignment, Matrix<double>& centroids) {
  const std::size_t k = centroids.rows(), d = f.dim();
  Matrix<double> sum(k, d);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::size_t c = static_cast<std::size_t>(assignment[i]);
    ++count[c];
    for (std::size_t e = 0; e < d; ++e) sum(c, e) += f.rows(i, e);
  }
  double max_shift = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    double shift = 0.0;
    for (std::size_t e = 0; e < d; ++e) {
      const double m = sum(c, e) / static_cast<double>(count[c]);
      shift += (m - centroids(c, e)) * (m - centroids(c, e));
      centroids(c, e) = m;
    }
    max_shift = std::max(max_shift, std::sqrt(shift));
  }
  return max_shift;
}

Matrix<double> kmeanspp_init(const FeatureMatrix& f, std::size_t k, RandomStream& rng) {
  const std::size_t n = f.size(), d = f.dim();
  Matrix<double> c(k, d);
  auto set_center = [&](std::size_t slot, std::size_t sample) {
    for (std::size_t e = 0; e < d; ++e) c(slot, e) = f.rows(sample, e);
  };
  set_center(0, static_cast<std::size_t>(rng.below(n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sqdist(f.rows.row(i), c, 0);
  for (std::size_t slot = 1; slot < k; ++slot) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    set_center(slot, pick);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sqdist(f.rows.row(i), c, slot));
  }
  return c;
}

}  // namespace

std::vector<std::size_t> PrototypeTable::cluster_sizes() const {
  std::vector<std::size_t> sizes(num_clusters(), 0);
  for (int a : assignment) ++sizes.at(static_cast<std::size_t>(a));
  return sizes;
}

FeatureMatrix make_feature_matrix(Matrix<float> rows, bool normalize) {
  FeatureMatrix f;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto r = rows.row(i);
    double s = 0.0;
    for (float v : r) {
      if (!std::isfinite(v)) throw NumericError("non-finite feature for sample " + std::to_string(i));
      s += static_cast<double>(v) * v;
    }
    if (normalize) {
      if (s == 0.0) throw NumericError("zero feature vector for sample " + std::to_string(i));
      const double inv = 1.0 / std::sqrt(s);
      for (float& v : r) v = static_cast<float>(v * inv);
    }
  }
  f.sample_ids.resize(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) f.sample_ids[i] = i;
  f.rows = std::move(rows);
  f.normalized = normalize;
  return f;
}

template <class T>
FeatureMatrix extract_epoch_features(const Dataset& data, nn::Encoder<T>& encoder, const AugmentationSpec& aug,
                                     std::uint64_t seed, const std::string& label_prefix, std::size_t batch_size) {
  if (data.empty()) throw DataError("extract_epoch_features: empty dataset");
  if (batch_size == 0) throw ShapeError("extract_epoch_features: batch size must be positive");
  const std::size_t n = data.size();
  const std::size_t d = encoder.output_dim();
  Matrix<float> rows(n, d);
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t end = std::min(n, begin + batch_size);
    ImageBatch batch(data.shape(), end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      RandomStream rng = derive_rng(seed, label_prefix + "/" + std::to_string(i));
      try {
        augment_image(aug, data.shape(), data.image(i), batch.image(i - begin), rng);
      } catch (const DataError& e) {
        throw DataError("sample " + std::to_string(i) + ": " + e.what());
      }
    }
    const Matrix<T> h = encoder.forward(batch, false);
    for (std::size_t r = 0; r < h.rows(); ++r) {
      for (std::size_t e = 0; e < d; ++e) {
        const T v = h(r, e);
        if (!std::isfinite(v)) throw NumericError("non-finite activation for sample " + std::to_string(begin + r));
        rows(begin + r, e) = static_cast<float>(v);
      }
    }
  }
  return make_feature_matrix(std::move(rows), true);
}

double clustering_sse(const PrototypeTable& table, const FeatureMatrix& features) {
  double s = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    s += sqdist(features.rows.row(i), table.centroids, static_cast<std::size_t>(table.assignment[i]));
  }
  return s;
}

PrototypeTable kmeans(const FeatureMatrix& features, int k, RandomStream& rng, int max_iter, double tol) {
  if (k < 1) throw ShapeError("kmeans: K must be positive");
  const std::size_t n = features.size();
  if (n < static_cast<std::size_t>(k)) {
    throw ShapeError("kmeans: " + std::to_string(n) + " samples cannot fill " + std::to_string(k) + " clusters");
  }
  if (features.dim() == 0) throw ShapeError("kmeans: zero-dimensional features");
  PrototypeTable t;
  t.centroids = kmeanspp_init(features, static_cast<std::size_t>(k), rng);
  t.assignment.assign(n, -1);
  assign(features, t.centroids, t.assignment);
  t.sse_history.push_back(clustering_sse(t, features));
  for (int it = 0; it < max_iter; ++it) {
    const double shift = update_centroids(features, t.assignment, t.centroids);
    assign(features, t.centroids, t.assignment);
    t.sse_history.push_back(clustering_sse(t, features));
    t.iterations = it + 1;
    if (shift < tol || shift == 0.0) {
      t.converged = true;
      break;
    }
  }
  t = repair_empty_clusters(std::move(t), features);
  t.sse = clustering_sse(t, features);
  return t;
}

PrototypeTable repair_empty_clusters(PrototypeTable table, const FeatureMatrix& features) {
  const std::size_t k = table.num_clusters(), n = features.size();
  if (table.assignment.size() != n) throw ShapeError("repair_empty_clusters: assignment size mismatch");
  if (k > n) throw ShapeError("repair_empty_clusters: more clusters than samples");
  bool changed = false;
  for (std::size_t round = 0; round <= n; ++round) {
    std::vector<std::size_t> sizes = table.cluster_sizes();
    auto empty = std::find(sizes.begin(), sizes.end(), std::size_t{0});
    if (empty == sizes.end()) {
      if (changed) table.sse = clustering_sse(table, features);
      return table;
    }
    changed = true;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      const std::size_t big = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      if (sizes[big] < 2) throw ShapeError("repair_empty_clusters: no cluster can donate a sample");
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (table.assignment[i] != static_cast<int>(big)) continue;
        const double dd = sqdist(features.rows.row(i), table.centroids, big);
        if (dd > far_d) {
          far_d = dd;
          far = i;
        }
      }
      for (std::size_t e = 0; e < features.dim(); ++e) table.centroids(c, e) = features.rows(far, e);
      table.assignment[far] = static_cast<int>(c);
      --sizes[big];
      sizes[c] = 1;
    }
    assign(features, table.centroids, table.assignment);
  }
  throw ShapeError("repair_empty_clusters: did not converge");
}

void write_assignments(const PrototypeTable& table, const FeatureMatrix& features, std::ostream& out) {
  out << "sample_id,cluster\n";
  for (std::size_t i = 0; i < table.assignment.size(); ++i) {
    out << features.sample_ids.at(i) << ',' << table.assignment[i] << '\n';
  }
}

template FeatureMatrix extract_epoch_features<float>(const Dataset&, nn::Encoder<float>&, const AugmentationSpec&,
                                                     std::uint64_t, const std::string&, std::size_t);
template FeatureMatrix extract_epoch_features<double>(const Dataset&, nn::Encoder<double>&, const AugmentationSpec&,
                                                      std::uint64_t, const std::string&, std::size_t);

}  // namespace spcl
