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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spcl/common/matrix.hpp"
#include "spcl/core/config.hpp"
#include "spcl/core/rng.hpp"
#include "spcl/data/dataset.hpp"
#include "spcl/nn/encoder.hpp"

namespace spcl {

/// One feature row per dataset sample.
struct FeatureMatrix {
  Matrix<float> rows;
  std::vector<std::size_t> sample_ids;
  bool normalized = false;

  std::size_t size() const noexcept { return rows.rows(); }
  std::size_t dim() const noexcept { return rows.cols(); }
};

/// Result of one epoch's clustering: centroids plus the cluster of every sample.
struct PrototypeTable {
  Matrix<double> centroids;     // K x d
  std::vector<int> assignment;  // per sample, in [0, K)
  int epoch = 0;
  double sse = 0.0;
  std::vector<double> sse_history;  // SSE after each assignment pass of Lloyd's loop
  int iterations = 0;
  bool converged = false;

  std::size_t num_clusters() const noexcept { return centroids.rows(); }
  std::vector<std::size_t> cluster_sizes() const;
};

/// Builds a FeatureMatrix from raw rows (normalizing when asked). Throws
/// NumericError naming the sample on non-finite or zero-norm rows.
FeatureMatrix make_feature_matrix(Matrix<float> rows, bool normalize);

/// Runs the encoder in inference mode over one augmentation draw per sample
/// (stream derive_rng(seed, label_prefix + "/" + sample id)) and returns
/// L2-normalized rows.
template <class T>
FeatureMatrix extract_epoch_features(const Dataset& data, nn::Encoder<T>& encoder, const AugmentationSpec& aug,
                                     std::uint64_t seed, const std::string& label_prefix,
                                     std::size_t batch_size = 256);

/// k-means++ seeding followed by Lloyd's iterations until the largest
/// centroid shift is below tol or max_iter passes ran. On distance ties a
/// sample keeps its current cluster. Empty clusters are repaired before
/// returning. Throws ShapeError when n < K.
PrototypeTable kmeans(const FeatureMatrix& features, int k, RandomStream& rng, int max_iter = 100,
                      double tol = 1e-4);

/// Re-seeds every empty cluster at the sample of the currently largest
/// cluster that lies farthest from that cluster's centroid, then reassigns
/// all samples; repeats until no cluster is empty. Tables without empty
/// clusters are returned unchanged. Deterministic (lowest sample id wins ties).
PrototypeTable repair_empty_clusters(PrototypeTable table, const FeatureMatrix& features);

/// Squared Euclidean distance of each sample to its assigned centroid, summed.
double clustering_sse(const PrototypeTable& table, const FeatureMatrix& features);

/// "sample_id,cluster" lines with a header.
void write_assignments(const PrototypeTable& table, const FeatureMatrix& features, std::ostream& out);

}  // namespace spcl
