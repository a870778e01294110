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
#include <span>
#include <vector>

#include "spcl/common/matrix.hpp"
#include "spcl/core/config.hpp"
#include "spcl/data/dataset.hpp"
#include "spcl/model/model.hpp"

namespace spcl {

/// True-positive / false-negative similarity statistics of one model state.
struct DistanceReport {
  int epoch = 0;
  double tau = 0.0;  // temperature of the run that produced the model
  double tp_mean = 0.0, tp_std = 0.0;
  double fn_mean = 0.0, fn_std = 0.0;
  std::size_t n_anchors = 0;     // views contributing a TP value
  std::size_t n_fn_anchors = 0;  // views with at least one same-label other-sample view
  std::size_t n_skipped = 0;     // views without such partners
};

/// Per-anchor similarities for one batch of projections: TP = cosine to the
/// sibling view; FN = mean cosine to the views of other samples with the
/// anchor's label (NaN when there are none).
struct AnchorSimilarities {
  std::vector<double> tp;
  std::vector<double> fn;
};

template <class T>
AnchorSimilarities anchor_similarities(const Matrix<T>& z, std::span<const int> sibling,
                                       std::span<const int> sample_slot, std::span<const int> labels);

/// Aggregates per-anchor values (in the given order) into a report.
DistanceReport summarize_similarities(const AnchorSimilarities& s, int epoch, double tau);

/// Runs f and g_c in inference mode over `data` in batches of `batch_size`
/// samples, two views each (stream derive_rng(seed, "eval/<id>/<view>")),
/// and aggregates TP/FN similarities within each batch.
template <class T>
DistanceReport tp_fn_distances(ModelBundle<T>& bundle, const Dataset& data, const AugmentationSpec& aug,
                               std::uint64_t seed, std::size_t batch_size, int epoch, double tau);

}  // namespace spcl
