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
#include <string>
#include <utility>
#include <vector>

#include "spcl/clustering/kmeans.hpp"
#include "spcl/core/config.hpp"
#include "spcl/core/rng.hpp"
#include "spcl/data/dataset.hpp"

namespace spcl {

/// q value meaning "every sample outside cluster p".
inline constexpr int kMixtureMarker = -1;

/// Anchor clusters need a second member for intra-prototype pairing.
inline constexpr std::size_t kMinAnchorClusterSize = 2;

/// Member lists of a PrototypeTable, built once per epoch.
class ClusterIndex {
 public:
  explicit ClusterIndex(const PrototypeTable& table);

  std::size_t num_clusters() const noexcept { return members_.size(); }
  std::size_t num_samples() const noexcept { return assignment_.size(); }
  const std::vector<std::size_t>& members(int cluster) const { return members_.at(static_cast<std::size_t>(cluster)); }
  int cluster_of(std::size_t sample) const { return assignment_.at(sample); }
  /// Clusters with at least kMinAnchorClusterSize members, ascending.
  const std::vector<int>& eligible() const noexcept { return eligible_; }

 private:
  std::vector<int> assignment_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<int> eligible_;
};

struct StepBatch {
  int p = 0;
  int q = kMixtureMarker;
  std::vector<std::size_t> idx_p;
  std::vector<std::size_t> idx_q;
};

/// Two augmented views per sample. Sample slot s (p samples first, then q
/// samples) owns views 2s and 2s+1, so sibling[v] = v ^ 1.
struct ViewBatch {
  ImageBatch views;
  std::vector<std::size_t> sample_id;  // per view
  std::vector<int> sample_slot;        // per view
  std::vector<int> source_proto;       // per view: cluster of the sample
  std::vector<int> sibling;            // per view
  std::vector<std::uint8_t> in_anchor_group;  // per view: 1 when it belongs to the p batch

  std::size_t size() const noexcept { return views.count; }
};

/// p uniform over eligible clusters; q uniform over the other eligible
/// clusters (SingleQ) or kMixtureMarker (MixedQ). Throws DataError when
/// fewer than two clusters are eligible.
std::pair<int, int> choose_prototype_pair(const ClusterIndex& index, RandomStream& rng, ProtoSamplingMode mode);

/// n ids from cluster p and n ids from cluster q (or from all samples
/// outside p for the mixture marker). A pool of at least n ids is drawn
/// without replacement, a smaller one with replacement.
StepBatch sample_step_batch(const ClusterIndex& index, int p, int q, std::size_t n, RandomStream& rng);

/// Builds the view batch for a step. The view of slot s, view v uses the
/// stream derive_rng(seed, label_prefix + "/" + s + "/" + v), so views can
/// be produced in any order. Corrupt samples raise DataError naming the id.
ViewBatch make_views(const Dataset& data, const StepBatch& step, const ClusterIndex& index,
                     const AugmentationSpec& aug, std::uint64_t seed, const std::string& label_prefix);

/// Generic form: views for an arbitrary list of samples, the first
/// `anchor_count` of which form the anchor group.
ViewBatch make_views(const Dataset& data, const std::vector<std::size_t>& samples,
                     const std::vector<int>& source_proto, std::size_t anchor_count, const AugmentationSpec& aug,
                     std::uint64_t seed, const std::string& label_prefix);

/// ceil(n_samples / batch_size) unless the config overrides it.
int steps_per_epoch(const TrainConfig& config, std::size_t n_samples);

}  // namespace spcl
