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

#include "spcl/sampling/sampler.hpp"

#include <algorithm>

#include "spcl/data/augment.hpp"

namespace spcl {
namespace {

std::vector<std::size_t> draw(const std::vector<std::size_t>& pool, std::size_t n, RandomStream& rng) {
  std::vector<std::size_t> out;
  out.reserve(n);
  if (pool.size() >= n) {
    std::vector<std::size_t> work = pool;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(work.size() - i));
      std::swap(work[i], work[j]);
      out.push_back(work[i]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng.below(pool.size())]);
  }
  return out;
}

}  // namespace

ClusterIndex::ClusterIndex(const PrototypeTable& table)
    : assignment_(table.assignment), members_(table.num_clusters()) {
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    const int c = assignment_[i];
    if (c < 0 || static_cast<std::size_t>(c) >= members_.size()) {
      throw ShapeError("sample " + std::to_string(i) + " has an out-of-range cluster");
    }
    members_[static_cast<std::size_t>(c)].push_back(i);
  }
  for (std::size_t c = 0; c < members_.size(); ++c) {
    if (members_[c].size() >= kMinAnchorClusterSize) eligible_.push_back(static_cast<int>(c));
  }
}

std::pair<int, int> choose_prototype_pair(const ClusterIndex& index, RandomStream& rng, ProtoSamplingMode mode) {
  const auto& el = index.eligible();
  if (el.size() < 2) {
    throw DataError("need at least 2 clusters with >= " + std::to_string(kMinAnchorClusterSize) +
                    " members, found " + std::to_string(el.size()));
  }
  const std::size_t pi = static_cast<std::size_t>(rng.below(el.size()));
  const int p = el[pi];
  if (mode == ProtoSamplingMode::MixedQ) return {p, kMixtureMarker};
  std::size_t qi = static_cast<std::size_t>(rng.below(el.size() - 1));
  if (qi >= pi) ++qi;
  return {p, el[qi]};
}

StepBatch sample_step_batch(const ClusterIndex& index, int p, int q, std::size_t n, RandomStream& rng) {
  if (n == 0) throw ShapeError("sample_step_batch: batch half must be positive");
  if (p < 0 || static_cast<std::size_t>(p) >= index.num_clusters()) throw ShapeError("sample_step_batch: bad p");
  if (p == q) throw ShapeError("sample_step_batch: p and q must differ");
  const auto& pool_p = index.members(p);
  if (pool_p.empty()) throw DataError("cluster " + std::to_string(p) + " is empty");
  StepBatch b;
  b.p = p;
  b.q = q;
  b.idx_p = draw(pool_p, n, rng);
  if (q == kMixtureMarker) {
    std::vector<std::size_t> rest;
    rest.reserve(index.num_samples() - pool_p.size());
    for (std::size_t i = 0; i < index.num_samples(); ++i) {
      if (index.cluster_of(i) != p) rest.push_back(i);
    }
    if (rest.empty()) throw DataError("no samples outside cluster " + std::to_string(p));
    b.idx_q = draw(rest, n, rng);
  } else {
    if (q < 0 || static_cast<std::size_t>(q) >= index.num_clusters()) throw ShapeError("sample_step_batch: bad q");
    const auto& pool_q = index.members(q);
    if (pool_q.empty()) throw DataError("cluster " + std::to_string(q) + " is empty");
    b.idx_q = draw(pool_q, n, rng);
  }
  return b;
}

ViewBatch make_views(const Dataset& data, const std::vector<std::size_t>& samples,
                     const std::vector<int>& source_proto, std::size_t anchor_count, const AugmentationSpec& aug,
                     std::uint64_t seed, const std::string& label_prefix) {
  if (source_proto.size() != samples.size()) throw ShapeError("make_views: one cluster per sample required");
  if (anchor_count > samples.size()) throw ShapeError("make_views: anchor count exceeds samples");
  const std::size_t v = 2 * samples.size();
  ViewBatch vb;
  vb.views = ImageBatch(data.shape(), v);
  vb.sample_id.resize(v);
  vb.sample_slot.resize(v);
  vb.source_proto.resize(v);
  vb.sibling.resize(v);
  vb.in_anchor_group.resize(v);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const std::size_t id = samples[s];
    if (id >= data.size()) throw DataError("sample id " + std::to_string(id) + " outside the dataset");
    for (std::size_t k = 0; k < 2; ++k) {
      const std::size_t view = 2 * s + k;
      RandomStream rng = derive_rng(seed, label_prefix + "/" + std::to_string(s) + "/" + std::to_string(k));
      try {
        augment_image(aug, data.shape(), data.image(id), vb.views.image(view), rng);
      } catch (const DataError& e) {
        throw DataError("sample " + std::to_string(id) + ": " + e.what());
      }
      vb.sample_id[view] = id;
      vb.sample_slot[view] = static_cast<int>(s);
      vb.source_proto[view] = source_proto[s];
      vb.sibling[view] = static_cast<int>(view ^ 1);
      vb.in_anchor_group[view] = s < anchor_count ? 1 : 0;
    }
  }
  return vb;
}

ViewBatch make_views(const Dataset& data, const StepBatch& step, const ClusterIndex& index,
                     const AugmentationSpec& aug, std::uint64_t seed, const std::string& label_prefix) {
  std::vector<std::size_t> samples = step.idx_p;
  samples.insert(samples.end(), step.idx_q.begin(), step.idx_q.end());
  std::vector<int> protos;
  protos.reserve(samples.size());
  for (std::size_t id : samples) protos.push_back(index.cluster_of(id));
  return make_views(data, samples, protos, step.idx_p.size(), aug, seed, label_prefix);
}

int steps_per_epoch(const TrainConfig& config, std::size_t n_samples) {
  if (config.steps_per_epoch > 0) return config.steps_per_epoch;
  const std::size_t b = static_cast<std::size_t>(config.batch_size);
  return static_cast<int>(std::max<std::size_t>(1, (n_samples + b - 1) / b));
}

}  // namespace spcl
