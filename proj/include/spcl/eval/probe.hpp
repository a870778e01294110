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
#include "spcl/nn/encoder.hpp"

namespace spcl {

struct ProbeResult {
  double top1 = 0.0;  // percent
  double top5 = 0.0;  // percent
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// Unaugmented inference-mode embeddings, one row per sample.
template <class T>
Matrix<float> embed_dataset(nn::Encoder<T>& encoder, const Dataset& data, std::size_t batch_size = 256);

/// Trains a linear softmax classifier on standardized train features with
/// momentum SGD (cosine-decayed lr, shuffled minibatches from
/// derive_rng(seed, "probe/<epoch>")) and scores the test features.
/// Throws DataError when a test class never occurs in training.
ProbeResult linear_probe_features(const Matrix<float>& train_x, std::span<const int> train_y,
                                  const Matrix<float>& test_x, std::span<const int> test_y,
                                  const ProbeConfig& config, std::uint64_t seed);

/// Frozen-encoder probe: embeds both splits and calls linear_probe_features.
template <class T>
ProbeResult linear_probe(nn::Encoder<T>& encoder, const Dataset& train, const Dataset& test,
                         const ProbeConfig& config, std::uint64_t seed);

}  // namespace spcl
