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
#include <memory>
#include <vector>

#include "spcl/core/config.hpp"
#include "spcl/nn/encoder.hpp"
#include "spcl/nn/mlp.hpp"
#include "spcl/sampling/sampler.hpp"

namespace spcl {

/// Encoder f plus the contrastive (g_c), metric (g_m) and prototype (g_p)
/// heads.
template <class T>
struct ModelBundle {
  std::unique_ptr<nn::Encoder<T>> encoder;
  nn::Mlp<T> head_c;  // d_e -> d_e -> d_c
  nn::Mlp<T> head_m;  // d_e -> d_e -> 1
  nn::Mlp<T> head_p;  // d_e -> K

  ModelBundle() = default;
  ModelBundle(const ModelBundle& other);
  ModelBundle& operator=(const ModelBundle& other);
  ModelBundle(ModelBundle&&) noexcept = default;
  ModelBundle& operator=(ModelBundle&&) noexcept = default;

  std::size_t embed_dim() const noexcept { return encoder ? encoder->output_dim() : 0; }
  std::size_t parameter_count();

  /// Every trainable layer: encoder first, then g_c, g_m, g_p.
  std::vector<nn::ParamGroup<T>> parameters();
  std::vector<nn::BufferRef<T>> buffers();
};

/// Encoder outputs with the view metadata carried through.
template <class T>
struct EmbeddingBatch {
  Matrix<T> h;
  std::vector<int> sibling;
  std::vector<int> source_proto;
};

/// Builds the bundle for `input` images. Each component is initialized from
/// its own stream derive_rng(seed, "init/<component>").
template <class T>
ModelBundle<T> build_model(const TrainConfig& config, EncoderArch arch, const ImageShape& input, std::uint64_t seed);

/// h = f(views). Throws NumericError on non-finite activations.
template <class T>
EmbeddingBatch<T> encode(ModelBundle<T>& bundle, const ViewBatch& views, bool training);

/// Re-initializes the heads in scope from derive_rng(seed, label_prefix + "/<head>").
template <class T>
void reinit_heads(ModelBundle<T>& bundle, const ReinitScope& scope, std::uint64_t seed, const std::string& label_prefix);

}  // namespace spcl
