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

#include <memory>
#include <vector>

#include "spcl/common/matrix.hpp"
#include "spcl/core/config.hpp"
#include "spcl/data/dataset.hpp"
#include "spcl/nn/layers.hpp"

namespace spcl::nn {

/// Image encoder f: one embedding row per input view.
template <class T>
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual EncoderArch arch() const noexcept = 0;
  virtual std::size_t output_dim() const noexcept = 0;

  /// training=true keeps activations for backward() and uses batch
  /// statistics in normalization layers; false is pure inference.
  virtual Matrix<T> forward(const ImageBatch& views, bool training) = 0;

  /// Accumulates parameter gradients given dL/dh of the last training forward.
  virtual void backward(const Matrix<T>& grad_h) = 0;

  virtual void reset_parameters(RandomStream& rng) = 0;
  virtual void collect(std::vector<ParamGroup<T>>& out) = 0;
  virtual void collect_buffers(std::vector<BufferRef<T>>& out) { (void)out; }
  virtual std::unique_ptr<Encoder> clone() const = 0;
};

/// Layout of a residual network: a 3x3 stem followed by residual blocks.
struct ResNetLayout {
  struct Block {
    int out_channels;
    int mid_channels;  // bottleneck width; 0 for a basic two-conv block
    int stride;
  };
  int stem_channels = 16;
  int stem_stride = 1;
  std::vector<Block> blocks;

  /// Desk-scale network: 16-channel stride-2 stem, then basic blocks
  /// 16->32 and 32->64 at stride 2 (32x32 input -> 4x4x64).
  static ResNetLayout small();
  /// Bottleneck [3, 4, 6, 3] network with a 3x3 stride-1 stem (the usual
  /// small-image ResNet-50 variant); 2048-wide output.
  static ResNetLayout resnet50();
};

/// Builds an encoder. Identity requires embed_dim == input numel; residual
/// networks append a linear layer when embed_dim differs from their final
/// width.
template <class T>
std::unique_ptr<Encoder<T>> make_encoder(EncoderArch arch, const ImageShape& input, std::size_t embed_dim);

template <class T>
std::unique_ptr<Encoder<T>> make_resnet_encoder(const ResNetLayout& layout, const ImageShape& input,
                                                std::size_t embed_dim);

/// Access to the weight of a Linear encoder (tests and tools).
template <class T>
Linear<T>* linear_encoder_layer(Encoder<T>& encoder);

}  // namespace spcl::nn
