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

#include <cstddef>
#include <string>
#include <vector>

#include "spcl/common/matrix.hpp"
#include "spcl/core/rng.hpp"
#include "spcl/nn/param.hpp"

namespace spcl::nn {

/// Activation map in channel-major CNHW layout: the batch dimension sits
/// inside the channel planes so a convolution over the whole batch is one
/// GEMM with Cout rows.
template <class T>
struct FeatureMap {
  int channels = 0;
  int batch = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;

  FeatureMap() = default;
  FeatureMap(int c, int n, int h, int w)
      : channels(c), batch(n), height(h), width(w),
        data(static_cast<std::size_t>(c) * n * h * w, T(0)) {}
  std::size_t plane() const noexcept { return static_cast<std::size_t>(batch) * height * width; }
  std::size_t size() const noexcept { return data.size(); }
};

/// y = x W^T + b over row-major batches. Weight layout [out][in].
template <class T>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, bool bias = true);

  /// PyTorch-style default: U(-1/sqrt(in), 1/sqrt(in)) for weight and bias.
  void reset_parameters(RandomStream& rng);

  Matrix<T> forward(const Matrix<T>& x);
  /// Accumulates parameter gradients and returns dL/dx. Uses the input of the
  /// most recent forward call.
  Matrix<T> backward(const Matrix<T>& grad_out);

  std::size_t in_features() const noexcept { return in_; }
  std::size_t out_features() const noexcept { return out_; }
  bool has_bias() const noexcept { return has_bias_; }
  Parameter<T>& weight() noexcept { return weight_; }
  Parameter<T>& bias() noexcept { return bias_; }
  const Parameter<T>& weight() const noexcept { return weight_; }
  const Parameter<T>& bias() const noexcept { return bias_; }

  void collect(std::vector<ParamGroup<T>>& out, const std::string& name);

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  bool has_bias_ = true;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Matrix<T> input_;
};

/// 2-D convolution without bias (always followed by batch norm here).
/// Weight layout [cout][cin * k * k]; zero padding.
template <class T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding);

  /// He-normal initialization, std = sqrt(2 / fan_in).
  void reset_parameters(RandomStream& rng);

  FeatureMap<T> forward(const FeatureMap<T>& x, bool keep_for_backward);
  FeatureMap<T> backward(const FeatureMap<T>& grad_out, bool need_input_grad = true);

  int out_size(int in) const noexcept { return (in + 2 * padding_ - kernel_) / stride_ + 1; }
  Parameter<T>& weight() noexcept { return weight_; }
  void collect(std::vector<ParamGroup<T>>& out, const std::string& name);

 private:
  int in_ = 0, out_ = 0, kernel_ = 1, stride_ = 1, padding_ = 0;
  Parameter<T> weight_;
  std::vector<T> columns_;  // im2col of the last training input
  int in_h_ = 0, in_w_ = 0, batch_ = 0;
  bool pointwise_ = false;  // 1x1, stride 1, no padding: columns are the input itself
};

/// Per-channel batch normalization over (batch, height, width).
template <class T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels, double momentum = 0.1, double eps = 1e-5);

  void reset_parameters();
  /// training: normalizes with batch statistics and updates running ones.
  FeatureMap<T> forward(const FeatureMap<T>& x, bool training);
  FeatureMap<T> backward(const FeatureMap<T>& grad_out);

  Parameter<T>& gamma() noexcept { return gamma_; }
  Parameter<T>& beta() noexcept { return beta_; }
  std::vector<T>& running_mean() noexcept { return running_mean_; }
  std::vector<T>& running_var() noexcept { return running_var_; }

  void collect(std::vector<ParamGroup<T>>& out, const std::string& name);
  void collect_buffers(std::vector<BufferRef<T>>& out, const std::string& name);

 private:
  int channels_ = 0;
  double momentum_ = 0.1;
  double eps_ = 1e-5;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  std::vector<T> running_mean_;
  std::vector<T> running_var_;
  std::vector<T> xhat_;
  std::vector<T> inv_std_;
};

template <class T>
void relu_inplace(std::vector<T>& v) {
  for (auto& x : v) x = x > T(0) ? x : T(0);
}

/// grad *= (activation > 0), where activation is the ReLU output.
template <class T>
void relu_backward_inplace(std::vector<T>& grad, const std::vector<T>& activation) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activation[i] > T(0))) grad[i] = T(0);
  }
}

}  // namespace spcl::nn
