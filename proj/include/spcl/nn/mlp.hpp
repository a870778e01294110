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

#include <string>
#include <vector>

#include "spcl/nn/layers.hpp"

namespace spcl::nn {

/// Stack of Linear layers with ReLU between consecutive layers (none after
/// the last). dims = {in, hidden..., out}.
template <class T>
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(const std::vector<std::size_t>& dims);

  void reset_parameters(RandomStream& rng);
  Matrix<T> forward(const Matrix<T>& x);
  Matrix<T> backward(const Matrix<T>& grad_out);

  std::size_t in_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in_features(); }
  std::size_t out_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().out_features(); }
  std::vector<Linear<T>>& layers() noexcept { return layers_; }
  const std::vector<Linear<T>>& layers() const noexcept { return layers_; }
  std::size_t parameter_count() const;

  void collect(std::vector<ParamGroup<T>>& out, const std::string& name);

 private:
  std::vector<Linear<T>> layers_;
  std::vector<Matrix<T>> activations_;  // ReLU outputs of the hidden layers
};

}  // namespace spcl::nn
