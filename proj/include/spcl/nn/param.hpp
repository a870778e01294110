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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spcl/core/rng.hpp"

namespace spcl::nn {

/// Trainable tensor: values plus an accumulated gradient of equal length.
template <class T>
struct Parameter {
  std::vector<T> value;
  std::vector<T> grad;

  Parameter() = default;
  explicit Parameter(std::size_t n) : value(n, T(0)), grad(n, T(0)) {}
  std::size_t size() const noexcept { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

template <class T>
struct ParamRef {
  std::string name;
  Parameter<T>* param;
};

/// The tensors of one layer. LARS computes its trust ratio per group.
template <class T>
struct ParamGroup {
  std::string layer;
  std::vector<ParamRef<T>> tensors;
};

/// Non-trainable persistent state (batch-norm running statistics).
template <class T>
struct BufferRef {
  std::string name;
  std::vector<T>* values;
};

template <class T>
std::size_t count_parameters(const std::vector<ParamGroup<T>>& groups) {
  std::size_t n = 0;
  for (const auto& g : groups) {
    for (const auto& t : g.tensors) n += t.param->size();
  }
  return n;
}

template <class T>
void zero_grads(const std::vector<ParamGroup<T>>& groups) {
  for (const auto& g : groups) {
    for (const auto& t : g.tensors) t.param->zero_grad();
  }
}

template <class T>
void fill_uniform(std::vector<T>& v, double bound, RandomStream& rng) {
  for (auto& x : v) x = static_cast<T>(rng.uniform(-bound, bound));
}

template <class T>
void fill_normal(std::vector<T>& v, double stddev, RandomStream& rng) {
  for (auto& x : v) x = static_cast<T>(stddev * rng.normal());
}

}  // namespace spcl::nn
