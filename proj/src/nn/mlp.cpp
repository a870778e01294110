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

#include "spcl/nn/mlp.hpp"

namespace spcl::nn {

template <class T>
Mlp<T>::Mlp(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw ShapeError("Mlp needs at least input and output dimensions");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) layers_.emplace_back(dims[i], dims[i + 1], true);
}

template <class T>
void Mlp<T>::reset_parameters(RandomStream& rng) {
  for (auto& l : layers_) l.reset_parameters(rng);
}

template <class T>
Matrix<T> Mlp<T>::forward(const Matrix<T>& x) {
  activations_.clear();
  Matrix<T> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h);
    if (i + 1 < layers_.size()) {
      for (auto& v : h.flat()) v = v > T(0) ? v : T(0);
      activations_.push_back(h);
    }
  }
  return h;
}

template <class T>
Matrix<T> Mlp<T>::backward(const Matrix<T>& grad_out) {
  Matrix<T> g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (i + 1 < layers_.size()) {
      const Matrix<T>& act = activations_[i];
      auto gf = g.flat();
      auto af = act.flat();
      for (std::size_t j = 0; j < gf.size(); ++j) {
        if (!(af[j] > T(0))) gf[j] = T(0);
      }
    }
    g = layers_[i].backward(g);
  }
  return g;
}

template <class T>
std::size_t Mlp<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight().size() + l.bias().size();
  return n;
}

template <class T>
void Mlp<T>::collect(std::vector<ParamGroup<T>>& out, const std::string& name) {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect(out, name + "." + std::to_string(i));
}

template class Mlp<float>;
template class Mlp<double>;

}  // namespace spcl::nn
