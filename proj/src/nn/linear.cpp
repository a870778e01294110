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

#include <cmath>

#include "spcl/nn/layers.hpp"
#include "spcl/simd/kernels.hpp"

namespace spcl::nn {

template <class T>
Linear<T>::Linear(std::size_t in, std::size_t out, bool bias)
    : in_(in), out_(out), has_bias_(bias), weight_(in * out), bias_(bias ? out : 0) {}

template <class T>
void Linear<T>::reset_parameters(RandomStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
  fill_uniform(weight_.value, bound, rng);
  if (has_bias_) fill_uniform(bias_.value, bound, rng);
}

template <class T>
Matrix<T> Linear<T>::forward(const Matrix<T>& x) {
  if (x.cols() != in_) throw ShapeError("Linear: input width does not match in_features");
  input_ = x;
  Matrix<T> y(x.rows(), out_);
  simd::gemm(false, true, x.rows(), out_, in_, T(1), x.data(), in_, weight_.value.data(), in_, T(0),
             y.data(), out_);
  if (has_bias_) {
    for (std::size_t r = 0; r < y.rows(); ++r) {
      T* row = y.data() + r * out_;
      for (std::size_t j = 0; j < out_; ++j) row[j] += bias_.value[j];
    }
  }
  return y;
}

template <class T>
Matrix<T> Linear<T>::backward(const Matrix<T>& grad_out) {
  check_same_shape(grad_out.rows(), grad_out.cols(), input_.rows(), out_, "Linear::backward");
  const std::size_t n = grad_out.rows();
  simd::gemm(true, false, out_, in_, n, T(1), grad_out.data(), out_, input_.data(), in_, T(1),
             weight_.grad.data(), in_);
  if (has_bias_) {
    for (std::size_t r = 0; r < n; ++r) {
      const T* row = grad_out.data() + r * out_;
      for (std::size_t j = 0; j < out_; ++j) bias_.grad[j] += row[j];
    }
  }
  Matrix<T> dx(n, in_);
  simd::gemm(false, false, n, in_, out_, T(1), grad_out.data(), out_, weight_.value.data(), in_, T(0),
             dx.data(), in_);
  return dx;
}

template <class T>
void Linear<T>::collect(std::vector<ParamGroup<T>>& out, const std::string& name) {
  ParamGroup<T> g{name, {{name + ".weight", &weight_}}};
  if (has_bias_) g.tensors.push_back({name + ".bias", &bias_});
  out.push_back(std::move(g));
}

template class Linear<float>;
template class Linear<double>;

}  // namespace spcl::nn
