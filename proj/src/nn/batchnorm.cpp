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

namespace spcl::nn {

template <class T>
BatchNorm2d<T>::BatchNorm2d(int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps), gamma_(channels), beta_(channels),
      running_mean_(channels, T(0)), running_var_(channels, T(1)) {
  reset_parameters();
}

template <class T>
void BatchNorm2d<T>::reset_parameters() {
  std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
  std::fill(beta_.value.begin(), beta_.value.end(), T(0));
  std::fill(running_mean_.begin(), running_mean_.end(), T(0));
  std::fill(running_var_.begin(), running_var_.end(), T(1));
}

template <class T>
FeatureMap<T> BatchNorm2d<T>::forward(const FeatureMap<T>& x, bool training) {
  if (x.channels != channels_) throw ShapeError("BatchNorm2d: channel count mismatch");
  FeatureMap<T> y(x.channels, x.batch, x.height, x.width);
  const std::size_t m = x.plane();
  if (training) {
    xhat_.resize(x.size());
    inv_std_.resize(channels_);
  }
  for (int c = 0; c < channels_; ++c) {
    const T* src = x.data.data() + c * m;
    T* dst = y.data.data() + c * m;
    double mean, var;
    if (training) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += src[i];
      mean = s / static_cast<double>(m);
      double ss = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = src[i] - mean;
        ss += d * d;
      }
      var = ss / static_cast<double>(m);
      const double unbiased = m > 1 ? ss / static_cast<double>(m - 1) : var;
      running_mean_[c] = static_cast<T>((1.0 - momentum_) * running_mean_[c] + momentum_ * mean);
      running_var_[c] = static_cast<T>((1.0 - momentum_) * running_var_[c] + momentum_ * unbiased);
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const T inv = static_cast<T>(1.0 / std::sqrt(var + eps_));
    const T mu = static_cast<T>(mean);
    const T g = gamma_.value[c], b = beta_.value[c];
    if (training) {
      inv_std_[c] = inv;
      T* xh = xhat_.data() + c * m;
      for (std::size_t i = 0; i < m; ++i) {
        xh[i] = (src[i] - mu) * inv;
        dst[i] = g * xh[i] + b;
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) dst[i] = g * (src[i] - mu) * inv + b;
    }
  }
  return y;
}

template <class T>
FeatureMap<T> BatchNorm2d<T>::backward(const FeatureMap<T>& grad_out) {
  if (grad_out.size() != xhat_.size()) throw ShapeError("BatchNorm2d::backward without training forward");
  FeatureMap<T> dx(grad_out.channels, grad_out.batch, grad_out.height, grad_out.width);
  const std::size_t m = grad_out.plane();
  for (int c = 0; c < channels_; ++c) {
    const T* dy = grad_out.data.data() + c * m;
    const T* xh = xhat_.data() + c * m;
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum_dy += dy[i];
      sum_dy_xh += static_cast<double>(dy[i]) * xh[i];
    }
    gamma_.grad[c] += static_cast<T>(sum_dy_xh);
    beta_.grad[c] += static_cast<T>(sum_dy);
    const T scale = static_cast<T>(gamma_.value[c] * inv_std_[c] / static_cast<double>(m));
    const T mdy = static_cast<T>(sum_dy);
    const T mdyx = static_cast<T>(sum_dy_xh);
    const T mm = static_cast<T>(m);
    T* d = dx.data.data() + c * m;
    for (std::size_t i = 0; i < m; ++i) d[i] = scale * (mm * dy[i] - mdy - xh[i] * mdyx);
  }
  return dx;
}

template <class T>
void BatchNorm2d<T>::collect(std::vector<ParamGroup<T>>& out, const std::string& name) {
  out.push_back({name, {{name + ".gamma", &gamma_}, {name + ".beta", &beta_}}});
}

template <class T>
void BatchNorm2d<T>::collect_buffers(std::vector<BufferRef<T>>& out, const std::string& name) {
  out.push_back({name + ".running_mean", &running_mean_});
  out.push_back({name + ".running_var", &running_var_});
}

template class BatchNorm2d<float>;
template class BatchNorm2d<double>;

}  // namespace spcl::nn
