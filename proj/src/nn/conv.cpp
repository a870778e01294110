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
#include <cstring>

#include "spcl/nn/layers.hpp"
#include "spcl/simd/kernels.hpp"

namespace spcl::nn {

namespace {

template <class T>
void im2col(const FeatureMap<T>& x, int k, int stride, int pad, int ho, int wo, T* col) {
  const std::size_t plane_out = static_cast<std::size_t>(x.batch) * ho * wo;
  const std::size_t plane_in = x.plane();
  for (int ci = 0; ci < x.channels; ++ci) {
    const T* src_c = x.data.data() + ci * plane_in;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = col + (static_cast<std::size_t>(ci) * k * k + ky * k + kx) * plane_out;
        for (int n = 0; n < x.batch; ++n) {
          const T* src = src_c + static_cast<std::size_t>(n) * x.height * x.width;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride - pad + ky;
            T* d = dst + (static_cast<std::size_t>(n) * ho + oy) * wo;
            if (iy < 0 || iy >= x.height) {
              for (int ox = 0; ox < wo; ++ox) d[ox] = T(0);
              continue;
            }
            const T* srow = src + iy * x.width;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride - pad + kx;
              d[ox] = (ix >= 0 && ix < x.width) ? srow[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

template <class T>
void col2im(const T* col, int k, int stride, int pad, int ho, int wo, FeatureMap<T>& dx) {
  const std::size_t plane_out = static_cast<std::size_t>(dx.batch) * ho * wo;
  const std::size_t plane_in = dx.plane();
  for (int ci = 0; ci < dx.channels; ++ci) {
    T* dst_c = dx.data.data() + ci * plane_in;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col + (static_cast<std::size_t>(ci) * k * k + ky * k + kx) * plane_out;
        for (int n = 0; n < dx.batch; ++n) {
          T* dst = dst_c + static_cast<std::size_t>(n) * dx.height * dx.width;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= dx.height) continue;
            const T* s = src + (static_cast<std::size_t>(n) * ho + oy) * wo;
            T* drow = dst + iy * dx.width;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride - pad + kx;
              if (ix >= 0 && ix < dx.width) drow[ix] += s[ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace

template <class T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : in_(in_channels), out_(out_channels), kernel_(kernel), stride_(stride), padding_(padding),
      weight_(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel),
      pointwise_(kernel == 1 && stride == 1 && padding == 0) {}

template <class T>
void Conv2d<T>::reset_parameters(RandomStream& rng) {
  const double fan_in = static_cast<double>(in_) * kernel_ * kernel_;
  fill_normal(weight_.value, std::sqrt(2.0 / fan_in), rng);
}

template <class T>
FeatureMap<T> Conv2d<T>::forward(const FeatureMap<T>& x, bool keep_for_backward) {
  if (x.channels != in_) throw ShapeError("Conv2d: input channel count mismatch");
  const int ho = out_size(x.height);
  const int wo = out_size(x.width);
  const std::size_t p = static_cast<std::size_t>(x.batch) * ho * wo;
  const std::size_t k = static_cast<std::size_t>(in_) * kernel_ * kernel_;
  FeatureMap<T> y(out_, x.batch, ho, wo);

  const T* cols = nullptr;
  std::vector<T> local;
  std::vector<T>& buf = keep_for_backward ? columns_ : local;
  if (pointwise_) {
    if (keep_for_backward) {
      columns_ = x.data;
      cols = columns_.data();
    } else {
      cols = x.data.data();
    }
  } else {
    buf.resize(k * p);
    im2col(x, kernel_, stride_, padding_, ho, wo, buf.data());
    cols = buf.data();
  }
  simd::gemm(false, false, out_, p, k, T(1), weight_.value.data(), k, cols, p, T(0), y.data.data(), p);
  if (keep_for_backward) {
    in_h_ = x.height;
    in_w_ = x.width;
    batch_ = x.batch;
  }
  return y;
}

template <class T>
FeatureMap<T> Conv2d<T>::backward(const FeatureMap<T>& grad_out, bool need_input_grad) {
  const int ho = out_size(in_h_);
  const int wo = out_size(in_w_);
  const std::size_t p = static_cast<std::size_t>(batch_) * ho * wo;
  const std::size_t k = static_cast<std::size_t>(in_) * kernel_ * kernel_;
  if (grad_out.channels != out_ || grad_out.plane() != p || columns_.size() != k * p) {
    throw ShapeError("Conv2d::backward: gradient does not match the last training forward");
  }
  simd::gemm(false, true, out_, k, p, T(1), grad_out.data.data(), p, columns_.data(), p, T(1),
             weight_.grad.data(), k);
  FeatureMap<T> dx;
  if (!need_input_grad) return dx;
  dx = FeatureMap<T>(in_, batch_, in_h_, in_w_);
  if (pointwise_) {
    simd::gemm(true, false, k, p, out_, T(1), weight_.value.data(), k, grad_out.data.data(), p, T(0),
               dx.data.data(), p);
  } else {
    std::vector<T> dcol(k * p);
    simd::gemm(true, false, k, p, out_, T(1), weight_.value.data(), k, grad_out.data.data(), p, T(0),
               dcol.data(), p);
    col2im(dcol.data(), kernel_, stride_, padding_, ho, wo, dx);
  }
  return dx;
}

template <class T>
void Conv2d<T>::collect(std::vector<ParamGroup<T>>& out, const std::string& name) {
  out.push_back({name, {{name + ".weight", &weight_}}});
}

template class Conv2d<float>;
template class Conv2d<double>;

}  // namespace spcl::nn
