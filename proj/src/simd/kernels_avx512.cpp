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

// AVX-512F variant. Compiled with -mavx512f; only reached through the
// dispatch table after a runtime CPU check.

#include <immintrin.h>

#include "gemm_blocked.hpp"
#include "spcl/simd/kernels.hpp"

namespace spcl::simd {
namespace {

// 8 x 32 tile: 16 zmm accumulators.
struct Micro8x32 {
  static void run(std::size_t kc, const float* a, const float* b, float* c, std::size_t ldc) {
    __m512 acc[8][2];
    for (auto& r : acc) r[0] = r[1] = _mm512_setzero_ps();
    for (std::size_t p = 0; p < kc; ++p) {
      const __m512 b0 = _mm512_loadu_ps(b + p * 32);
      const __m512 b1 = _mm512_loadu_ps(b + p * 32 + 16);
      const float* ap = a + p * 8;
      for (int i = 0; i < 8; ++i) {
        const __m512 av = _mm512_set1_ps(ap[i]);
        acc[i][0] = _mm512_fmadd_ps(av, b0, acc[i][0]);
        acc[i][1] = _mm512_fmadd_ps(av, b1, acc[i][1]);
      }
    }
    for (int i = 0; i < 8; ++i) {
      float* row = c + i * ldc;
      _mm512_storeu_ps(row, _mm512_add_ps(_mm512_loadu_ps(row), acc[i][0]));
      _mm512_storeu_ps(row + 16, _mm512_add_ps(_mm512_loadu_ps(row + 16), acc[i][1]));
    }
  }
};

void sgemm_avx512(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
                  const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta,
                  float* c, std::size_t ldc) {
  gemm_blocked<8, 32, Micro8x32>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

float sdot_avx512(std::size_t n, const float* x, const float* y) {
  __m512 acc = _mm512_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc = _mm512_fmadd_ps(_mm512_loadu_ps(x + i), _mm512_loadu_ps(y + i), acc);
  }
  if (i < n) {
    const __mmask16 mask = static_cast<__mmask16>((1u << (n - i)) - 1u);
    acc = _mm512_fmadd_ps(_mm512_maskz_loadu_ps(mask, x + i), _mm512_maskz_loadu_ps(mask, y + i),
                          acc);
  }
  return _mm512_reduce_add_ps(acc);
}

void saxpy_avx512(std::size_t n, float alpha, const float* x, float* y) {
  const __m512 av = _mm512_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    _mm512_storeu_ps(y + i, _mm512_fmadd_ps(av, _mm512_loadu_ps(x + i), _mm512_loadu_ps(y + i)));
  }
  if (i < n) {
    const __mmask16 mask = static_cast<__mmask16>((1u << (n - i)) - 1u);
    const __m512 r = _mm512_fmadd_ps(av, _mm512_maskz_loadu_ps(mask, x + i),
                                     _mm512_maskz_loadu_ps(mask, y + i));
    _mm512_mask_storeu_ps(y + i, mask, r);
  }
}

float ssqdist_avx512(std::size_t n, const float* x, const float* y) {
  __m512 acc = _mm512_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const __m512 d = _mm512_sub_ps(_mm512_loadu_ps(x + i), _mm512_loadu_ps(y + i));
    acc = _mm512_fmadd_ps(d, d, acc);
  }
  if (i < n) {
    const __mmask16 mask = static_cast<__mmask16>((1u << (n - i)) - 1u);
    const __m512 d =
        _mm512_sub_ps(_mm512_maskz_loadu_ps(mask, x + i), _mm512_maskz_loadu_ps(mask, y + i));
    acc = _mm512_fmadd_ps(d, d, acc);
  }
  return _mm512_reduce_add_ps(acc);
}

}  // namespace

namespace avx512 {
const KernelTable& table() {
  static const KernelTable t{&sgemm_avx512, &sdot_avx512, &saxpy_avx512, &ssqdist_avx512};
  return t;
}
}  // namespace avx512

}  // namespace spcl::simd
