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

// Packed, cache-blocked SGEMM driver shared by the SIMD variants. Included by
// exactly one translation unit per instruction set; everything has internal
// linkage so differently-compiled copies never collide at link time. No
// standard-library templates are instantiated here for the same reason: a
// weak symbol built with wider instructions could be picked by the linker
// for the scalar path.
#pragma once

#include <cstddef>
#include <cstdlib>

namespace spcl::simd {
namespace {

constexpr std::size_t min_size(std::size_t a, std::size_t b) { return a < b ? a : b; }

inline void zero_fill(float* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) p[i] = 0.0f;
}

// Grow-only 64-byte-aligned scratch buffer.
struct Scratch {
  float* ptr = nullptr;
  std::size_t capacity = 0;
  ~Scratch() { std::free(ptr); }
  float* reserve(std::size_t n) {
    if (n > capacity) {
      std::free(ptr);
      const std::size_t bytes = ((n * sizeof(float) + 63) / 64) * 64;
      ptr = static_cast<float*>(std::aligned_alloc(64, bytes));
      capacity = ptr != nullptr ? n : 0;
    }
    return ptr;
  }
};

inline void scale_c(std::size_t m, std::size_t n, float beta, float* c, std::size_t ldc) {
  if (beta == 1.0f) return;
  for (std::size_t i = 0; i < m; ++i) {
    float* row = c + i * ldc;
    if (beta == 0.0f) {
      zero_fill(row, n);
    } else {
      for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
    }
  }
}

// Micro must provide: static void run(kc, const float* a_panel,
// const float* b_panel, float* c, ldc) computing the full MR x NR tile
// C += A_panel * B_panel.
template <std::size_t MR, std::size_t NR, class Micro>
void gemm_blocked(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
                  const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta,
                  float* c, std::size_t ldc) {
  constexpr std::size_t KC = 256;
  constexpr std::size_t MC = MR * 16;
  constexpr std::size_t NC = NR * 128;

  scale_c(m, n, beta, c, ldc);
  if (m == 0 || n == 0 || k == 0 || alpha == 0.0f) return;

  thread_local Scratch apack;
  thread_local Scratch bpack;
  alignas(64) float tile[MR * NR];

  for (std::size_t jc = 0; jc < n; jc += NC) {
    const std::size_t nc = min_size(NC, n - jc);
    const std::size_t npanels = (nc + NR - 1) / NR;
    for (std::size_t pc = 0; pc < k; pc += KC) {
      const std::size_t kc = min_size(KC, k - pc);
      float* const bbuf = bpack.reserve(npanels * kc * NR);
      for (std::size_t jp = 0; jp < npanels; ++jp) {
        float* dst = bbuf + jp * kc * NR;
        const std::size_t col0 = jc + jp * NR;
        const std::size_t ncols = min_size(NR, n - col0);
        if (!tb) {
          for (std::size_t p = 0; p < kc; ++p) {
            const float* src = b + (pc + p) * ldb + col0;
            float* d = dst + p * NR;
            std::size_t j = 0;
            for (; j < ncols; ++j) d[j] = src[j];
            for (; j < NR; ++j) d[j] = 0.0f;
          }
        } else {
          for (std::size_t j = 0; j < NR; ++j) {
            if (j < ncols) {
              const float* src = b + (col0 + j) * ldb + pc;
              for (std::size_t p = 0; p < kc; ++p) dst[p * NR + j] = src[p];
            } else {
              for (std::size_t p = 0; p < kc; ++p) dst[p * NR + j] = 0.0f;
            }
          }
        }
      }

      for (std::size_t ic = 0; ic < m; ic += MC) {
        const std::size_t mc = min_size(MC, m - ic);
        const std::size_t mpanels = (mc + MR - 1) / MR;
        float* const abuf = apack.reserve(mpanels * kc * MR);
        for (std::size_t ip = 0; ip < mpanels; ++ip) {
          float* dst = abuf + ip * kc * MR;
          const std::size_t row0 = ic + ip * MR;
          const std::size_t nrows = min_size(MR, m - row0);
          if (!ta) {
            for (std::size_t i = 0; i < MR; ++i) {
              if (i < nrows) {
                const float* src = a + (row0 + i) * lda + pc;
                for (std::size_t p = 0; p < kc; ++p) dst[p * MR + i] = alpha * src[p];
              } else {
                for (std::size_t p = 0; p < kc; ++p) dst[p * MR + i] = 0.0f;
              }
            }
          } else {
            for (std::size_t p = 0; p < kc; ++p) {
              const float* src = a + (pc + p) * lda + row0;
              float* d = dst + p * MR;
              std::size_t i = 0;
              for (; i < nrows; ++i) d[i] = alpha * src[i];
              for (; i < MR; ++i) d[i] = 0.0f;
            }
          }
        }

        for (std::size_t jp = 0; jp < npanels; ++jp) {
          const std::size_t col0 = jc + jp * NR;
          const std::size_t nr = min_size(NR, n - col0);
          const float* bp = bbuf + jp * kc * NR;
          for (std::size_t ip = 0; ip < mpanels; ++ip) {
            const std::size_t row0 = ic + ip * MR;
            const std::size_t mr = min_size(MR, m - row0);
            const float* ap = abuf + ip * kc * MR;
            float* cdst = c + row0 * ldc + col0;
            if (mr == MR && nr == NR) {
              Micro::run(kc, ap, bp, cdst, ldc);
            } else {
              zero_fill(tile, MR * NR);
              Micro::run(kc, ap, bp, tile, NR);
              for (std::size_t i = 0; i < mr; ++i) {
                for (std::size_t j = 0; j < nr; ++j) cdst[i * ldc + j] += tile[i * NR + j];
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace
}  // namespace spcl::simd
