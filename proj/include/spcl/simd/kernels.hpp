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
#include <string_view>

namespace spcl::simd {

/// Instruction-set variants. Each variant implements the same kernel table;
/// `Scalar` is the reference every other variant is tested against.
enum class Isa { Scalar = 0, Avx2 = 1, Avx512 = 2 };

std::string_view isa_name(Isa isa) noexcept;

/// Highest variant the running CPU supports (and this build contains).
Isa best_supported_isa() noexcept;
bool isa_supported(Isa isa) noexcept;

/// Variant used by the free functions below. Defaults to
/// `best_supported_isa()`, or to the `SPCL_ISA` environment variable
/// ("scalar", "avx2", "avx512") when set.
Isa active_isa() noexcept;

/// Forces a variant; throws if unsupported. Not thread-safe: call before
/// any concurrent kernel use.
void set_active_isa(Isa isa);

// C = alpha * op(A) * op(B) + beta * C, all row-major. op(A) is M x K.
// trans_a means A is stored K x M; trans_b means B is stored N x K.
using SgemmFn = void (*)(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                         std::size_t k, float alpha, const float* a, std::size_t lda,
                         const float* b, std::size_t ldb, float beta, float* c,
                         std::size_t ldc);
using SdotFn = float (*)(std::size_t n, const float* x, const float* y);
using SaxpyFn = void (*)(std::size_t n, float alpha, const float* x, float* y);
using SsqdistFn = float (*)(std::size_t n, const float* x, const float* y);

struct KernelTable {
  SgemmFn sgemm;
  SdotFn sdot;
  SaxpyFn saxpy;
  SsqdistFn ssqdist;
};

/// Table for a specific variant (throws if not compiled in or unsupported).
const KernelTable& kernels_for(Isa isa);
const KernelTable& kernels();

inline void sgemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
                  const float* a, std::size_t lda, const float* b, std::size_t ldb,
                  float beta, float* c, std::size_t ldc) {
  kernels().sgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
inline float sdot(std::size_t n, const float* x, const float* y) { return kernels().sdot(n, x, y); }
inline void saxpy(std::size_t n, float alpha, const float* x, float* y) {
  kernels().saxpy(n, alpha, x, y);
}
inline float ssqdist(std::size_t n, const float* x, const float* y) {
  return kernels().ssqdist(n, x, y);
}

/// Double-precision GEMM. Used by tests and by the double instantiations
/// of the nn layers; only the reference path exists.
void dgemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
           const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
           double* c, std::size_t ldc);

/// Type-generic front end used by templated layers.
inline void gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
                 const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta,
                 float* c, std::size_t ldc) {
  sgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
inline void gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
                 const double* a, std::size_t lda, const double* b, std::size_t ldb,
                 double beta, double* c, std::size_t ldc) {
  dgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

namespace scalar {
const KernelTable& table();
}
namespace avx2 {
const KernelTable& table();
}
namespace avx512 {
const KernelTable& table();
}

}  // namespace spcl::simd
