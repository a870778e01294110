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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "spcl/core/rng.hpp"
#include "spcl/simd/kernels.hpp"

using namespace spcl;
using simd::Isa;

namespace {

std::vector<float> random_vec(std::size_t n, RandomStream& rng) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
  return v;
}

std::vector<Isa> variants() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Avx2, Isa::Avx512}) {
    if (simd::isa_supported(isa)) out.push_back(isa);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(simd::isa_supported(Isa::Scalar));
  CHECK(simd::kernels_for(Isa::Scalar).sgemm != nullptr);
  CHECK(simd::isa_name(Isa::Avx512) == "avx512");
}

TEST_CASE("gemm variants match the scalar reference") {
  const auto& ref = simd::kernels_for(Isa::Scalar);
  RandomStream rng(1);
  const std::size_t shapes[][3] = {{1, 1, 1}, {7, 5, 3}, {33, 17, 65}, {64, 128, 256}, {97, 300, 31}, {6, 16, 513}};
  for (Isa isa : variants()) {
    const auto& k = simd::kernels_for(isa);
    for (const auto& s : shapes) {
      const std::size_t m = s[0], n = s[1], kk = s[2];
      for (int ta = 0; ta < 2; ++ta) {
        for (int tb = 0; tb < 2; ++tb) {
          const auto a = random_vec(m * kk, rng), b = random_vec(kk * n, rng);
          auto c0 = random_vec(m * n, rng);
          auto c1 = c0;
          const std::size_t lda = ta ? m : kk, ldb = tb ? kk : n;
          ref.sgemm(ta, tb, m, n, kk, 0.75f, a.data(), lda, b.data(), ldb, 0.5f, c0.data(), n);
          k.sgemm(ta, tb, m, n, kk, 0.75f, a.data(), lda, b.data(), ldb, 0.5f, c1.data(), n);
          double worst = 0;
          for (std::size_t i = 0; i < c0.size(); ++i) worst = std::max(worst, std::fabs(double(c0[i]) - c1[i]));
          CAPTURE(simd::isa_name(isa));
          CAPTURE(m);
          CAPTURE(n);
          CAPTURE(kk);
          CHECK(worst <= 1e-5 * std::sqrt(double(kk)) + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("gemm with beta zero ignores garbage in C") {
  for (Isa isa : variants()) {
    const auto& k = simd::kernels_for(isa);
    std::vector<float> a(4 * 3, 1.0f), b(3 * 5, 2.0f), c(4 * 5, NAN);
    k.sgemm(false, false, 4, 5, 3, 1.0f, a.data(), 3, b.data(), 5, 0.0f, c.data(), 5);
    for (float v : c) CHECK(v == 6.0f);
  }
}

TEST_CASE("vector kernels match the scalar reference") {
  const auto& ref = simd::kernels_for(Isa::Scalar);
  RandomStream rng(2);
  for (Isa isa : variants()) {
    const auto& k = simd::kernels_for(isa);
    for (std::size_t n : {0u, 1u, 7u, 8u, 15u, 16u, 33u, 128u, 1000u}) {
      const auto x = random_vec(n, rng), y = random_vec(n, rng);
      CHECK(k.sdot(n, x.data(), y.data()) == doctest::Approx(ref.sdot(n, x.data(), y.data())).epsilon(1e-5));
      CHECK(k.ssqdist(n, x.data(), y.data()) == doctest::Approx(ref.ssqdist(n, x.data(), y.data())).epsilon(1e-5));
      auto y0 = y, y1 = y;
      ref.saxpy(n, 0.3f, x.data(), y0.data());
      k.saxpy(n, 0.3f, x.data(), y1.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(y0[i] == doctest::Approx(y1[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("active isa can be switched") {
  const Isa before = simd::active_isa();
  simd::set_active_isa(Isa::Scalar);
  CHECK(simd::active_isa() == Isa::Scalar);
  simd::set_active_isa(before);
  CHECK(simd::active_isa() == before);
}

TEST_CASE("dgemm reference") {
  std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8}, c(4, 0.0);
  simd::dgemm(false, false, 2, 2, 2, 1.0, a.data(), 2, b.data(), 2, 0.0, c.data(), 2);
  CHECK(c == std::vector<double>{19, 22, 43, 50});
  simd::dgemm(true, true, 2, 2, 2, 1.0, a.data(), 2, b.data(), 2, 0.0, c.data(), 2);
  CHECK(c == std::vector<double>{23, 31, 34, 46});
}
