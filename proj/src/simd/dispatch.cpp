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

#include <cstdlib>
#include <cstring>
#include <string>

#include "spcl/common/error.hpp"
#include "spcl/simd/kernels.hpp"

namespace spcl::simd {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Avx512: return "avx512";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
#if defined(SPCL_HAVE_X86_KERNELS)
    case Isa::Avx2: return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Isa::Avx512:
      return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
    case Isa::Avx2:
    case Isa::Avx512: return false;
#endif
  }
  return false;
}

Isa best_supported_isa() noexcept {
  if (isa_supported(Isa::Avx512)) return Isa::Avx512;
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  return Isa::Scalar;
}

namespace {

Isa initial_isa() {
  const char* env = std::getenv("SPCL_ISA");
  if (env == nullptr || *env == '\0') return best_supported_isa();
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Avx512}) {
    if (isa_name(isa) == env && isa_supported(isa)) return isa;
  }
  return best_supported_isa();
}

Isa& active_slot() {
  static Isa isa = initial_isa();
  return isa;
}

const KernelTable*& active_table() {
  static const KernelTable* table = &kernels_for(active_slot());
  return table;
}

}  // namespace

Isa active_isa() noexcept { return active_slot(); }

void set_active_isa(Isa isa) {
  const KernelTable& t = kernels_for(isa);
  active_slot() = isa;
  active_table() = &t;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw Error("instruction set '" + std::string(isa_name(isa)) + "' not supported here");
  }
  switch (isa) {
    case Isa::Scalar: return scalar::table();
#if defined(SPCL_HAVE_X86_KERNELS)
    case Isa::Avx2: return avx2::table();
    case Isa::Avx512: return avx512::table();
#else
    default: break;
#endif
  }
  return scalar::table();
}

const KernelTable& kernels() { return *active_table(); }

}  // namespace spcl::simd
