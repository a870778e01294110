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

#include <cstdint>

#include "spcl/data/dataset.hpp"

namespace spcl {

/// Procedural 32x32 RGB shape dataset. Each class is a shape family (disk,
/// square, triangle, ring, cross, ...) drawn at a random position, size and
/// color over a random gradient background with pixel noise, so class
/// identity survives color jitter and moderate crops. Labels are balanced
/// round-robin before shuffling.
Dataset make_toy_dataset(std::size_t n_samples, int n_classes, std::uint64_t seed);

inline constexpr int kToyMaxClasses = 8;

}  // namespace spcl
