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
#include <filesystem>
#include <string>
#include <vector>

#include "spcl/train/trainer.hpp"

namespace spcl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout: "SPCLCKPT", u32 version, then length-prefixed sections
/// (config hash, config text, input shape, counters, parameters, buffers,
/// optimizer buffers, prototype table, metrics, distance reports), all
/// little-endian, followed by the SHA-256 of every preceding byte.
std::vector<std::uint8_t> serialize_checkpoint(const TrainState& state);
TrainState deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Written atomically (temporary file plus rename).
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
/// Throws CheckpointError on a missing file, bad magic, version mismatch,
/// digest mismatch or truncation.
TrainState load_checkpoint(const std::filesystem::path& path);

/// Loads a checkpoint for continuing `config`; refuses when the stored
/// config hash differs.
TrainState load_checkpoint_for_resume(const std::filesystem::path& path, const TrainConfig& config);

}  // namespace spcl
