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

#include "spcl/eval/diagnostics.hpp"

namespace spcl {

/// RGB8 raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 255) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}
  void set(int x, int y, std::uint32_t color);
};

/// Encodes an image as PNG (8-bit RGB, zlib-compressed, no filtering).
std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const Image& image, const std::filesystem::path& path);

/// "epoch,tau,tp_mean,tp_std,fn_mean,fn_std" header plus one row per report.
std::string distance_csv(const std::vector<DistanceReport>& reports);

/// Two-panel line plot: TP similarity per epoch on the left, FN on the
/// right, one series per distinct tau.
Image plot_distances(const std::vector<DistanceReport>& reports);

/// Writes the CSV and the PNG plot. Throws DataError on an empty sequence or
/// an unwritable path.
void export_report(const std::vector<DistanceReport>& reports, const std::filesystem::path& csv_path,
                   const std::filesystem::path& png_path);

/// Writes bytes to path through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace spcl
