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

#include "spcl/data/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "spcl/common/error.hpp"

namespace spcl {

namespace {
constexpr char kMagic[8] = {'S', 'P', 'C', 'L', 'D', 'A', 'T', 'A'};

std::uint32_t read_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{char(v & 0xFF), char((v >> 8) & 0xFF), char((v >> 16) & 0xFF),
                               char((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}
}  // namespace

Dataset::Dataset(ImageShape shape, std::vector<float> pixels, std::vector<int> labels)
    : shape_(shape), pixels_(std::move(pixels)), labels_(std::move(labels)) {
  if (pixels_.size() != labels_.size() * shape_.numel()) {
    throw DataError("dataset pixel buffer does not match label count");
  }
}

int Dataset::num_classes() const noexcept {
  if (labels_.empty()) return 0;
  return *std::max_element(labels_.begin(), labels_.end()) + 1;
}

ImageBatch Dataset::gather(std::span<const std::size_t> indices) const {
  ImageBatch batch(shape_, indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) throw DataError("sample id " + std::to_string(indices[i]) + " out of range");
    const auto src = image(indices[i]);
    std::copy(src.begin(), src.end(), batch.image(i).begin());
  }
  return batch;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw DataError("dataset slice out of range");
  const std::size_t n = shape_.numel();
  std::vector<float> px(pixels_.begin() + begin * n, pixels_.begin() + end * n);
  std::vector<int> lb(labels_.begin() + begin, labels_.begin() + end);
  return Dataset(shape_, std::move(px), std::move(lb));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  ImageShape shape{3, 32, 32};
  std::size_t offset = 0;
  std::size_t expected_count = 0;
  bool headered = false;
  if (bytes.size() >= 24 && std::memcmp(bytes.data(), kMagic, 8) == 0) {
    headered = true;
    shape.channels = static_cast<int>(read_u32(bytes.data() + 8));
    shape.height = static_cast<int>(read_u32(bytes.data() + 12));
    shape.width = static_cast<int>(read_u32(bytes.data() + 16));
    expected_count = read_u32(bytes.data() + 20);
    offset = 24;
    if (shape.channels <= 0 || shape.height <= 0 || shape.width <= 0) {
      throw DataError("dataset '" + path.string() + "' has an invalid header");
    }
  }
  const std::size_t record = 1 + shape.numel();
  const std::size_t body = bytes.size() - offset;
  if (body % record != 0) {
    throw DataError("dataset '" + path.string() + "' is truncated or not in a supported layout");
  }
  const std::size_t count = body / record;
  if (headered && count != expected_count) {
    throw DataError("dataset '" + path.string() + "' record count does not match its header");
  }
  std::vector<float> pixels(count * shape.numel());
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* rec = bytes.data() + offset + i * record;
    labels[i] = rec[0];
    for (std::size_t j = 0; j < shape.numel(); ++j) pixels[i * shape.numel() + j] = rec[1 + j] / 255.0f;
  }
  return Dataset(shape, std::move(pixels), std::move(labels));
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  const bool cifar = data.shape() == ImageShape{3, 32, 32};
  if (!cifar) {
    out.write(kMagic, 8);
    write_u32(out, static_cast<std::uint32_t>(data.shape().channels));
    write_u32(out, static_cast<std::uint32_t>(data.shape().height));
    write_u32(out, static_cast<std::uint32_t>(data.shape().width));
    write_u32(out, static_cast<std::uint32_t>(data.size()));
  }
  std::vector<char> record(1 + data.shape().numel());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int label = data.label(i);
    if (label < 0 || label > 255) throw DataError("labels must fit in one byte");
    record[0] = static_cast<char>(label);
    const auto img = data.image(i);
    for (std::size_t j = 0; j < img.size(); ++j) {
      const float v = std::clamp(img[j], 0.0f, 1.0f);
      record[1 + j] = static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
    }
    out.write(record.data(), static_cast<std::streamsize>(record.size()));
  }
  if (!out) throw DataError("failed writing dataset '" + path.string() + "'");
}

}  // namespace spcl
