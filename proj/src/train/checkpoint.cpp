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

#include "spcl/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "spcl/common/digest.hpp"
#include "spcl/eval/report.hpp"

namespace spcl {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'S', 'P', 'C', 'L', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <class V>
  void pod(V v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(V));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out.insert(out.end(), s.begin(), s.end());
  }
  template <class V>
  void vec(const std::vector<V>& v) {
    pod<std::uint64_t>(v.size());
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    out.insert(out.end(), p, p + v.size() * sizeof(V));
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : p_(data), end_(data + size) {}
  template <class V>
  V pod() {
    need(sizeof(V));
    V v;
    std::memcpy(&v, p_, sizeof(V));
    p_ += sizeof(V);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(p_), n);
    p_ += n;
    return s;
  }
  template <class V>
  std::vector<V> vec() {
    const auto n = pod<std::uint64_t>();
    if (n > static_cast<std::uint64_t>(end_ - p_) / sizeof(V)) throw CheckpointError("checkpoint truncated");
    std::vector<V> v(n);
    std::memcpy(v.data(), p_, n * sizeof(V));
    p_ += n * sizeof(V);
    return v;
  }
  bool done() const { return p_ == end_; }

 private:
  void need(std::uint64_t n) {
    if (n > static_cast<std::uint64_t>(end_ - p_)) throw CheckpointError("checkpoint truncated");
  }
  const std::uint8_t* p_;
  const std::uint8_t* end_;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const TrainState& state) {
  TrainState& s = const_cast<TrainState&>(state);  // collect() hands out mutable views; nothing is modified
  Writer w;
  w.out.insert(w.out.end(), kMagic, kMagic + 8);
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.str(config_hash(s.config));
  w.str(serialize_config(s.config));
  w.pod<std::int32_t>(s.input_shape.channels);
  w.pod<std::int32_t>(s.input_shape.height);
  w.pod<std::int32_t>(s.input_shape.width);
  w.pod<std::int32_t>(s.epoch);
  w.pod<std::int64_t>(s.global_step);

  const auto groups = s.bundle.parameters();
  std::uint64_t tensors = 0;
  for (const auto& g : groups) tensors += g.tensors.size();
  w.pod<std::uint64_t>(tensors);
  for (const auto& g : groups) {
    for (const auto& t : g.tensors) {
      w.str(t.name);
      w.vec(t.param->value);
    }
  }
  const auto bufs = s.bundle.buffers();
  w.pod<std::uint64_t>(bufs.size());
  for (const auto& b : bufs) {
    w.str(b.name);
    w.vec(*b.values);
  }
  const auto& names = s.optimizer.buffer_names();
  auto& vel = s.optimizer.buffers();
  w.pod<std::uint64_t>(vel.size());
  for (std::size_t i = 0; i < vel.size(); ++i) {
    w.str(names[i]);
    w.vec(vel[i]);
  }

  const PrototypeTable& t = s.table;
  w.pod<std::uint64_t>(t.centroids.rows());
  w.pod<std::uint64_t>(t.centroids.cols());
  w.vec(std::vector<double>(t.centroids.data(), t.centroids.data() + t.centroids.size()));
  w.vec(t.assignment);
  w.pod<std::int32_t>(t.epoch);
  w.pod<double>(t.sse);
  w.vec(t.sse_history);
  w.pod<std::int32_t>(t.iterations);
  w.pod<std::uint8_t>(t.converged ? 1 : 0);

  w.pod<std::uint64_t>(s.metrics.size());
  for (const auto& r : s.metrics) {
    w.pod<std::int32_t>(r.epoch);
    w.pod<std::int64_t>(r.step);
    for (double v : {r.lr, r.loss_total, r.loss_contra, r.loss_metric, r.loss_proto, r.wall_ms}) w.pod<double>(v);
  }
  w.pod<std::uint64_t>(s.reports.size());
  for (const auto& r : s.reports) {
    w.pod<std::int32_t>(r.epoch);
    for (double v : {r.tau, r.tp_mean, r.tp_std, r.fn_mean, r.fn_std}) w.pod<double>(v);
    for (std::size_t v : {r.n_anchors, r.n_fn_anchors, r.n_skipped}) w.pod<std::uint64_t>(v);
  }
  const Sha256 digest = sha256(std::span<const std::uint8_t>(w.out));
  w.out.insert(w.out.end(), digest.begin(), digest.end());
  return std::move(w.out);
}

TrainState deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 + 4 + 32) throw CheckpointError("checkpoint truncated");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw CheckpointError("not a checkpoint file (bad magic)");
  const std::size_t body = bytes.size() - 32;
  const Sha256 digest = sha256(std::span<const std::uint8_t>(bytes.data(), body));
  if (std::memcmp(digest.data(), bytes.data() + body, 32) != 0) {
    throw CheckpointError("checkpoint digest mismatch (file corrupt or modified)");
  }
  Reader r(bytes.data() + 8, body - 8);
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const std::string hash = r.str();
  TrainConfig config;
  try {
    config = parse_config(r.str());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint config invalid: ") + e.what());
  }
  if (config_hash(config) != hash) throw CheckpointError("checkpoint config hash does not match its config");
  ImageShape shape;
  shape.channels = r.pod<std::int32_t>();
  shape.height = r.pod<std::int32_t>();
  shape.width = r.pod<std::int32_t>();

  TrainState s = initial_state(config, shape);
  s.epoch = r.pod<std::int32_t>();
  s.global_step = r.pod<std::int64_t>();

  const auto groups = s.bundle.parameters();
  const auto tensors = r.pod<std::uint64_t>();
  std::size_t seen = 0;
  for (const auto& g : groups) {
    for (const auto& t : g.tensors) {
      if (seen++ >= tensors) throw CheckpointError("checkpoint is missing parameter " + t.name);
      const std::string name = r.str();
      auto values = r.vec<float>();
      if (name != t.name || values.size() != t.param->size()) {
        throw CheckpointError("checkpoint parameter " + name + " does not match the model");
      }
      t.param->value = std::move(values);
    }
  }
  if (seen != tensors) throw CheckpointError("checkpoint has extra parameters");
  const auto bufs = s.bundle.buffers();
  if (r.pod<std::uint64_t>() != bufs.size()) throw CheckpointError("checkpoint buffer count does not match the model");
  for (const auto& b : bufs) {
    const std::string name = r.str();
    auto values = r.vec<float>();
    if (name != b.name || values.size() != b.values->size()) {
      throw CheckpointError("checkpoint buffer " + name + " does not match the model");
    }
    *b.values = std::move(values);
  }
  auto& vel = s.optimizer.buffers();
  if (r.pod<std::uint64_t>() != vel.size()) throw CheckpointError("checkpoint optimizer state does not match the model");
  for (std::size_t i = 0; i < vel.size(); ++i) {
    const std::string name = r.str();
    auto values = r.vec<float>();
    if (name != s.optimizer.buffer_names()[i] || values.size() != vel[i].size()) {
      throw CheckpointError("checkpoint optimizer buffer " + name + " does not match the model");
    }
    vel[i] = std::move(values);
  }

  PrototypeTable& t = s.table;
  const auto rows = r.pod<std::uint64_t>();
  const auto cols = r.pod<std::uint64_t>();
  const auto cent = r.vec<double>();
  if (cent.size() != rows * cols) throw CheckpointError("checkpoint prototype table malformed");
  t.centroids.resize(rows, cols);
  std::copy(cent.begin(), cent.end(), t.centroids.data());
  t.assignment = r.vec<int>();
  t.epoch = r.pod<std::int32_t>();
  t.sse = r.pod<double>();
  t.sse_history = r.vec<double>();
  t.iterations = r.pod<std::int32_t>();
  t.converged = r.pod<std::uint8_t>() != 0;

  const auto n_metrics = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_metrics; ++i) {
    StepRecord m;
    m.epoch = r.pod<std::int32_t>();
    m.step = r.pod<std::int64_t>();
    for (double* v : {&m.lr, &m.loss_total, &m.loss_contra, &m.loss_metric, &m.loss_proto, &m.wall_ms}) *v = r.pod<double>();
    s.metrics.push_back(m);
  }
  const auto n_reports = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_reports; ++i) {
    DistanceReport d;
    d.epoch = r.pod<std::int32_t>();
    for (double* v : {&d.tau, &d.tp_mean, &d.tp_std, &d.fn_mean, &d.fn_std}) *v = r.pod<double>();
    for (std::size_t* v : {&d.n_anchors, &d.n_fn_anchors, &d.n_skipped}) *v = r.pod<std::uint64_t>();
    s.reports.push_back(d);
  }
  if (!r.done()) throw CheckpointError("checkpoint has trailing data");
  return s;
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(state);
  try {
    write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
  } catch (const DataError& e) {
    throw CheckpointError(e.what());
  }
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

TrainState load_checkpoint_for_resume(const std::filesystem::path& path, const TrainConfig& config) {
  TrainState s = load_checkpoint(path);
  if (config_hash(s.config) != config_hash(config)) {
    throw CheckpointError("refusing to resume " + path.string() + ": config hash differs from the checkpoint");
  }
  return s;
}

}  // namespace spcl
