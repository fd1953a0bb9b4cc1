/* Copyright 2026 The histrack Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "histrack/checkpoint.hpp"

#include "histrack/binio.hpp"
#include "histrack/model.hpp"

namespace histrack {

namespace {

constexpr std::uint32_t kMagic = 0x4b435448;  // "HTCK"
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string serialize_checkpoint(const Config& config, const ad::ParamStore& params) {
  binio::Writer w;
  w.u32(kMagic);
  w.u32(kVersion);
  const auto pairs = config.to_pairs();
  w.u32(static_cast<std::uint32_t>(pairs.size()));
  for (const auto& [k, v] : pairs) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(params.all().size()));
  for (const auto& [name, m] : params.all()) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    // Row-major so the byte layout does not depend on Eigen's storage order.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
    }
  }
  return w.data();
}

Checkpoint deserialize_checkpoint(const std::string& data) {
  binio::Reader r(data);
  if (r.u32() != kMagic) throw std::runtime_error("not a checkpoint archive");
  if (r.u32() != kVersion) throw std::runtime_error("unsupported checkpoint version");
  Checkpoint ck;
  const std::uint32_t n_pairs = r.u32();
  for (std::uint32_t i = 0; i < n_pairs; ++i) {
    const std::string key = r.str();
    ck.config.set(key, r.str());
  }
  ck.config.validate();
  const std::uint32_t n_params = r.u32();
  for (std::uint32_t i = 0; i < n_params; ++i) {
    std::string name = r.str();
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (static_cast<std::uint64_t>(rows) * cols * 8 > data.size()) throw std::runtime_error("archive truncated");
    Mat m(rows, cols);
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
      for (Eigen::Index b = 0; b < m.cols(); ++b) m(a, b) = r.f64();
    }
    ck.params.add(std::move(name), std::move(m));
  }
  if (!r.done()) throw std::runtime_error("trailing bytes in checkpoint");
  check_params(ck.config, ck.params);
  return ck;
}

void save_checkpoint(const std::string& path, const Config& config, const ad::ParamStore& params) {
  binio::write_file(path, serialize_checkpoint(config, params));
}

Checkpoint load_checkpoint(const std::string& path) { return deserialize_checkpoint(binio::read_file(path)); }

}  // namespace histrack
