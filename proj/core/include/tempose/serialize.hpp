// SPDX-License-Identifier: Apache-2.0
//
// On-disk container shared by datasets, checkpoints, and prediction files:
//
//   TEMPOSE-CONTAINER v1\n
//   <one-line JSON header>\n
//   PAYLOAD <byte count> <fnv1a64 hex of payload>\n
//   <payload: raw little-endian IEEE-754 doubles>
//
// The header describes the payload layout; the checksum rejects truncation
// and corruption. Loaders must treat any mismatch as a hard error.

#pragma once

#include "tempose/tensor.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tempose::io {

std::uint64_t fnv1a64(const void* data, std::size_t n);

void write_container(const std::string& path, const nlohmann::json& header,
                     const std::vector<double>& payload);

struct Container {
  nlohmann::json header;
  std::vector<double> payload;
};

// Throws std::runtime_error on bad magic, version, framing, or checksum.
Container read_container(const std::string& path);

// Named-tensor bundle on top of the container. meta must be an object; the
// writer adds a "tensors" array (name, rows, cols, offset).
struct TensorRecord {
  std::string name;
  Mat value;
};

void write_tensors(const std::string& path, nlohmann::json meta,
                   const std::vector<TensorRecord>& tensors);
std::pair<nlohmann::json, std::vector<TensorRecord>> read_tensors(
    const std::string& path);

}  // namespace tempose::io
