// SPDX-License-Identifier: Apache-2.0

#include "tempose/serialize.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

namespace tempose::io {

namespace {
constexpr const char* kMagic = "TEMPOSE-CONTAINER v1";
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

void write_container(const std::string& path, const nlohmann::json& header,
                     const std::vector<double>& payload) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  const std::size_t nbytes = payload.size() * sizeof(double);
  const std::uint64_t sum =
      payload.empty() ? fnv1a64("", 0) : fnv1a64(payload.data(), nbytes);
  char sumhex[17];
  std::snprintf(sumhex, sizeof(sumhex), "%016llx",
                static_cast<unsigned long long>(sum));
  f << kMagic << "\n";
  f << header.dump() << "\n";
  f << "PAYLOAD " << nbytes << " " << sumhex << "\n";
  if (nbytes > 0)
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(nbytes));
  if (!f) throw std::runtime_error("write failed: " + path);
}

Container read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(f, line) || line != kMagic)
    throw std::runtime_error(path + ": bad magic or unsupported version");
  Container c;
  if (!std::getline(f, line))
    throw std::runtime_error(path + ": missing header line");
  c.header = nlohmann::json::parse(line);
  if (!std::getline(f, line))
    throw std::runtime_error(path + ": missing payload frame");
  std::istringstream frame(line);
  std::string tag, sumhex;
  std::size_t nbytes = 0;
  frame >> tag >> nbytes >> sumhex;
  if (tag != "PAYLOAD" || sumhex.size() != 16)
    throw std::runtime_error(path + ": malformed payload frame");
  if (nbytes % sizeof(double) != 0)
    throw std::runtime_error(path + ": payload size not a multiple of 8");
  c.payload.resize(nbytes / sizeof(double));
  if (nbytes > 0) {
    f.read(reinterpret_cast<char*>(c.payload.data()),
           static_cast<std::streamsize>(nbytes));
    if (static_cast<std::size_t>(f.gcount()) != nbytes)
      throw std::runtime_error(path + ": truncated payload");
  }
  const std::uint64_t sum =
      c.payload.empty() ? fnv1a64("", 0) : fnv1a64(c.payload.data(), nbytes);
  char expect[17];
  std::snprintf(expect, sizeof(expect), "%016llx",
                static_cast<unsigned long long>(sum));
  if (sumhex != expect)
    throw std::runtime_error(path + ": checksum mismatch");
  return c;
}

void write_tensors(const std::string& path, nlohmann::json meta,
                   const std::vector<TensorRecord>& tensors) {
  if (!meta.is_object())
    throw std::invalid_argument("write_tensors: meta must be a JSON object");
  nlohmann::json table = nlohmann::json::array();
  std::vector<double> payload;
  std::size_t offset = 0;
  for (const TensorRecord& t : tensors) {
    table.push_back({{"name", t.name},
                     {"rows", t.value.rows()},
                     {"cols", t.value.cols()},
                     {"offset", offset}});
    const double* d = t.value.data();  // column-major
    payload.insert(payload.end(), d, d + t.value.size());
    offset += static_cast<std::size_t>(t.value.size());
  }
  meta["tensors"] = std::move(table);
  write_container(path, meta, payload);
}

std::pair<nlohmann::json, std::vector<TensorRecord>> read_tensors(
    const std::string& path) {
  Container c = read_container(path);
  if (!c.header.contains("tensors"))
    throw std::runtime_error(path + ": no tensor table in header");
  std::vector<TensorRecord> out;
  for (const auto& e : c.header.at("tensors")) {
    TensorRecord t;
    t.name = e.at("name").get<std::string>();
    const auto rows = e.at("rows").get<Eigen::Index>();
    const auto cols = e.at("cols").get<Eigen::Index>();
    const auto offset = e.at("offset").get<std::size_t>();
    const std::size_t count = static_cast<std::size_t>(rows * cols);
    if (offset + count > c.payload.size())
      throw std::runtime_error(path + ": tensor extends past payload: " + t.name);
    t.value = Eigen::Map<const Mat>(c.payload.data() + offset, rows, cols);
    out.push_back(std::move(t));
  }
  return {c.header, out};
}

}  // namespace tempose::io
