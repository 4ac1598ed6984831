#pragma once

// Checkpoint container: 8-byte magic, uint32 LE header length, JSON header,
// then each array as float32 LE in header order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ucrs/common.hpp"

namespace ucrs::detail {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian host");

struct NamedArray {
  std::string name;
  std::span<const double> values;
};

inline void write_checkpoint(const std::filesystem::path& path, const char (&magic)[9],
                             nlohmann::json header, const std::vector<NamedArray>& arrays) {
  nlohmann::json listing = nlohmann::json::array();
  for (const auto& a : arrays) listing.push_back({{"name", a.name}, {"length", a.values.size()}});
  header["arrays"] = listing;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(magic, 8);
  const auto len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<float> buf;
  for (const auto& a : arrays) {
    buf.assign(a.values.begin(), a.values.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

struct Checkpoint {
  nlohmann::json header;
  std::vector<std::pair<std::string, std::vector<double>>> arrays;

  const std::vector<double>& array(const std::string& name) const {
    for (const auto& [n, v] : arrays) {
      if (n == name) return v;
    }
    throw ParseError("checkpoint", 0, "missing array '" + name + "'");
  }
};

inline Checkpoint read_checkpoint(const std::filesystem::path& path, const char (&magic)[9]) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char got[8];
  std::uint32_t len = 0;
  in.read(got, 8);
  in.read(reinterpret_cast<char*>(&len), 4);
  if (!in || std::memcmp(got, magic, 8) != 0) {
    throw ParseError(path.string(), 0, std::string("bad magic, expected ") + magic);
  }
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw ParseError(path.string(), 0, "truncated header");
  Checkpoint cp;
  try {
    cp.header = nlohmann::json::parse(text);
    for (const auto& a : cp.header.at("arrays")) {
      const auto n = a.at("length").get<std::size_t>();
      std::vector<float> buf(n);
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
      if (!in) throw ParseError(path.string(), 0, "truncated array " + a.at("name").get<std::string>());
      cp.arrays.emplace_back(a.at("name").get<std::string>(), std::vector<double>(buf.begin(), buf.end()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, std::string("bad header: ") + e.what());
  }
  return cp;
}

}  // namespace ucrs::detail
