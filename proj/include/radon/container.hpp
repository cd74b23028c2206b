#pragma once

// Columnar binary container shared by checkpoints, datasets and
// preprocessed files:
//
//   bytes 0..7   magic "RADONBIN"
//   bytes 8..15  header length L (uint64, little-endian)
//   next L bytes UTF-8 JSON header; header["arrays"] lists {name, shape}
//   then every array as contiguous little-endian IEEE-754 float64 values,
//   in header order, row-major.

#include "radon/common.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace radon {

using json = nlohmann::json;

struct NamedArray {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<double> data;

  std::int64_t size() const;
};

struct Container {
  json header = json::object();  // user metadata; "arrays" is reserved
  std::vector<NamedArray> arrays;

  const NamedArray& get(const std::string& name) const;
  bool has(const std::string& name) const;

  void add(std::string name, const Mat& m);
  void add(std::string name, const Vec& v);
  void add(NamedArray a);

  Mat matrix(const std::string& name) const;  // 2D array (1D -> column)
  Vec vector(const std::string& name) const;
};

std::string serialize(const Container& c);
Container deserialize(const std::string& bytes);

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

json grid_to_json(const UniformGrid& g);
UniformGrid grid_from_json(const json& j);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace radon
