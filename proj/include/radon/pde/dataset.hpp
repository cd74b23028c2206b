#pragma once

// Input/output datasets for the experiment families. A dataset directory holds
// manifest.json plus train.bin, validation.bin and test.bin containers.

#include "radon/container.hpp"
#include "radon/pde/grf.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace radon::pde {

inline constexpr int kDatasetVersion = 1;

struct DatasetConfig {
  std::string problem = "advection";  // advection | burgers | burgers-spacetime | sod
  int n_train = 1000;
  int n_validation = 200;
  int n_test = 200;
  std::uint64_t seed = 2024;

  double advection_speed = 1.0;
  double advection_time = 0.25;
  int advection_points = 2048;

  double nu = 1e-3;
  double burgers_time = 1.0;
  int n_modes = 256;
  double dt = 1e-4;
  int sensors = 128;
  GrfSpec grf;
  int spacetime_x = 257;  // closed grid on [0, 1], last node duplicates the first
  int spacetime_t = 201;  // closed grid on [0, burgers_time]

  int sod_points = 2048;
  double sod_lo = -5.0;
  double sod_hi = 5.0;
  double sod_time = 1.5;

  void validate() const;
  json to_json() const;
  static DatasetConfig from_json(const json& j);
};

struct PdeDataset {
  std::string problem;
  std::string split;
  std::uint64_t seed = 0;
  Mat inputs;          // N x input_dim
  Mat outputs;         // N x (n_t * n_x), t-major
  UniformGrid x_grid;  // the stored columns
  bool periodic = false;
  Vec times;  // empty unless the outputs are space-time fields

  int count() const { return static_cast<int>(inputs.rows()); }
  int n_x() const { return x_grid.n; }
  int n_t() const { return times.size() == 0 ? 1 : static_cast<int>(times.size()); }
  Mat field(int sample) const;  // n_t x n_x
  void validate() const;
};

Container to_container(const PdeDataset& d);
PdeDataset dataset_from_container(const Container& c);

// Generates one split; sample i draws from substream "datagen/<split>"/i.
PdeDataset generate_split(const DatasetConfig& cfg, const std::string& split, int count);

// Writes manifest.json and the three split files under dir.
json dataset_build(const DatasetConfig& cfg, const std::filesystem::path& dir);
json read_dataset_manifest(const std::filesystem::path& dir);
PdeDataset read_split(const std::filesystem::path& dir, const std::string& split);

}  // namespace radon::pde
