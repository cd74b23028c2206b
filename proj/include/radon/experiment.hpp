#pragma once

// Configuration-driven pipeline: datagen -> preprocess -> train -> eval ->
// analyze. Every stage writes run.json recording its config hash, the
// hashes of the upstream files it consumed and the hashes of its outputs;
// downstream stages refuse to run on stale or modified upstream artifacts.

#include "radon/deeponet.hpp"
#include "radon/equidistribution.hpp"
#include "radon/pde/dataset.hpp"
#include "radon/training.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace radon::experiment {

inline constexpr const char* kToolVersion = "0.1.0";

struct PreprocessConfig {
  int n_xi = 128;
  double cap_solution = 2.0;
  double cap_coordinate = 100.0;
  double beta = 1.0;
  int smoothing_passes = 2;
  int time_slices = 0;  // space-time only: slices kept (evenly spaced), 0 = all

  equi::PreprocessOptions options() const;
};

struct ModelConfig {
  int basis = 100;
  deeponet::NetSpec branch{{256, 256, 256, 256}, nn::Activation::tanh};
  deeponet::NetSpec trunk{{256, 256, 256, 256}, nn::Activation::relu};
  deeponet::NetSpec scale{{256, 256, 256, 256}, nn::Activation::tanh};
  deeponet::NetSpec shift{{256, 256, 256, 256}, nn::Activation::tanh};
};

struct TrainingConfig {
  training::TrainConfig train;
  int output_points = 128;  // vanilla / shift: x points used for training
  int output_times = 0;     // space-time vanilla / shift: time points, 0 = all
};

struct EvalConfig {
  int eval_xi_cells = 2048;  // R-adaptive: xi cells the nets are evaluated on
  std::string split = "test";
  std::string checkpoint = "final";  // final | best
};

struct AnalysisConfig {
  double zeta = 0.37;  // box shift for the rate study (aT = 0)
  std::vector<int> ns = {16, 32, 64, 128, 256, 512};
  int quadrature_cells = 1 << 16;
  std::vector<int> tail_ns = {8, 16, 32, 64};
};

struct Paths {
  std::filesystem::path data, preprocessed, models, eval, analysis;
};

struct ExperimentConfig {
  std::string name = "advection";
  std::uint64_t seed = 2024;
  std::filesystem::path output_dir = "runs/advection";
  pde::DatasetConfig dataset;
  PreprocessConfig preprocess;
  ModelConfig model;
  TrainingConfig training;
  EvalConfig eval;
  AnalysisConfig analysis;
  // Empty entries default to output_dir/<stage>.
  Paths paths;

  Paths resolved_paths() const;
  void validate() const;
  json to_json() const;
  static ExperimentConfig from_json(const json& j);
  std::string hash() const;
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::filesystem::path& file);

inline const std::vector<std::string> kFamilies = {"vanilla", "shift", "radaptive-coord",
                                                   "radaptive-sol"};

json cmd_datagen(const ExperimentConfig& cfg);
json cmd_preprocess(const ExperimentConfig& cfg);
json cmd_train(const ExperimentConfig& cfg, const std::string& family);
// Writes eval/errors.csv (model,rel_l2), eval/per_sample.csv and
// eval/mesh.json; returns the table as JSON.
json cmd_eval(const ExperimentConfig& cfg);
// what: spectrum | tail | appendixb | fem-rate
json cmd_analyze(const ExperimentConfig& cfg, const std::string& what);

// Building blocks shared with the acceptance suite.

// Preprocesses every sample of a raw split.
equi::PreprocessedSplit preprocess_split(const pde::PdeDataset& d, const PreprocessConfig& cfg,
                                         const std::string& source_hash);

// Column indices of the training points on the stored output grid.
std::vector<int> output_point_indices(const pde::PdeDataset& d, int points, int times);

// Supervised data for the baselines (subsampled outputs) and the sub-nets.
training::SupervisedData baseline_data(const pde::PdeDataset& d, int points, int times);
training::SupervisedData adaptive_data(const equi::PreprocessedSplit& p, bool coordinate);

// Query box of the stored outputs ([lo, hi] in x, and [t0, t1] for space-time).
deeponet::QueryNormalization output_query_norm(const pde::PdeDataset& d);
deeponet::ComputationalGrid computational_grid(const equi::PreprocessedSplit& p);

struct RAdaptiveEval {
  Mat predictions;         // N x (n_t * n_x) on the stored output grid
  double positive_det = 0.0;   // fraction of pre-fix detJ > 0
  double monotone_after_fix = 0.0;  // fraction of meshes strictly increasing after the fix
  double monotone_before_fix = 0.0;
};

// Algorithm: graph on the evaluation xi grid -> monotone fix -> linear
// interpolation onto the stored output grid.
RAdaptiveEval radaptive_evaluate(const deeponet::RAdaptiveSystem& system,
                                 const pde::PdeDataset& test, int eval_xi_cells);

}  // namespace radon::experiment
