#pragma once

// Weighted losses and the Adam training loop for vanilla, Shift and the two
// R-adaptive sub-networks.

#include "radon/deeponet.hpp"

#include <string>
#include <vector>

namespace radon::training {

// A loss value together with dL/d(prediction).
struct LossValue {
  double value = 0.0;
  Mat grad;
};

// 1/(N1 N2) sum |target - pred|^2 w
LossValue loss_solution(const Mat& pred, const Mat& target, const Mat& weights);
// Same with w = 1.
LossValue loss_plain(const Mat& pred, const Mat& target);

// Layout of the coordinate predictions: each row holds `slices` consecutive
// blocks of xi values (one block per time slice).
struct CoordinateLayout {
  double dxi = 1.0;
  int slices = 1;
  bool periodic = false;
};

struct CoordinateLoss {
  double value = 0.0;
  double data_term = 0.0;     // lambda1 * weighted MSE
  double penalty_term = 0.0;  // lambda2 * mean ReLU(-detJ)^2
  Mat grad;
};

// 1/(N1 N2) sum [lambda1 |target - pred|^2 w + lambda2 ReLU^2(-detJ(pred))],
// detJ by the central-difference stencil of jacobian_det_1d applied per block.
CoordinateLoss loss_coordinate(const Mat& pred, const Mat& target, const Mat& weights,
                               double lambda1, double lambda2, const CoordinateLayout& layout);

// The stencil itself on one block, and its transpose applied to a cotangent.
Vec jacobian_stencil(const Vec& x, double dxi, bool periodic);
Vec jacobian_stencil_transpose(const Vec& g, double dxi, bool periodic);

struct TrainConfig {
  long epochs = 10000;
  int batch_size = 0;  // 0 = full batch
  double base_lr = 1e-3;
  double decay_fraction = 0.1;
  long decay_interval = 2000;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  long validation_every = 2000;
  std::uint64_t seed = 0;  // shuffling substream; init seeds come from the model factory

  void validate() const;
  json to_json() const;
  static TrainConfig from_json(const json& j);
};

struct TrainReport {
  std::vector<long> validation_epochs;
  std::vector<double> validation_error;  // mean relative L2 on the validation split
  double final_loss = 0.0;
  double best_validation = 0.0;
  long best_epoch = 0;
  long epochs_run = 0;
  double seconds = 0.0;
  std::string status = "ok";  // "ok" or a description of the abort

  json to_json() const;
};

enum class LossKind { plain, solution, coordinate };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind k);

// Supervised data with shared queries: targets and weights are N x P.
// Empty weights mean w = 1.
struct SupervisedData {
  Mat inputs;
  Mat queries;
  Mat targets;
  Mat weights;

  void validate() const;
};

struct LossSpec {
  LossKind kind = LossKind::plain;
  CoordinateLayout layout;  // used by LossKind::coordinate
};

template <class Model>
struct TrainResult {
  Model model;  // parameters after the last completed epoch
  Model best;   // best validation record
  TrainReport report;
};

TrainResult<deeponet::DeepOnetModel> train_deeponet(const deeponet::DeepOnetModel& init,
                                                    const SupervisedData& train,
                                                    const SupervisedData& validation,
                                                    const LossSpec& loss, const TrainConfig& cfg);

TrainResult<deeponet::ShiftDeepOnetModel> train_shift(const deeponet::ShiftDeepOnetModel& init,
                                                      const SupervisedData& train,
                                                      const SupervisedData& validation,
                                                      const TrainConfig& cfg);

}  // namespace radon::training
