#pragma once

// DeepONet architectures: vanilla branch/trunk, Shift-DeepONet and the
// R-adaptive system (coordinate net + solution net on a computational grid).

#include "radon/container.hpp"
#include "radon/nn.hpp"
#include "radon/reconstruct.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace radon::deeponet {

// Per-dimension affine map of [lo, hi] onto [-1, 1]. Empty means identity.
struct QueryNormalization {
  Vec lo, hi;

  static QueryNormalization for_box(const Vec& lo, const Vec& hi);
  bool is_identity() const { return lo.size() == 0; }
  Mat apply(const Mat& points) const;
  Vec jacobian(int dim) const;  // d(normalized)/d(raw), per dimension
};

// (a - mean) / scale, per feature. Empty means identity.
struct InputStandardization {
  Vec mean, scale;

  static InputStandardization fit(const Mat& inputs);
  bool is_identity() const { return mean.size() == 0; }
  Mat apply(const Mat& inputs) const;
};

struct NetSpec {
  std::vector<int> hidden = {256, 256, 256, 256};
  nn::Activation activation = nn::Activation::relu;
};

struct DeepOnetSpec {
  int input_dim = 1;
  int query_dim = 1;
  int basis = 100;
  NetSpec branch{{256, 256, 256, 256}, nn::Activation::tanh};
  NetSpec trunk{{256, 256, 256, 256}, nn::Activation::relu};
};

struct DeepOnetModel {
  nn::MlpParams branch;  // input_dim -> basis
  nn::MlpParams trunk;   // query_dim -> basis
  QueryNormalization query_norm;
  InputStandardization input_norm;

  int basis() const { return branch.output_dim(); }
  int input_dim() const { return branch.input_dim(); }
  int query_dim() const { return trunk.input_dim(); }
  void validate() const;
};

DeepOnetModel make_deeponet(const DeepOnetSpec& spec, std::uint64_t seed);

// sum_k beta_k(a) tau_k(y) at every query row.
Vec deeponet_eval(const DeepOnetModel& model, const Vec& a_enc, const Mat& queries);
// (N x P) predictions for N encoded inputs and P shared queries.
Mat deeponet_eval_batch(const DeepOnetModel& model, const Mat& inputs, const Mat& queries);

struct DeepOnetTape {
  nn::ForwardCache branch, trunk;
  Mat coefficients;  // N x n
  Mat basis;         // P x n
};

struct DeepOnetGradients {
  nn::MlpGradients branch, trunk;
};

Mat deeponet_forward(const DeepOnetModel& model, const Mat& inputs, const Mat& queries,
                     DeepOnetTape& tape);
DeepOnetGradients deeponet_backward(const DeepOnetModel& model, const DeepOnetTape& tape,
                                    const Mat& prediction_grad);

// Shift-DeepONet: sum_k beta_k(a) tau_k(A_k(a) y + gamma_k(a)). The scale net
// emits n*d*d entries laid out (k, row, col) row-major, the shift net n*d
// entries laid out (k, row). Normalization is applied to y before the affine
// map.
struct ShiftDeepOnetModel {
  nn::MlpParams branch;     // input_dim -> n
  nn::MlpParams trunk;      // d -> n, re-evaluated at n transformed points
  nn::MlpParams scale_net;  // input_dim -> n*d*d
  nn::MlpParams shift_net;  // input_dim -> n*d
  QueryNormalization query_norm;
  InputStandardization input_norm;

  int basis() const { return branch.output_dim(); }
  int input_dim() const { return branch.input_dim(); }
  int query_dim() const { return trunk.input_dim(); }
  void validate() const;
};

struct ShiftDeepOnetSpec {
  DeepOnetSpec base;
  NetSpec scale{{256, 256, 256, 256}, nn::Activation::tanh};
  NetSpec shift{{256, 256, 256, 256}, nn::Activation::tanh};
};

ShiftDeepOnetModel make_shift_deeponet(const ShiftDeepOnetSpec& spec, std::uint64_t seed);

Vec shift_deeponet_eval(const ShiftDeepOnetModel& model, const Vec& a_enc, const Mat& queries);
Mat shift_deeponet_eval_batch(const ShiftDeepOnetModel& model, const Mat& inputs,
                              const Mat& queries);

struct ShiftGradients {
  nn::MlpGradients branch, trunk, scale_net, shift_net;
};

// Gradients for a given dL/dprediction. The trunk is re-run sample by sample
// so memory stays at O(P * n * width).
ShiftGradients shift_deeponet_gradients(const ShiftDeepOnetModel& model, const Mat& inputs,
                                        const Mat& queries, const Mat& prediction_grad);

// Computational grid of an R-adaptive system. `times` is empty for 1D
// problems; otherwise queries are (xi, t) pairs laid out t-major.
struct ComputationalGrid {
  Vec xi;
  Vec times;

  Mat queries() const;
  int slice_count() const { return times.size() == 0 ? 1 : static_cast<int>(times.size()); }
};

struct RAdaptiveSystem {
  DeepOnetModel coord_net;  // (a, xi) -> physical coordinate
  DeepOnetModel sol_net;    // (a, xi) -> adaptive solution value
  ComputationalGrid grid;

  void validate() const;
};

// {(coord_net(a, xi_j), sol_net(a, xi_j))} in xi order; no monotonicity fix.
reconstruct::GraphPrediction radaptive_predict_graph(const RAdaptiveSystem& system,
                                                     const Vec& a_enc);
// One graph per time slice for space-time systems.
std::vector<reconstruct::GraphPrediction> radaptive_predict_slices(const RAdaptiveSystem& system,
                                                                   const Vec& a_enc);

// Model bundle: a directory with manifest.json plus one checkpoint per net.
inline constexpr int kBundleVersion = 1;

struct Bundle {
  json manifest;
  std::map<std::string, nn::MlpParams> nets;
};

void save_bundle(const std::filesystem::path& dir, const Bundle& bundle);
Bundle load_bundle(const std::filesystem::path& dir);

Bundle to_bundle(const DeepOnetModel& model);
Bundle to_bundle(const ShiftDeepOnetModel& model);
Bundle to_bundle(const RAdaptiveSystem& system);
DeepOnetModel deeponet_from_bundle(const Bundle& bundle);
ShiftDeepOnetModel shift_from_bundle(const Bundle& bundle);
RAdaptiveSystem radaptive_from_bundle(const Bundle& bundle);

}  // namespace radon::deeponet
