#pragma once

// Dense feed-forward networks with exact reverse-mode gradients and Adam.
//
// Batches are row-major in the usual sense: one sample per row, so a batch
// fed to a net with layer_sizes[0] == m has shape (batch x m).

#include "radon/common.hpp"

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace radon::nn {

enum class Activation { relu, tanh };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

// weights[l] is (layer_sizes[l+1] x layer_sizes[l]); the activation applies to
// every hidden layer, the output layer is linear.
struct MlpParams {
  std::vector<int> layer_sizes;
  std::vector<Mat> weights;
  std::vector<Vec> biases;
  Activation activation = Activation::relu;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
  bool all_finite() const;
};

struct MlpGradients {
  std::vector<Mat> weights;
  std::vector<Vec> biases;
  Mat input;  // dL/d(batch), same shape as the forward batch

  static MlpGradients zeros_like(const MlpParams& p);
  MlpGradients& operator+=(const MlpGradients& other);
};

struct ForwardCache {
  std::vector<Mat> activations;     // activations[0] is the batch itself
  std::vector<Mat> preactivations;  // one per layer
  std::uint64_t fingerprint = 0;    // parameters the cache was built with
};

struct ForwardResult {
  Mat outputs;
  ForwardCache cache;
};

std::uint64_t fingerprint(const MlpParams& p);

MlpParams mlp_init(std::span<const int> layer_sizes, Activation activation, std::uint64_t seed);

ForwardResult mlp_forward(const MlpParams& p, const Mat& batch);

// Forward pass without retaining a cache.
Mat mlp_apply(const MlpParams& p, const Mat& batch);

// Gradient of a scalar loss L given dL/d(outputs). Throws if the cache was
// produced by different parameters or has inconsistent shapes.
MlpGradients mlp_backward(const MlpParams& p, const ForwardCache& cache, const Mat& output_grad);

struct AdamState {
  std::vector<Mat> m_weights, v_weights;
  std::vector<Vec> m_biases, v_biases;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const MlpParams& p, double beta1 = 0.9, double beta2 = 0.999,
                              double eps = 1e-8);
};

// One bias-corrected Adam update, in place.
void adam_step(AdamState& state, MlpParams& params, const MlpGradients& grads, double lr);

// base_lr * (1 - decay_fraction)^floor(epoch / decay_interval)
double lr_schedule(long epoch, double base_lr, double decay_fraction, long decay_interval);

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const MlpParams& p);
MlpParams load_checkpoint(const std::filesystem::path& path);

}  // namespace radon::nn
