#include "radon/nn.hpp"

#include "radon/container.hpp"

#include <bit>
#include <cmath>
#include <random>

namespace radon::nn {

std::string_view to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

bool MlpParams::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  return true;
}

MlpGradients MlpGradients::zeros_like(const MlpParams& p) {
  MlpGradients g;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    g.weights.push_back(Mat::Zero(p.weights[l].rows(), p.weights[l].cols()));
    g.biases.push_back(Vec::Zero(p.biases[l].size()));
  }
  return g;
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
  require(weights.size() == other.weights.size(), "gradient layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  return *this;
}

std::uint64_t fingerprint(const MlpParams& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (int s : p.layer_sizes) mix(static_cast<std::uint64_t>(s));
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double* w = p.weights[l].data();
    for (Eigen::Index i = 0; i < p.weights[l].size(); ++i) mix(std::bit_cast<std::uint64_t>(w[i]));
    const double* b = p.biases[l].data();
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) mix(std::bit_cast<std::uint64_t>(b[i]));
  }
  return h;
}

MlpParams mlp_init(std::span<const int> layer_sizes, Activation activation, std::uint64_t seed) {
  require(layer_sizes.size() >= 2, "an MLP needs at least an input and an output layer");
  for (int s : layer_sizes) require(s >= 1, "layer sizes must be positive");

  MlpParams p;
  p.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  p.activation = activation;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat w(layer_sizes[l + 1], fan_in);
    // Filled row by row so the draw order matches the checkpoint layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vec::Zero(layer_sizes[l + 1]));
  }
  return p;
}

namespace {

void check_batch(const MlpParams& p, const Mat& batch) {
  require(!p.weights.empty(), "MLP has no layers");
  if (batch.cols() != p.input_dim())
    throw InvalidArgument("batch has " + std::to_string(batch.cols()) + " features, net expects " +
                          std::to_string(p.input_dim()));
}

void activate(Activation a, const Mat& z, Mat& out) {
  if (a == Activation::relu)
    out = z.cwiseMax(0.0);
  else
    out = z.array().tanh().matrix();
}

}  // namespace

ForwardResult mlp_forward(const MlpParams& p, const Mat& batch) {
  check_batch(p, batch);
  ForwardResult r;
  auto& cache = r.cache;
  const int layers = p.layer_count();
  cache.activations.reserve(layers);
  cache.preactivations.reserve(layers);
  cache.activations.push_back(batch);
  for (int l = 0; l < layers; ++l) {
    Mat z = cache.activations.back() * p.weights[l].transpose();
    z.rowwise() += p.biases[l].transpose();
    if (l + 1 < layers) {
      Mat a;
      activate(p.activation, z, a);
      cache.preactivations.push_back(std::move(z));
      cache.activations.push_back(std::move(a));
    } else {
      r.outputs = z;
      cache.preactivations.push_back(std::move(z));
    }
  }
  cache.fingerprint = fingerprint(p);
  return r;
}

Mat mlp_apply(const MlpParams& p, const Mat& batch) {
  check_batch(p, batch);
  Mat a = batch;
  const int layers = p.layer_count();
  for (int l = 0; l < layers; ++l) {
    Mat z = a * p.weights[l].transpose();
    z.rowwise() += p.biases[l].transpose();
    if (l + 1 < layers)
      activate(p.activation, z, a);
    else
      a = std::move(z);
  }
  return a;
}

MlpGradients mlp_backward(const MlpParams& p, const ForwardCache& cache, const Mat& output_grad) {
  const int layers = p.layer_count();
  if (static_cast<int>(cache.preactivations.size()) != layers ||
      static_cast<int>(cache.activations.size()) != layers)
    throw InvalidArgument("forward cache does not match the network depth");
  if (cache.fingerprint != fingerprint(p))
    throw InvalidArgument("stale forward cache: parameters changed since the forward pass");
  const Eigen::Index batch = cache.activations[0].rows();
  if (output_grad.rows() != batch || output_grad.cols() != p.output_dim())
    throw InvalidArgument("output gradient shape does not match the forward outputs");

  MlpGradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  Mat delta = output_grad;  // dL/dz for the current layer
  for (int l = layers - 1; l >= 0; --l) {
    g.weights[l].noalias() = delta.transpose() * cache.activations[l];
    g.biases[l] = delta.colwise().sum().transpose();
    Mat upstream = delta * p.weights[l];
    if (l > 0) {
      const Mat& z = cache.preactivations[l - 1];
      if (p.activation == Activation::relu)
        delta = (z.array() > 0.0).select(upstream, 0.0);
      else
        delta = upstream.array() * (1.0 - cache.activations[l].array().square());
    } else {
      g.input = std::move(upstream);
    }
  }
  return g;
}

AdamState AdamState::for_params(const MlpParams& p, double beta1, double beta2, double eps) {
  AdamState s;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    s.m_weights.push_back(Mat::Zero(p.weights[l].rows(), p.weights[l].cols()));
    s.v_weights.push_back(Mat::Zero(p.weights[l].rows(), p.weights[l].cols()));
    s.m_biases.push_back(Vec::Zero(p.biases[l].size()));
    s.v_biases.push_back(Vec::Zero(p.biases[l].size()));
  }
  return s;
}

namespace {

template <class T>
void adam_update(T& param, T& m, T& v, const T& g, double beta1, double beta2, double step_size,
                 double eps_hat) {
  m = beta1 * m + (1.0 - beta1) * g;
  v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
  param.array() -= step_size * m.array() / (v.array().sqrt() + eps_hat);
}

}  // namespace

void adam_step(AdamState& state, MlpParams& params, const MlpGradients& grads, double lr) {
  require(lr > 0.0, "learning rate must be positive");
  const std::size_t layers = params.weights.size();
  require(state.m_weights.size() == layers && grads.weights.size() == layers,
          "Adam state / gradient layer count mismatch");
  for (std::size_t l = 0; l < layers; ++l)
    require(grads.weights[l].rows() == params.weights[l].rows() &&
                grads.weights[l].cols() == params.weights[l].cols() &&
                grads.biases[l].size() == params.biases[l].size() &&
                state.m_weights[l].rows() == params.weights[l].rows() &&
                state.m_weights[l].cols() == params.weights[l].cols(),
            "Adam shapes disagree with the parameters");

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  // Equivalent to lr * m_hat / (sqrt(v_hat) + eps) with bias-corrected moments.
  const double step_size = lr * std::sqrt(bc2) / bc1;
  const double eps_hat = state.eps * std::sqrt(bc2);
  for (std::size_t l = 0; l < layers; ++l) {
    adam_update(params.weights[l], state.m_weights[l], state.v_weights[l], grads.weights[l],
                state.beta1, state.beta2, step_size, eps_hat);
    adam_update(params.biases[l], state.m_biases[l], state.v_biases[l], grads.biases[l],
                state.beta1, state.beta2, step_size, eps_hat);
  }
}

double lr_schedule(long epoch, double base_lr, double decay_fraction, long decay_interval) {
  require(base_lr > 0.0, "base learning rate must be positive");
  require(decay_fraction >= 0.0 && decay_fraction < 1.0, "decay fraction must lie in [0, 1)");
  require(decay_interval >= 1, "decay interval must be at least one epoch");
  const long k = epoch / decay_interval;
  return base_lr * std::pow(1.0 - decay_fraction, static_cast<double>(k));
}

void save_checkpoint(const std::filesystem::path& path, const MlpParams& p) {
  Container c;
  c.header = {{"format", "radon-mlp"},
              {"format_version", kCheckpointVersion},
              {"layer_sizes", p.layer_sizes},
              {"activation", std::string(to_string(p.activation))}};
  for (int l = 0; l < p.layer_count(); ++l) {
    c.add("W" + std::to_string(l), p.weights[l]);
    c.add("b" + std::to_string(l), p.biases[l]);
  }
  write_container(path, c);
}

MlpParams load_checkpoint(const std::filesystem::path& path) {
  Container c = read_container(path);
  if (c.header.value("format", "") != "radon-mlp")
    throw FormatError(path.string() + " is not an MLP checkpoint");
  if (c.header.value("format_version", -1) != kCheckpointVersion)
    throw FormatError(path.string() + ": unsupported checkpoint version");
  MlpParams p;
  p.layer_sizes = c.header.at("layer_sizes").get<std::vector<int>>();
  p.activation = activation_from_string(c.header.at("activation").get<std::string>());
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    Mat w = c.matrix("W" + std::to_string(l));
    Vec b = c.vector("b" + std::to_string(l));
    if (w.rows() != p.layer_sizes[l + 1] || w.cols() != p.layer_sizes[l] ||
        b.size() != p.layer_sizes[l + 1])
      throw FormatError(path.string() + ": layer " + std::to_string(l) + " has the wrong shape");
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  return p;
}

}  // namespace radon::nn
