#include "radon/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace radon::training {

namespace {

void check_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                          "x" + std::to_string(b.cols()) + ")");
}

}  // namespace

LossValue loss_solution(const Mat& pred, const Mat& target, const Mat& weights) {
  check_same_shape(pred, target, "loss_solution");
  check_same_shape(pred, weights, "loss_solution weights");
  require(pred.size() > 0, "loss of an empty batch");
  const double scale = 1.0 / static_cast<double>(pred.size());
  const Mat r = pred - target;
  LossValue out;
  out.value = (r.array().square() * weights.array()).sum() * scale;
  out.grad = (2.0 * scale) * (r.array() * weights.array()).matrix();
  return out;
}

LossValue loss_plain(const Mat& pred, const Mat& target) {
  return loss_solution(pred, target, Mat::Ones(pred.rows(), pred.cols()));
}

Vec jacobian_stencil(const Vec& x, double dxi, bool periodic) {
  const Eigen::Index n = x.size();
  require(n >= 3, "Jacobian stencil needs at least three knots");
  Vec d(n);
  const double c = 1.0 / (2.0 * dxi);
  for (Eigen::Index j = 1; j + 1 < n; ++j) d[j] = c * (x[j + 1] - x[j - 1]);
  if (periodic) {
    d[0] = c * (x[1] - x[n - 2] + x[n - 1] - x[0]);
    d[n - 1] = d[0];
  } else {
    d[0] = (x[1] - x[0]) / dxi;
    d[n - 1] = (x[n - 1] - x[n - 2]) / dxi;
  }
  return d;
}

Vec jacobian_stencil_transpose(const Vec& g, double dxi, bool periodic) {
  const Eigen::Index n = g.size();
  require(n >= 3, "Jacobian stencil needs at least three knots");
  Vec out = Vec::Zero(n);
  const double c = 1.0 / (2.0 * dxi);
  for (Eigen::Index j = 1; j + 1 < n; ++j) {
    out[j + 1] += c * g[j];
    out[j - 1] -= c * g[j];
  }
  if (periodic) {
    const double s = c * (g[0] + g[n - 1]);
    out[1] += s;
    out[n - 2] -= s;
    out[n - 1] += s;
    out[0] -= s;
  } else {
    out[1] += g[0] / dxi;
    out[0] -= g[0] / dxi;
    out[n - 1] += g[n - 1] / dxi;
    out[n - 2] -= g[n - 1] / dxi;
  }
  return out;
}

CoordinateLoss loss_coordinate(const Mat& pred, const Mat& target, const Mat& weights,
                               double lambda1, double lambda2, const CoordinateLayout& layout) {
  check_same_shape(pred, target, "loss_coordinate");
  check_same_shape(pred, weights, "loss_coordinate weights");
  require(lambda1 >= 0.0 && lambda2 >= 0.0, "loss regularization weights must be nonnegative");
  require(layout.dxi > 0.0, "computational spacing must be positive");
  require(layout.slices >= 1 && pred.cols() % layout.slices == 0,
          "coordinate predictions do not split into the declared slices");
  const Eigen::Index block = pred.cols() / layout.slices;

  const LossValue data = loss_solution(pred, target, weights);
  CoordinateLoss out;
  out.data_term = lambda1 * data.value;
  out.grad = lambda1 * data.grad;

  if (lambda2 > 0.0) {
    const double scale = 1.0 / static_cast<double>(pred.size());
    double penalty = 0.0;
    for (Eigen::Index i = 0; i < pred.rows(); ++i)
      for (int k = 0; k < layout.slices; ++k) {
        const Vec x = pred.row(i).segment(k * block, block).transpose();
        const Vec det = jacobian_stencil(x, layout.dxi, layout.periodic);
        const Vec neg = (-det).cwiseMax(0.0);
        penalty += neg.squaredNorm();
        // d/d det of ReLU(-det)^2 is -2 ReLU(-det).
        const Vec g = jacobian_stencil_transpose(-2.0 * neg, layout.dxi, layout.periodic);
        out.grad.row(i).segment(k * block, block) += (lambda2 * scale) * g.transpose();
      }
    out.penalty_term = lambda2 * scale * penalty;
  }
  out.value = out.data_term + out.penalty_term;
  return out;
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  require(epochs >= 0, "epochs must be nonnegative");
  require(batch_size >= 0, "batch size must be nonnegative");
  require(base_lr > 0.0, "learning rate must be positive");
  require(decay_fraction >= 0.0 && decay_fraction < 1.0, "decay fraction must lie in [0, 1)");
  require(decay_interval >= 1, "decay interval must be positive");
  require(lambda1 >= 0.0 && lambda2 >= 0.0, "lambda1 and lambda2 must be nonnegative");
  require(validation_every >= 1, "validation cadence must be positive");
}

json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"base_lr", base_lr},
          {"decay_fraction", decay_fraction},
          {"decay_interval", decay_interval},
          {"lambda1", lambda1},
          {"lambda2", lambda2},
          {"validation_every", validation_every},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  if (!j.is_object()) throw InvalidArgument("train config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<long>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "base_lr") c.base_lr = value.get<double>();
      else if (key == "decay_fraction") c.decay_fraction = value.get<double>();
      else if (key == "decay_interval") c.decay_interval = value.get<long>();
      else if (key == "lambda1") c.lambda1 = value.get<double>();
      else if (key == "lambda2") c.lambda2 = value.get<double>();
      else if (key == "validation_every") c.validation_every = value.get<long>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw InvalidArgument("unknown key '" + key + "' in train config");
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed train config: ") + e.what());
  }
  c.validate();
  return c;
}

json TrainReport::to_json() const {
  json history = json::array();
  for (std::size_t i = 0; i < validation_epochs.size(); ++i)
    history.push_back({{"epoch", validation_epochs[i]}, {"validation_rel_l2", validation_error[i]}});
  return {{"history", history},
          {"final_loss", final_loss},
          {"best_validation_rel_l2", best_validation},
          {"best_epoch", best_epoch},
          {"epochs_run", epochs_run},
          {"wall_seconds", seconds},
          {"status", status}};
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "plain") return LossKind::plain;
  if (s == "solution") return LossKind::solution;
  if (s == "coordinate") return LossKind::coordinate;
  throw InvalidArgument("unknown loss kind '" + s + "'");
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::plain: return "plain";
    case LossKind::solution: return "solution";
    case LossKind::coordinate: return "coordinate";
  }
  return "plain";
}

void SupervisedData::validate() const {
  require(inputs.rows() >= 1, "supervised data needs at least one sample");
  require(targets.rows() == inputs.rows(), "inputs and targets differ in sample count");
  require(targets.cols() == queries.rows(), "targets must have one column per query");
  require(weights.size() == 0 || (weights.rows() == targets.rows() && weights.cols() == targets.cols()),
          "weights must match the targets");
  require(inputs.allFinite() && queries.allFinite() && targets.allFinite(),
          "supervised data contains non-finite values");
}

namespace {

struct Batch {
  Mat inputs, targets, weights;
};

Batch select_rows(const SupervisedData& d, const std::vector<int>& rows) {
  Batch b;
  b.inputs.resize(rows.size(), d.inputs.cols());
  b.targets.resize(rows.size(), d.targets.cols());
  if (d.weights.size() > 0) b.weights.resize(rows.size(), d.weights.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    b.inputs.row(r) = d.inputs.row(rows[r]);
    b.targets.row(r) = d.targets.row(rows[r]);
    if (d.weights.size() > 0) b.weights.row(r) = d.weights.row(rows[r]);
  }
  return b;
}

// Row groups for one epoch: the whole set, or shuffled minibatches.
std::vector<std::vector<int>> epoch_batches(int n, int batch_size, std::uint64_t seed, long epoch) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (batch_size <= 0 || batch_size >= n) return {order};
  std::mt19937_64 rng(substream_seed(seed, "shuffle", static_cast<std::uint64_t>(epoch)));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; s += batch_size)
    out.emplace_back(order.begin() + s, order.begin() + std::min(n, s + batch_size));
  return out;
}

LossValue evaluate_loss(const Mat& pred, const Batch& b, const LossSpec& spec,
                        const TrainConfig& cfg) {
  const Mat w = b.weights.size() > 0 ? b.weights : Mat::Ones(pred.rows(), pred.cols());
  switch (spec.kind) {
    case LossKind::plain: return loss_plain(pred, b.targets);
    case LossKind::solution: return loss_solution(pred, b.targets, w);
    case LossKind::coordinate: {
      auto c = loss_coordinate(pred, b.targets, w, cfg.lambda1, cfg.lambda2, spec.layout);
      return {c.value, std::move(c.grad)};
    }
  }
  return {};
}

// Generic loop: Model-specific work lives in the step and predict callables.
template <class Model, class Step, class Predict>
TrainResult<Model> run_loop(const Model& init, const SupervisedData& train,
                            const SupervisedData& validation, const TrainConfig& cfg, Step step,
                            Predict predict) {
  cfg.validate();
  train.validate();
  validation.validate();
  require(validation.queries.cols() == train.queries.cols(),
          "train and validation queries differ in dimension");
  const auto start = std::chrono::steady_clock::now();

  TrainResult<Model> result{init, init, {}};
  auto record = [&](long epoch) {
    const Mat pred = predict(result.model, validation.inputs, validation.queries);
    const double err = reconstruct::rel_l2_error(pred, validation.targets);
    result.report.validation_epochs.push_back(epoch);
    result.report.validation_error.push_back(err);
    if (result.report.validation_epochs.size() == 1 || err < result.report.best_validation) {
      result.report.best_validation = err;
      result.report.best_epoch = epoch;
      result.best = result.model;
    }
  };
  record(0);

  for (long epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = nn::lr_schedule(epoch - 1, cfg.base_lr, cfg.decay_fraction, cfg.decay_interval);
    const Model last_good = result.model;
    double epoch_loss = 0.0;
    bool finite = true;
    for (const auto& rows : epoch_batches(train.inputs.rows(), cfg.batch_size, cfg.seed, epoch)) {
      const Batch b = select_rows(train, rows);
      const double loss = step(result.model, b, lr);
      epoch_loss += loss * static_cast<double>(rows.size());
      if (!std::isfinite(loss)) finite = false;
    }
    epoch_loss /= static_cast<double>(train.inputs.rows());
    if (!finite || !std::isfinite(epoch_loss)) {
      result.model = last_good;
      result.report.status = "non-finite loss at epoch " + std::to_string(epoch);
      break;
    }
    result.report.final_loss = epoch_loss;
    result.report.epochs_run = epoch;
    if (epoch % cfg.validation_every == 0) record(epoch);
  }
  result.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

bool params_finite(const deeponet::DeepOnetModel& m) {
  return m.branch.all_finite() && m.trunk.all_finite();
}

}  // namespace

TrainResult<deeponet::DeepOnetModel> train_deeponet(const deeponet::DeepOnetModel& init,
                                                    const SupervisedData& train,
                                                    const SupervisedData& validation,
                                                    const LossSpec& loss, const TrainConfig& cfg) {
  init.validate();
  nn::AdamState adam_branch = nn::AdamState::for_params(init.branch);
  nn::AdamState adam_trunk = nn::AdamState::for_params(init.trunk);

  auto step = [&](deeponet::DeepOnetModel& model, const Batch& b, double lr) {
    deeponet::DeepOnetTape tape;
    const Mat pred = deeponet::deeponet_forward(model, b.inputs, train.queries, tape);
    const LossValue l = evaluate_loss(pred, b, loss, cfg);
    if (!std::isfinite(l.value)) return l.value;
    const auto g = deeponet::deeponet_backward(model, tape, l.grad);
    nn::adam_step(adam_branch, model.branch, g.branch, lr);
    nn::adam_step(adam_trunk, model.trunk, g.trunk, lr);
    return params_finite(model) ? l.value : std::nan("");
  };
  auto predict = [](const deeponet::DeepOnetModel& m, const Mat& in, const Mat& q) {
    return deeponet::deeponet_eval_batch(m, in, q);
  };
  return run_loop(init, train, validation, cfg, step, predict);
}

TrainResult<deeponet::ShiftDeepOnetModel> train_shift(const deeponet::ShiftDeepOnetModel& init,
                                                      const SupervisedData& train,
                                                      const SupervisedData& validation,
                                                      const TrainConfig& cfg) {
  init.validate();
  nn::AdamState a_branch = nn::AdamState::for_params(init.branch);
  nn::AdamState a_trunk = nn::AdamState::for_params(init.trunk);
  nn::AdamState a_scale = nn::AdamState::for_params(init.scale_net);
  nn::AdamState a_shift = nn::AdamState::for_params(init.shift_net);

  auto step = [&](deeponet::ShiftDeepOnetModel& model, const Batch& b, double lr) {
    const Mat pred = deeponet::shift_deeponet_eval_batch(model, b.inputs, train.queries);
    const LossValue l = loss_plain(pred, b.targets);
    if (!std::isfinite(l.value)) return l.value;
    const auto g = deeponet::shift_deeponet_gradients(model, b.inputs, train.queries, l.grad);
    nn::adam_step(a_branch, model.branch, g.branch, lr);
    nn::adam_step(a_trunk, model.trunk, g.trunk, lr);
    nn::adam_step(a_scale, model.scale_net, g.scale_net, lr);
    nn::adam_step(a_shift, model.shift_net, g.shift_net, lr);
    const bool ok = model.branch.all_finite() && model.trunk.all_finite() &&
                    model.scale_net.all_finite() && model.shift_net.all_finite();
    return ok ? l.value : std::nan("");
  };
  auto predict = [](const deeponet::ShiftDeepOnetModel& m, const Mat& in, const Mat& q) {
    return deeponet::shift_deeponet_eval_batch(m, in, q);
  };
  return run_loop(init, train, validation, cfg, step, predict);
}

}  // namespace radon::training
