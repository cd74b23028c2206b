#include "radon/deeponet.hpp"

#include <cmath>

namespace radon::deeponet {

using nn::MlpParams;

QueryNormalization QueryNormalization::for_box(const Vec& lo, const Vec& hi) {
  require(lo.size() == hi.size() && lo.size() > 0, "normalization box dimension mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i) require(hi[i] > lo[i], "empty normalization box");
  return {lo, hi};
}

Mat QueryNormalization::apply(const Mat& points) const {
  if (is_identity()) return points;
  require(points.cols() == lo.size(), "query dimension does not match the normalization");
  Mat out(points.rows(), points.cols());
  for (Eigen::Index d = 0; d < points.cols(); ++d)
    out.col(d) = ((points.col(d).array() - lo[d]) * (2.0 / (hi[d] - lo[d])) - 1.0).matrix();
  return out;
}

Vec QueryNormalization::jacobian(int dim) const {
  if (is_identity()) return Vec::Ones(dim);
  return (2.0 / (hi - lo).array()).matrix();
}

InputStandardization InputStandardization::fit(const Mat& inputs) {
  require(inputs.rows() >= 1, "cannot standardize an empty input set");
  InputStandardization s;
  s.mean = inputs.colwise().mean().transpose();
  s.scale.resize(inputs.cols());
  for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
    const double var = (inputs.col(c).array() - s.mean[c]).square().mean();
    s.scale[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Mat InputStandardization::apply(const Mat& inputs) const {
  if (is_identity()) return inputs;
  require(inputs.cols() == mean.size(), "input dimension does not match the standardization");
  return ((inputs.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array())
      .matrix();
}

namespace {

std::vector<int> layer_sizes(int in, const NetSpec& spec, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
  sizes.push_back(out);
  return sizes;
}

MlpParams make_net(int in, const NetSpec& spec, int out, std::uint64_t seed, const char* name) {
  const auto sizes = layer_sizes(in, spec, out);
  return nn::mlp_init(sizes, spec.activation, substream_seed(seed, name));
}

}  // namespace

void DeepOnetModel::validate() const {
  require(basis() >= 1, "DeepONet basis count must be positive");
  require(branch.output_dim() == trunk.output_dim(),
          "branch and trunk output dimensions must agree");
  require(query_norm.is_identity() || query_norm.lo.size() == query_dim(),
          "query normalization dimension mismatch");
  require(input_norm.is_identity() || input_norm.mean.size() == input_dim(),
          "input standardization dimension mismatch");
}

DeepOnetModel make_deeponet(const DeepOnetSpec& spec, std::uint64_t seed) {
  require(spec.basis >= 1 && spec.input_dim >= 1 && spec.query_dim >= 1,
          "DeepONet dimensions must be positive");
  DeepOnetModel m;
  m.branch = make_net(spec.input_dim, spec.branch, spec.basis, seed, "branch");
  m.trunk = make_net(spec.query_dim, spec.trunk, spec.basis, seed, "trunk");
  return m;
}

namespace {

void check_inputs(int input_dim, int query_dim, const Mat& inputs, const Mat& queries) {
  if (inputs.cols() != input_dim)
    throw InvalidArgument("encoded input has length " + std::to_string(inputs.cols()) +
                          ", branch expects " + std::to_string(input_dim));
  if (queries.cols() != query_dim)
    throw InvalidArgument("query points have dimension " + std::to_string(queries.cols()) +
                          ", trunk expects " + std::to_string(query_dim));
}

}  // namespace

Mat deeponet_eval_batch(const DeepOnetModel& model, const Mat& inputs, const Mat& queries) {
  model.validate();
  check_inputs(model.input_dim(), model.query_dim(), inputs, queries);
  const Mat beta = nn::mlp_apply(model.branch, model.input_norm.apply(inputs));
  const Mat tau = nn::mlp_apply(model.trunk, model.query_norm.apply(queries));
  return beta * tau.transpose();
}

Vec deeponet_eval(const DeepOnetModel& model, const Vec& a_enc, const Mat& queries) {
  return deeponet_eval_batch(model, a_enc.transpose(), queries).row(0).transpose();
}

Mat deeponet_forward(const DeepOnetModel& model, const Mat& inputs, const Mat& queries,
                     DeepOnetTape& tape) {
  model.validate();
  check_inputs(model.input_dim(), model.query_dim(), inputs, queries);
  auto b = nn::mlp_forward(model.branch, model.input_norm.apply(inputs));
  auto t = nn::mlp_forward(model.trunk, model.query_norm.apply(queries));
  tape.coefficients = std::move(b.outputs);
  tape.basis = std::move(t.outputs);
  tape.branch = std::move(b.cache);
  tape.trunk = std::move(t.cache);
  return tape.coefficients * tape.basis.transpose();
}

DeepOnetGradients deeponet_backward(const DeepOnetModel& model, const DeepOnetTape& tape,
                                    const Mat& prediction_grad) {
  require(prediction_grad.rows() == tape.coefficients.rows() &&
              prediction_grad.cols() == tape.basis.rows(),
          "prediction gradient shape does not match the forward pass");
  const Mat d_beta = prediction_grad * tape.basis;               // N x n
  const Mat d_tau = prediction_grad.transpose() * tape.coefficients;  // P x n
  return {nn::mlp_backward(model.branch, tape.branch, d_beta),
          nn::mlp_backward(model.trunk, tape.trunk, d_tau)};
}

// ---------------------------------------------------------------------------
// Shift-DeepONet

void ShiftDeepOnetModel::validate() const {
  const int n = basis();
  const int d = query_dim();
  require(n >= 1, "Shift-DeepONet basis count must be positive");
  require(trunk.output_dim() == n, "trunk output must equal the basis count");
  require(scale_net.output_dim() == n * d * d, "scale net must emit n*d*d entries");
  require(shift_net.output_dim() == n * d, "shift net must emit n*d entries");
  require(scale_net.input_dim() == input_dim() && shift_net.input_dim() == input_dim(),
          "scale/shift nets must read the encoded input");
}

ShiftDeepOnetModel make_shift_deeponet(const ShiftDeepOnetSpec& spec, std::uint64_t seed) {
  const auto& b = spec.base;
  require(b.basis >= 1 && b.input_dim >= 1 && b.query_dim >= 1,
          "Shift-DeepONet dimensions must be positive");
  ShiftDeepOnetModel m;
  m.branch = make_net(b.input_dim, b.branch, b.basis, seed, "branch");
  m.trunk = make_net(b.query_dim, b.trunk, b.basis, seed, "trunk");
  m.scale_net = make_net(b.input_dim, spec.scale, b.basis * b.query_dim * b.query_dim, seed, "scale");
  m.shift_net = make_net(b.input_dim, spec.shift, b.basis * b.query_dim, seed, "shift");
  return m;
}

namespace {

// Trunk inputs for one sample: row p*n + k holds A_k y_p + gamma_k.
Mat shifted_points(const Eigen::RowVectorXd& scale, const Eigen::RowVectorXd& shift, const Mat& y,
                   int n, int d) {
  Mat z(y.rows() * n, d);
  for (Eigen::Index p = 0; p < y.rows(); ++p)
    for (int k = 0; k < n; ++k)
      for (int r = 0; r < d; ++r) {
        double v = shift[k * d + r];
        for (int c = 0; c < d; ++c) v += scale[(k * d + r) * d + c] * y(p, c);
        z(p * n + k, r) = v;
      }
  return z;
}

}  // namespace

Mat shift_deeponet_eval_batch(const ShiftDeepOnetModel& model, const Mat& inputs,
                              const Mat& queries) {
  model.validate();
  check_inputs(model.input_dim(), model.query_dim(), inputs, queries);
  const int n = model.basis();
  const int d = model.query_dim();
  const Mat a = model.input_norm.apply(inputs);
  const Mat y = model.query_norm.apply(queries);
  const Mat beta = nn::mlp_apply(model.branch, a);
  const Mat scale = nn::mlp_apply(model.scale_net, a);
  const Mat shift = nn::mlp_apply(model.shift_net, a);

  Mat out(inputs.rows(), queries.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const Mat tau = nn::mlp_apply(model.trunk, shifted_points(scale.row(i), shift.row(i), y, n, d));
    for (Eigen::Index p = 0; p < y.rows(); ++p) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) v += beta(i, k) * tau(p * n + k, k);
      out(i, p) = v;
    }
  }
  return out;
}

Vec shift_deeponet_eval(const ShiftDeepOnetModel& model, const Vec& a_enc, const Mat& queries) {
  return shift_deeponet_eval_batch(model, a_enc.transpose(), queries).row(0).transpose();
}

ShiftGradients shift_deeponet_gradients(const ShiftDeepOnetModel& model, const Mat& inputs,
                                        const Mat& queries, const Mat& prediction_grad) {
  model.validate();
  check_inputs(model.input_dim(), model.query_dim(), inputs, queries);
  require(prediction_grad.rows() == inputs.rows() && prediction_grad.cols() == queries.rows(),
          "prediction gradient shape does not match the batch");
  const int n = model.basis();
  const int d = model.query_dim();
  const Eigen::Index N = inputs.rows();
  const Eigen::Index P = queries.rows();
  const Mat a = model.input_norm.apply(inputs);
  const Mat y = model.query_norm.apply(queries);

  auto fb = nn::mlp_forward(model.branch, a);
  auto fs = nn::mlp_forward(model.scale_net, a);
  auto fg = nn::mlp_forward(model.shift_net, a);
  const Mat& beta = fb.outputs;

  Mat d_beta = Mat::Zero(N, n);
  Mat d_scale = Mat::Zero(N, n * d * d);
  Mat d_shift = Mat::Zero(N, n * d);
  ShiftGradients g;
  g.trunk = nn::MlpGradients::zeros_like(model.trunk);

  for (Eigen::Index i = 0; i < N; ++i) {
    const Mat z = shifted_points(fs.outputs.row(i), fg.outputs.row(i), y, n, d);
    auto ft = nn::mlp_forward(model.trunk, z);
    Mat d_tau = Mat::Zero(P * n, n);
    for (Eigen::Index p = 0; p < P; ++p)
      for (int k = 0; k < n; ++k) {
        d_beta(i, k) += prediction_grad(i, p) * ft.outputs(p * n + k, k);
        d_tau(p * n + k, k) = prediction_grad(i, p) * beta(i, k);
      }
    auto gt = nn::mlp_backward(model.trunk, ft.cache, d_tau);
    g.trunk += gt;
    for (Eigen::Index p = 0; p < P; ++p)
      for (int k = 0; k < n; ++k)
        for (int r = 0; r < d; ++r) {
          const double dz = gt.input(p * n + k, r);
          d_shift(i, k * d + r) += dz;
          for (int c = 0; c < d; ++c) d_scale(i, (k * d + r) * d + c) += dz * y(p, c);
        }
  }
  g.branch = nn::mlp_backward(model.branch, fb.cache, d_beta);
  g.scale_net = nn::mlp_backward(model.scale_net, fs.cache, d_scale);
  g.shift_net = nn::mlp_backward(model.shift_net, fg.cache, d_shift);
  return g;
}

// ---------------------------------------------------------------------------
// R-adaptive system

Mat ComputationalGrid::queries() const {
  if (times.size() == 0) return xi;
  Mat q(xi.size() * times.size(), 2);
  for (Eigen::Index k = 0; k < times.size(); ++k)
    for (Eigen::Index j = 0; j < xi.size(); ++j) {
      q(k * xi.size() + j, 0) = xi[j];
      q(k * xi.size() + j, 1) = times[k];
    }
  return q;
}

void RAdaptiveSystem::validate() const {
  coord_net.validate();
  sol_net.validate();
  require(coord_net.input_dim() == sol_net.input_dim(),
          "coordinate and solution nets must share the encoded input");
  require(grid.xi.size() >= 2, "computational grid needs at least two nodes");
  for (Eigen::Index j = 1; j < grid.xi.size(); ++j)
    require(grid.xi[j] > grid.xi[j - 1], "computational grid must be strictly increasing");
  const int qdim = grid.times.size() == 0 ? 1 : 2;
  require(coord_net.query_dim() == qdim && sol_net.query_dim() == qdim,
          "net query dimension does not match the computational grid");
}

std::vector<reconstruct::GraphPrediction> radaptive_predict_slices(const RAdaptiveSystem& system,
                                                                   const Vec& a_enc) {
  system.validate();
  const Mat q = system.grid.queries();
  const Vec y = deeponet_eval(system.coord_net, a_enc, q);
  const Vec u = deeponet_eval(system.sol_net, a_enc, q);
  const Eigen::Index nx = system.grid.xi.size();
  std::vector<reconstruct::GraphPrediction> slices;
  for (int k = 0; k < system.grid.slice_count(); ++k)
    slices.push_back({y.segment(k * nx, nx), u.segment(k * nx, nx)});
  return slices;
}

reconstruct::GraphPrediction radaptive_predict_graph(const RAdaptiveSystem& system,
                                                     const Vec& a_enc) {
  auto slices = radaptive_predict_slices(system, a_enc);
  require(slices.size() == 1, "space-time systems predict one graph per slice");
  return std::move(slices.front());
}

// ---------------------------------------------------------------------------
// Bundles

namespace {

json vec_json(const Vec& v) { return std::vector<double>(v.begin(), v.end()); }

Vec json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json norms_json(const QueryNormalization& q, const InputStandardization& s) {
  return {{"query_norm", {{"lo", vec_json(q.lo)}, {"hi", vec_json(q.hi)}}},
          {"input_norm", {{"mean", vec_json(s.mean)}, {"scale", vec_json(s.scale)}}}};
}

void read_norms(const json& j, QueryNormalization& q, InputStandardization& s) {
  q.lo = json_vec(j.at("query_norm").at("lo"));
  q.hi = json_vec(j.at("query_norm").at("hi"));
  s.mean = json_vec(j.at("input_norm").at("mean"));
  s.scale = json_vec(j.at("input_norm").at("scale"));
}

const MlpParams& net(const Bundle& b, const std::string& name) {
  auto it = b.nets.find(name);
  if (it == b.nets.end()) throw FormatError("bundle is missing net '" + name + "'");
  return it->second;
}

void expect_kind(const Bundle& b, const std::string& kind) {
  const std::string got = b.manifest.value("kind", "");
  if (got != kind) throw FormatError("bundle holds a '" + got + "' model, expected '" + kind + "'");
}

}  // namespace

void save_bundle(const std::filesystem::path& dir, const Bundle& bundle) {
  std::filesystem::create_directories(dir);
  json manifest = bundle.manifest;
  manifest["format_version"] = kBundleVersion;
  json files = json::object();
  for (const auto& [name, params] : bundle.nets) {
    const std::string file = name + ".ckpt";
    nn::save_checkpoint(dir / file, params);
    files[name] = file;
  }
  manifest["nets"] = files;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Bundle load_bundle(const std::filesystem::path& dir) {
  Bundle b;
  try {
    b.manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw FormatError("malformed bundle manifest in " + dir.string() + ": " + e.what());
  }
  if (b.manifest.value("format_version", -1) != kBundleVersion)
    throw FormatError(dir.string() + ": unsupported bundle version");
  for (const auto& [name, file] : b.manifest.at("nets").items())
    b.nets[name] = nn::load_checkpoint(dir / file.get<std::string>());
  return b;
}

Bundle to_bundle(const DeepOnetModel& model) {
  Bundle b;
  b.manifest = norms_json(model.query_norm, model.input_norm);
  b.manifest["kind"] = "vanilla";
  b.manifest["basis"] = model.basis();
  b.nets["branch"] = model.branch;
  b.nets["trunk"] = model.trunk;
  return b;
}

Bundle to_bundle(const ShiftDeepOnetModel& model) {
  Bundle b;
  b.manifest = norms_json(model.query_norm, model.input_norm);
  b.manifest["kind"] = "shift";
  b.manifest["basis"] = model.basis();
  b.manifest["scale_layout"] = "k,row,col row-major";
  b.nets["branch"] = model.branch;
  b.nets["trunk"] = model.trunk;
  b.nets["scale"] = model.scale_net;
  b.nets["shift"] = model.shift_net;
  return b;
}

Bundle to_bundle(const RAdaptiveSystem& system) {
  Bundle b;
  b.manifest["kind"] = "radaptive";
  b.manifest["basis"] = system.sol_net.basis();
  b.manifest["coord"] = norms_json(system.coord_net.query_norm, system.coord_net.input_norm);
  b.manifest["sol"] = norms_json(system.sol_net.query_norm, system.sol_net.input_norm);
  b.manifest["grid"] = {{"xi", vec_json(system.grid.xi)}, {"times", vec_json(system.grid.times)}};
  b.nets["coord.branch"] = system.coord_net.branch;
  b.nets["coord.trunk"] = system.coord_net.trunk;
  b.nets["sol.branch"] = system.sol_net.branch;
  b.nets["sol.trunk"] = system.sol_net.trunk;
  return b;
}

DeepOnetModel deeponet_from_bundle(const Bundle& b) {
  expect_kind(b, "vanilla");
  DeepOnetModel m{net(b, "branch"), net(b, "trunk"), {}, {}};
  read_norms(b.manifest, m.query_norm, m.input_norm);
  m.validate();
  return m;
}

ShiftDeepOnetModel shift_from_bundle(const Bundle& b) {
  expect_kind(b, "shift");
  ShiftDeepOnetModel m{net(b, "branch"), net(b, "trunk"), net(b, "scale"), net(b, "shift"), {}, {}};
  read_norms(b.manifest, m.query_norm, m.input_norm);
  m.validate();
  return m;
}

RAdaptiveSystem radaptive_from_bundle(const Bundle& b) {
  expect_kind(b, "radaptive");
  RAdaptiveSystem s;
  s.coord_net = {net(b, "coord.branch"), net(b, "coord.trunk"), {}, {}};
  s.sol_net = {net(b, "sol.branch"), net(b, "sol.trunk"), {}, {}};
  read_norms(b.manifest.at("coord"), s.coord_net.query_norm, s.coord_net.input_norm);
  read_norms(b.manifest.at("sol"), s.sol_net.query_norm, s.sol_net.input_norm);
  s.grid.xi = json_vec(b.manifest.at("grid").at("xi"));
  s.grid.times = json_vec(b.manifest.at("grid").at("times"));
  s.validate();
  return s;
}

}  // namespace radon::deeponet
