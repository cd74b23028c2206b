#include "radon/equidistribution.hpp"

#include "radon/reconstruct.hpp"

#include <algorithm>
#include <cmath>

namespace radon::equi {

void SampledField::validate() const {
  require(grid.n >= 3, "a sampled field needs at least three samples");
  require(grid.hi > grid.lo, "sampled field grid must have positive length");
  require(values.size() == grid.n, "sampled field has the wrong number of values");
  require(values.allFinite(), "sampled field contains non-finite values");
}

Vec SampledField::closed_nodes() const {
  if (!grid.periodic) return grid.nodes();
  Vec x(grid.n + 1);
  x.head(grid.n) = grid.nodes();
  x[grid.n] = grid.hi;
  return x;
}

Vec SampledField::closed_values() const {
  if (!grid.periodic) return values;
  Vec u(grid.n + 1);
  u.head(grid.n) = values;
  u[grid.n] = values[0];
  return u;
}

Vec field_derivative(const SampledField& f) {
  f.validate();
  const int n = f.grid.n;
  const double h = f.grid.spacing();
  const Vec& u = f.values;
  Vec d(n);
  for (int i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
  if (f.grid.periodic) {
    d[0] = (u[1] - u[n - 1]) / (2.0 * h);
    d[n - 1] = (u[0] - u[n - 2]) / (2.0 * h);
    Vec closed(n + 1);
    closed.head(n) = d;
    closed[n] = d[0];
    return closed;
  }
  d[0] = (u[1] - u[0]) / h;
  d[n - 1] = (u[n - 1] - u[n - 2]) / h;
  return d;
}

DensityField density_arclength(const SampledField& f, const DensityOptions& opts) {
  require(opts.beta >= 0.0, "density beta must be nonnegative");
  require(opts.smoothing_passes >= 0, "smoothing passes must be nonnegative");
  const Vec du = field_derivative(f);
  // Work on the distinct nodes so the periodic wrap sees each node once.
  const int n = f.grid.n;
  Vec rho = (1.0 + opts.beta * du.head(n).array().square()).sqrt().matrix();
  for (int pass = 0; pass < opts.smoothing_passes; ++pass) {
    Vec s(n);
    for (int i = 1; i + 1 < n; ++i) s[i] = (rho[i - 1] + rho[i] + rho[i + 1]) / 3.0;
    if (f.grid.periodic) {
      s[0] = (rho[n - 1] + rho[0] + rho[1]) / 3.0;
      s[n - 1] = (rho[n - 2] + rho[n - 1] + rho[0]) / 3.0;
    } else {
      // Mirror at the ends.
      s[0] = (2.0 * rho[1] + rho[0]) / 3.0;
      s[n - 1] = (2.0 * rho[n - 2] + rho[n - 1]) / 3.0;
    }
    rho = std::move(s);
  }
  DensityField out;
  out.x = f.closed_nodes();
  if (f.grid.periodic) {
    out.rho.resize(n + 1);
    out.rho.head(n) = rho;
    out.rho[n] = rho[0];
  } else {
    out.rho = std::move(rho);
  }
  return out;
}

DensityField density_arclength(const Vec& u, double dx, int smoothing_passes, bool periodic,
                               double beta) {
  require(dx > 0.0, "grid spacing must be positive");
  const int n = static_cast<int>(u.size());
  require(n >= 3, "density needs at least three samples");
  UniformGrid g{0.0, periodic ? n * dx : (n - 1) * dx, n, periodic};
  return density_arclength(SampledField{g, u}, DensityOptions{beta, smoothing_passes});
}

namespace {

void check_density(const DensityField& d) {
  require(d.x.size() == d.rho.size() && d.x.size() >= 2, "malformed density field");
  for (Eigen::Index i = 0; i < d.rho.size(); ++i)
    require(d.rho[i] > 0.0 && std::isfinite(d.rho[i]), "density must be positive and finite");
  for (Eigen::Index i = 1; i < d.x.size(); ++i)
    require(d.x[i] > d.x[i - 1], "density grid must be strictly increasing");
}

Vec cumulative(const DensityField& d) {
  Vec m(d.x.size());
  m[0] = 0.0;
  for (Eigen::Index i = 1; i < d.x.size(); ++i)
    m[i] = m[i - 1] + 0.5 * (d.rho[i - 1] + d.rho[i]) * (d.x[i] - d.x[i - 1]);
  return m;
}

Eigen::Index cell_of(const Vec& x, double b) {
  const double* p = x.data();
  const Eigen::Index n = x.size();
  return std::clamp<Eigen::Index>((std::upper_bound(p, p + n, b) - p) - 1, 0, n - 2);
}

double partial_mass(const DensityField& d, Eigen::Index i, double s) {
  const double h = d.x[i + 1] - d.x[i];
  const double slope = (d.rho[i + 1] - d.rho[i]) / h;
  return d.rho[i] * s + 0.5 * slope * s * s;
}

}  // namespace

double cumulative_mass_at(const DensityField& d, double b) {
  check_density(d);
  b = std::clamp(b, d.x[0], d.x[d.x.size() - 1]);
  const Vec m = cumulative(d);
  const Eigen::Index i = cell_of(d.x, b);
  return m[i] + partial_mass(d, i, b - d.x[i]);
}

double total_mass(const DensityField& d) {
  check_density(d);
  return cumulative(d)[d.x.size() - 1];
}

Vec equidistribute_1d(const DensityField& d, int n_xi) {
  require(n_xi >= 2, "equidistribution needs n_xi >= 2");
  check_density(d);
  const Vec m = cumulative(d);
  const Eigen::Index last = d.x.size() - 1;
  const double total = m[last];

  Vec x(n_xi + 1);
  x[0] = d.x[0];
  x[n_xi] = d.x[last];
  Eigen::Index i = 0;
  for (int j = 1; j < n_xi; ++j) {
    const double target = total * static_cast<double>(j) / n_xi;
    while (i + 1 < last && m[i + 1] <= target) ++i;
    // Solve rho_i s + (slope/2) s^2 = r for s in [0, h] in the stable form.
    const double r = target - m[i];
    const double h = d.x[i + 1] - d.x[i];
    const double slope = (d.rho[i + 1] - d.rho[i]) / h;
    const double disc = std::max(0.0, d.rho[i] * d.rho[i] + 2.0 * slope * r);
    const double s = 2.0 * r / (d.rho[i] + std::sqrt(disc));
    x[j] = std::clamp(d.x[i] + s, d.x[i], d.x[i + 1]);
  }
  return x;
}

Vec jacobian_det_1d(const Vec& x, double dxi, bool periodic) {
  require(dxi > 0.0, "computational spacing must be positive");
  const Eigen::Index n = x.size();
  require(n >= 2, "Jacobian needs at least two knots");
  for (Eigen::Index j = 1; j < n; ++j)
    require(x[j] > x[j - 1], "coordinate map must be strictly increasing");
  Vec det(n);
  for (Eigen::Index j = 1; j + 1 < n; ++j) det[j] = (x[j + 1] - x[j - 1]) / (2.0 * dxi);
  if (periodic && n >= 3) {
    const double period = x[n - 1] - x[0];
    det[0] = (x[1] - (x[n - 2] - period)) / (2.0 * dxi);
    det[n - 1] = det[0];
  } else {
    det[0] = (x[1] - x[0]) / dxi;
    det[n - 1] = (x[n - 1] - x[n - 2]) / dxi;
  }
  return det;
}

Vec weight_solution(const Vec& det_j, double cap) {
  require(cap >= 1.0, "weight cap must be at least 1");
  return (1.0 + det_j.array().square()).sqrt().min(cap).matrix();
}

Vec weight_coordinate(const Vec& grad_u, const Vec& det_j, double cap) {
  require(cap >= 1.0, "weight cap must be at least 1");
  require(grad_u.size() == det_j.size(), "gradient and Jacobian lengths differ");
  const auto g2 = grad_u.array().square();
  return (1.0 + g2 * g2 * det_j.array().square()).sqrt().min(cap).matrix();
}

AdaptiveSample preprocess_sample(const SampledField& f, const PreprocessOptions& opts,
                                 DensityField& density_out) {
  f.validate();
  require(opts.n_xi >= 2, "n_xi must be at least 2");
  density_out = density_arclength(f, opts.density);

  AdaptiveSample s;
  const double lo = f.grid.lo;
  const double hi = f.grid.hi;
  const double dxi = (hi - lo) / opts.n_xi;
  s.xi.resize(opts.n_xi + 1);
  for (int j = 0; j <= opts.n_xi; ++j) s.xi[j] = j == opts.n_xi ? hi : lo + j * dxi;
  s.sigma = total_mass(density_out) / (hi - lo);
  s.x = equidistribute_1d(density_out, opts.n_xi);

  const Vec nodes = f.closed_nodes();
  s.u = reconstruct::interp_linear_1d(nodes, f.closed_values(), s.x);
  s.det_j = jacobian_det_1d(s.x, dxi, f.grid.periodic);
  const Vec grad = reconstruct::interp_linear_1d(nodes, field_derivative(f), s.x);
  s.w_solution = weight_solution(s.det_j, opts.cap_solution);
  s.w_coordinate = weight_coordinate(grad, s.det_j, opts.cap_coordinate);
  return s;
}

AdaptiveSample preprocess_sample(const SampledField& f, const PreprocessOptions& opts) {
  DensityField unused;
  return preprocess_sample(f, opts, unused);
}

std::vector<AdaptiveSample> preprocess_spacetime(const Mat& field, const UniformGrid& grid,
                                                 const PreprocessOptions& opts) {
  require(field.cols() == grid.n, "space-time field width does not match the spatial grid");
  std::vector<AdaptiveSample> slices;
  slices.reserve(field.rows());
  for (Eigen::Index k = 0; k < field.rows(); ++k)
    slices.push_back(preprocess_sample(SampledField{grid, field.row(k).transpose()}, opts));
  return slices;
}

double pointwise_residual(const AdaptiveSample& s, const DensityField& rho) {
  const Eigen::Index n = s.x.size();
  require(n >= 3, "residual needs at least one interior knot");
  const double dxi = s.xi[1] - s.xi[0];
  const Vec r = reconstruct::interp_linear_1d(rho.x, rho.rho, s.x);
  Vec q(n - 2);
  for (Eigen::Index j = 1; j + 1 < n; ++j) q[j - 1] = r[j] * (s.x[j + 1] - s.x[j - 1]) / (2.0 * dxi);
  const double mean = q.mean();
  return (q.array() - mean).abs().maxCoeff() / mean;
}

double integral_residual(const AdaptiveSample& s, const DensityField& rho) {
  const Eigen::Index n = s.x.size();
  require(n >= 3, "residual needs at least one interior knot");
  const double dxi = s.xi[1] - s.xi[0];
  double worst = 0.0;
  for (Eigen::Index j = 1; j + 1 < n; ++j) {
    const double mass = cumulative_mass_at(rho, s.x[j + 1]) - cumulative_mass_at(rho, s.x[j - 1]);
    worst = std::max(worst, std::abs(mass / (2.0 * dxi) - s.sigma) / s.sigma);
  }
  return worst;
}

void PreprocessedSplit::validate() const {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index width = static_cast<Eigen::Index>(slices()) * xi.size();
  for (const Mat* m : {&x, &u, &det_j, &w_solution, &w_coordinate})
    require(m->rows() == n && m->cols() == width, "preprocessed arrays have inconsistent shapes");
  require(sigma.size() == n * slices(), "preprocessed sigma has the wrong length");
  require(source_ids.size() == n, "preprocessed source ids have the wrong length");
}

Container to_container(const PreprocessedSplit& p) {
  p.validate();
  Container c;
  c.header = {{"format", "radon-preprocessed"},
              {"format_version", kPreprocessedVersion},
              {"split", p.split},
              {"periodic", p.periodic},
              {"n_xi", p.options.n_xi},
              {"cap_solution", p.options.cap_solution},
              {"cap_coordinate", p.options.cap_coordinate},
              {"smoothing_passes", p.options.density.smoothing_passes},
              {"beta", p.options.density.beta},
              {"density", "sqrt(1+beta*u_x^2)"},
              {"source_hash", p.source_hash}};
  c.add("xi", p.xi);
  if (p.times.size() > 0) c.add("times", p.times);
  c.add("inputs", p.inputs);
  c.add("x", p.x);
  c.add("u", p.u);
  c.add("det_j", p.det_j);
  c.add("w_solution", p.w_solution);
  c.add("w_coordinate", p.w_coordinate);
  c.add("sigma", p.sigma);
  c.add("source_ids", p.source_ids);
  return c;
}

PreprocessedSplit preprocessed_from_container(const Container& c) {
  const json& h = c.header;
  if (h.value("format", std::string()) != "radon-preprocessed")
    throw FormatError("not a preprocessed split file");
  if (h.value("format_version", -1) != kPreprocessedVersion)
    throw FormatError("unsupported preprocessed format version");
  PreprocessedSplit p;
  try {
    p.split = h.at("split").get<std::string>();
    p.periodic = h.at("periodic").get<bool>();
    p.options.n_xi = h.at("n_xi").get<int>();
    p.options.cap_solution = h.at("cap_solution").get<double>();
    p.options.cap_coordinate = h.at("cap_coordinate").get<double>();
    p.options.density.smoothing_passes = h.at("smoothing_passes").get<int>();
    p.options.density.beta = h.at("beta").get<double>();
    p.source_hash = h.at("source_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed preprocessed header: ") + e.what());
  }
  p.xi = c.vector("xi");
  if (c.has("times")) p.times = c.vector("times");
  p.inputs = c.matrix("inputs");
  p.x = c.matrix("x");
  p.u = c.matrix("u");
  p.det_j = c.matrix("det_j");
  p.w_solution = c.matrix("w_solution");
  p.w_coordinate = c.matrix("w_coordinate");
  p.sigma = c.vector("sigma");
  p.source_ids = c.vector("source_ids");
  p.validate();
  return p;
}

}  // namespace radon::equi
