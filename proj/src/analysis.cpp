#include "radon/analysis.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace radon::analysis {

namespace {

constexpr double kPi = std::numbers::pi;

// Into [-pi, pi).
double wrap(double x) { return x - 2.0 * kPi * std::floor((x + kPi) / (2.0 * kPi)); }

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Uniform grid on [-pi, pi] merged with extra breakpoints.
std::vector<double> partition(int cells, const std::vector<double>& extra) {
  std::vector<double> p;
  p.reserve(cells + 1 + extra.size());
  for (int i = 0; i <= cells; ++i) p.push_back(i == cells ? kPi : -kPi + 2.0 * kPi * i / cells);
  for (double e : extra)
    if (e > -kPi && e < kPi) p.push_back(e);
  return sorted_unique(std::move(p));
}

// Exact integral over [a, b] of a squared linear function with end values p, q.
double sq_linear(double a, double b, double p, double q) {
  return (b - a) / 3.0 * (p * p + p * q + q * q);
}

double interp(const Vec& knots, const Vec& values, double x) {
  const double* k = knots.data();
  const Eigen::Index n = knots.size();
  const Eigen::Index i = std::clamp<Eigen::Index>((std::upper_bound(k, k + n, x) - k) - 1, 0, n - 2);
  const double t = (x - knots[i]) / (knots[i + 1] - knots[i]);
  return values[i] + t * (values[i + 1] - values[i]);
}

}  // namespace

json SpectrumReport::to_json() const {
  return {{"tag", tag},
          {"grid_size", grid_size},
          {"dx", dx},
          {"eigenvalues", std::vector<double>(eigenvalues.begin(), eigenvalues.end())}};
}

SpectrumReport covariance_spectrum(const Mat& samples, double dx, std::string tag) {
  require(samples.rows() >= 2, "covariance spectrum needs at least two samples");
  require(samples.cols() >= 1, "covariance spectrum needs a nonempty grid");
  require(dx > 0.0, "quadrature weight must be positive");
  require(samples.allFinite(), "covariance spectrum needs finite samples");
  const Mat scaled = samples * std::sqrt(dx / static_cast<double>(samples.rows()));
  Eigen::BDCSVD<Mat> svd(scaled);
  SpectrumReport r;
  r.tag = std::move(tag);
  r.grid_size = static_cast<int>(samples.cols());
  r.dx = dx;
  r.eigenvalues = svd.singularValues().array().square().matrix();
  return r;
}

double optimal_error_tail(const SpectrumReport& s, int n) {
  require(n >= 0, "tail index must be nonnegative");
  if (n >= s.eigenvalues.size()) return 0.0;
  return std::sqrt(s.eigenvalues.tail(s.eigenvalues.size() - n).sum());
}

json RateFit::to_json() const {
  json pts = json::array();
  for (std::size_t i = 0; i < n.size(); ++i) pts.push_back({{"n", n[i]}, {"error", error[i]}});
  return {{"points", pts}, {"slope", slope}, {"intercept", intercept}, {"residual", residual}};
}

RateFit rate_fit(const std::vector<double>& n, const std::vector<double>& error) {
  require(n.size() == error.size(), "rate fit needs one error per n");
  require(n.size() >= 3, "rate fit needs at least three points");
  const std::size_t m = n.size();
  Vec lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    require(n[i] > 0.0 && error[i] > 0.0, "rate fit needs positive n and errors");
    if (i > 0) require(n[i] > n[i - 1], "rate fit needs strictly increasing n");
    lx[i] = std::log(n[i]);
    ly[i] = std::log(error[i]);
  }
  const double mx = lx.mean();
  const double my = ly.mean();
  const double sxx = (lx.array() - mx).square().sum();
  const double sxy = ((lx.array() - mx) * (ly.array() - my)).sum();
  RateFit f;
  f.n = n;
  f.error = error;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.residual = std::sqrt((ly.array() - f.intercept - f.slope * lx.array()).square().mean());
  return f;
}

double MollifiedBox::exact(double x) const {
  const double d = wrap(x - shift);
  return (d >= -0.5 * kPi && d < 0.5 * kPi) ? 1.0 : 0.0;
}

double MollifiedBox::mollified(double x) const {
  const double d = std::abs(wrap(x - shift));
  const double inner = 0.5 * (kPi - delta);
  const double outer = 0.5 * (kPi + delta);
  if (d <= inner) return 1.0;
  if (d >= outer) return 0.0;
  return (outer - d) / delta;
}

std::vector<double> MollifiedBox::ramp_breaks() const {
  std::vector<double> b;
  for (double side : {-0.5 * kPi, 0.5 * kPi})
    for (double half : {-0.5 * delta, 0.5 * delta}) b.push_back(wrap(shift + side + half));
  return sorted_unique(std::move(b));
}

std::vector<double> MollifiedBox::jumps() const {
  return sorted_unique({wrap(shift - 0.5 * kPi), wrap(shift + 0.5 * kPi)});
}

Vec mollified_box_map(const MollifiedBox& box, const Vec& xi) {
  require(box.delta > 0.0 && box.delta < 0.5 * kPi, "delta must lie in (0, pi/2)");
  // Pieces of constant density between the ramp breakpoints.
  std::vector<double> p = {-kPi};
  for (double b : box.ramp_breaks())
    if (b > -kPi) p.push_back(b);
  p.push_back(kPi);
  const double beta = kPi * kPi - 2.0 * kPi * box.delta;
  const double ramp_rho = std::sqrt(1.0 + beta / (box.delta * box.delta));
  const std::size_t pieces = p.size() - 1;
  std::vector<double> rho(pieces), mass(pieces + 1, 0.0);
  for (std::size_t k = 0; k < pieces; ++k) {
    const double mid = 0.5 * (p[k] + p[k + 1]);
    const double v = box.mollified(mid);
    rho[k] = (v > 0.0 && v < 1.0) ? ramp_rho : 1.0;
    mass[k + 1] = mass[k] + rho[k] * (p[k + 1] - p[k]);
  }
  const double total = mass[pieces];

  Vec x(xi.size());
  for (Eigen::Index j = 0; j < xi.size(); ++j) {
    require(xi[j] >= -kPi && xi[j] <= kPi, "xi must lie in [-pi, pi]");
    if (xi[j] == -kPi) {
      x[j] = -kPi;
      continue;
    }
    if (xi[j] == kPi) {
      x[j] = kPi;
      continue;
    }
    const double target = (xi[j] + kPi) / (2.0 * kPi) * total;
    std::size_t k = std::upper_bound(mass.begin(), mass.end(), target) - mass.begin();
    k = std::clamp<std::size_t>(k, 1, pieces) - 1;
    x[j] = std::min(p[k + 1], p[k] + (target - mass[k]) / rho[k]);
  }
  return x;
}

AppendixBResult appendixB_construct(double delta, int n, double zeta, double at,
                                    int quadrature_cells) {
  require(delta > 0.0 && delta < 0.5 * kPi, "delta must lie in (0, pi/2)");
  require(n >= 8, "the construction needs n >= 8");
  require(quadrature_cells >= 1 << 16, "use at least 2^16 quadrature cells");
  const MollifiedBox box{delta, at + zeta};

  AppendixBResult r;
  r.xi.resize(n + 1);
  for (int i = 0; i <= n; ++i) r.xi[i] = i == n ? kPi : -kPi + 2.0 * kPi * i / n;
  r.x_knots = mollified_box_map(box, r.xi);
  r.u_knots.resize(n + 1);
  for (int i = 0; i <= n; ++i) r.u_knots[i] = box.mollified(r.x_knots[i]);

  std::vector<double> extra = box.ramp_breaks();
  for (double j : box.jumps()) extra.push_back(j);
  {
    const auto p = partition(quadrature_cells, extra);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      const double g = box.exact(0.5 * (p[k] + p[k + 1]));
      sum += sq_linear(p[k], p[k + 1], box.mollified(p[k]) - g, box.mollified(p[k + 1]) - g);
    }
    r.mollification_sq = sum;
  }

  extra = box.jumps();
  for (Eigen::Index i = 0; i < r.x_knots.size(); ++i) extra.push_back(r.x_knots[i]);
  const auto p = partition(quadrature_cells, extra);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    const double g = box.exact(0.5 * (p[k] + p[k + 1]));
    sum += sq_linear(p[k], p[k + 1], interp(r.x_knots, r.u_knots, p[k]) - g,
                     interp(r.x_knots, r.u_knots, p[k + 1]) - g);
  }
  r.error = std::sqrt(sum);
  return r;
}

double fem_uniform_interp_error(const Vec& u_fine, double lo, double hi, int n) {
  require(n >= 2, "FEM interpolation needs n >= 2");
  require(hi > lo, "FEM interval must have positive length");
  const Eigen::Index m = u_fine.size() - 1;
  require(m >= n && m % n == 0, "fine grid cells must be a multiple of n");
  const Eigen::Index stride = m / n;
  const double h = (hi - lo) / static_cast<double>(m);
  double sum = 0.0;
  double prev = 0.0;
  for (Eigen::Index i = 0; i <= m; ++i) {
    const Eigen::Index c = std::min<Eigen::Index>(i / stride, n - 1);
    const double t = static_cast<double>(i - c * stride) / static_cast<double>(stride);
    const double ui = (1.0 - t) * u_fine[c * stride] + t * u_fine[(c + 1) * stride];
    const double e2 = (u_fine[i] - ui) * (u_fine[i] - ui);
    if (i > 0) sum += 0.5 * h * (prev + e2);
    prev = e2;
  }
  return std::sqrt(sum);
}

double box_uniform_interp_error(double shift, int n, int quadrature_cells) {
  require(n >= 2, "FEM interpolation needs n >= 2");
  const MollifiedBox box{0.1, shift};
  Vec knots(n + 1), values(n + 1);
  for (int i = 0; i <= n; ++i) {
    knots[i] = i == n ? kPi : -kPi + 2.0 * kPi * i / n;
    values[i] = box.exact(knots[i]);
  }
  std::vector<double> extra = box.jumps();
  for (int i = 0; i <= n; ++i) extra.push_back(knots[i]);
  const auto p = partition(quadrature_cells, extra);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    const double g = box.exact(0.5 * (p[k] + p[k + 1]));
    sum += sq_linear(p[k], p[k + 1], interp(knots, values, p[k]) - g,
                     interp(knots, values, p[k + 1]) - g);
  }
  return std::sqrt(sum);
}

}  // namespace radon::analysis
