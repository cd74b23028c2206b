#pragma once

// Covariance spectra, optimal linear-reconstruction error, the mollified
// box-wave construction with its adaptive interpolant, uniform FEM baseline
// errors and log-log rate fits.

#include "radon/container.hpp"

#include <string>
#include <vector>

namespace radon::analysis {

struct SpectrumReport {
  std::string tag;
  int grid_size = 0;
  double dx = 0.0;
  Vec eigenvalues;  // descending, nonnegative

  json to_json() const;
};

// Eigenvalues of the uncentered empirical covariance (1/N) X^T X with
// quadrature weight dx, from the singular values of X sqrt(dx / N).
SpectrumReport covariance_spectrum(const Mat& samples, double dx, std::string tag = "");

// sqrt(sum_{j > n} lambda_j), 1-based j.
double optimal_error_tail(const SpectrumReport& s, int n);

struct RateFit {
  std::vector<double> n;
  std::vector<double> error;
  double slope = 0.0;
  double intercept = 0.0;  // log(error) = intercept + slope log(n)
  double residual = 0.0;   // RMS of the log-space residuals

  json to_json() const;
};

RateFit rate_fit(const std::vector<double>& n, const std::vector<double>& error);

// Mollified box wave on the periodic domain [-pi, pi): unit height, width
// pi, centered at shift = aT + zeta, jumps replaced by linear ramps of
// width delta.
struct MollifiedBox {
  double delta = 0.01;
  double shift = 0.0;

  double exact(double x) const;      // the unmollified box
  double mollified(double x) const;  // G_delta
  // Breakpoints in [-pi, pi) of the mollified profile, sorted.
  std::vector<double> ramp_breaks() const;
  // Jump locations of the unmollified box in [-pi, pi), sorted.
  std::vector<double> jumps() const;
};

// The equidistributed map for rho = sqrt(1 + (pi^2 - 2 pi delta) u_x^2) with
// u the mollified box; rho is piecewise constant so the cumulative mass is
// piecewise linear and inverted exactly. Evaluated at the given xi values.
Vec mollified_box_map(const MollifiedBox& box, const Vec& xi);

struct AppendixBResult {
  Vec xi;              // n + 1 uniform knots on [-pi, pi]
  Vec x_knots;         // x(xi_i)
  Vec u_knots;         // u(x(xi_i))
  double mollification_sq = 0.0;  // ||G_delta - G||^2 by quadrature
  double error = 0.0;             // ||G - u_I o x_I^{-1}||_{L2[-pi, pi]}
};

// Builds the construction for n cells. Errors are integrated exactly per
// piece over a partition that refines a uniform grid of at least
// quadrature_cells cells with every breakpoint of the integrand.
AppendixBResult appendixB_construct(double delta, int n, double zeta, double at = 0.0,
                                    int quadrature_cells = 1 << 16);

// Uniform FEM baseline: u sampled on a closed fine grid of M + 1 nodes over
// [lo, hi] (M divisible by n), interpolated on every (M / n)-th node, error
// by composite trapezoid on the fine grid.
double fem_uniform_interp_error(const Vec& u_fine, double lo, double hi, int n);

// ||u - u_I|| for the unit box on [-pi, pi] with jumps at shift +- pi/2,
// integrated exactly like appendixB_construct.
double box_uniform_interp_error(double shift, int n, int quadrature_cells = 1 << 16);

}  // namespace radon::analysis
