#pragma once

#include "radon/common.hpp"

namespace radon::pde {

// u_t + (u^2 / 2)_x = nu u_xx on the unit torus. Fourier pseudospectral with
// 2/3 dealiasing and ETDRK4 time stepping.
struct BurgersOptions {
  double nu = 1e-3;
  int n_modes = 256;  // grid points; also the FFT length
  double dt = 1e-4;
  bool linear_only = false;  // drop the flux term (heat equation)
};

// u0 sampled at x_j = j / n_modes. Returns u(., t) at the same nodes.
Vec burgers_solve(const Vec& u0, double t, const BurgersOptions& opts);

// One row per requested time (nondecreasing, >= 0).
Mat burgers_solve_on_times(const Vec& u0, const Vec& times, const BurgersOptions& opts);

}  // namespace radon::pde
