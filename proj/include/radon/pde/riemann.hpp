#pragma once

#include "radon/common.hpp"

#include <random>

namespace radon::pde {

struct RiemannState {
  double rho_l = 1.0, u_l = 0.0, p_l = 1.0;
  double rho_r = 0.125, u_r = 0.0, p_r = 0.1;
  double x0 = 0.0;
  double gamma = 1.4;

  void validate() const;
};

// rho_L = 0.75 + 0.45 g(z1), rho_R = 0.4 + 0.3 g(z2), u_L = 0.5 + 0.5 g(z3),
// p_L = 2.5 + 1.6 g(z4), p_R = 0.375 + 0.325 g(z5), x0 = 0.5 g(z6), u_R = 0,
// with g(z) = 2z - 1.
RiemannState sod_params_from_z(const Vec& z);
// Draws z ~ U[0,1]^6; z is returned through z_out when given.
RiemannState sod_params_sample(std::mt19937_64& rng, Vec* z_out = nullptr);

struct Primitive {
  double rho, u, p;
};

double total_energy(const Primitive& w, double gamma);

enum class WaveKind { shock, rarefaction };

struct RiemannSolution {
  RiemannState state;
  double p_star = 0.0;
  double u_star = 0.0;
  double rho_star_l = 0.0;
  double rho_star_r = 0.0;
  WaveKind left = WaveKind::shock;
  WaveKind right = WaveKind::shock;
  int iterations = 0;

  // Wave speeds: shocks have head == tail == shock speed.
  double left_head = 0.0, left_tail = 0.0;
  double right_head = 0.0, right_tail = 0.0;

  // Primitive state on the ray (x - x0) / t = s.
  Primitive sample(double s) const;
};

// Exact solution: Newton iteration on the star pressure (<= 100 iterations,
// relative tolerance 1e-12). Vacuum-generating data is rejected.
RiemannSolution riemann_solve(const RiemannState& state);

struct EulerFields {
  Vec rho, u, p, e;
};

EulerFields euler_riemann_exact(const RiemannState& state, const Vec& x, double t);

}  // namespace radon::pde
