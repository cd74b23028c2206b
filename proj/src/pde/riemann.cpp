#include "radon/pde/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace radon::pde {

void RiemannState::validate() const {
  require(gamma > 1.0, "gamma must exceed 1");
  require(rho_l > 0.0 && rho_r > 0.0, "Riemann densities must be positive");
  require(p_l > 0.0 && p_r > 0.0, "Riemann pressures must be positive");
  require(std::isfinite(u_l) && std::isfinite(u_r) && std::isfinite(x0),
          "Riemann velocities and x0 must be finite");
}

RiemannState sod_params_from_z(const Vec& z) {
  require(z.size() == 6, "Sod parameters need a 6-vector z");
  for (Eigen::Index i = 0; i < 6; ++i) require(z[i] >= 0.0 && z[i] <= 1.0, "z must lie in [0,1]^6");
  auto g = [&](int i) { return 2.0 * z[i] - 1.0; };
  RiemannState s;
  s.rho_l = 0.75 + 0.45 * g(0);
  s.rho_r = 0.4 + 0.3 * g(1);
  s.u_l = 0.5 + 0.5 * g(2);
  s.p_l = 2.5 + 1.6 * g(3);
  s.p_r = 0.375 + 0.325 * g(4);
  s.x0 = 0.5 * g(5);
  s.u_r = 0.0;
  s.gamma = 1.4;
  return s;
}

RiemannState sod_params_sample(std::mt19937_64& rng, Vec* z_out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec z(6);
  for (int i = 0; i < 6; ++i) z[i] = unit(rng);
  if (z_out) *z_out = z;
  return sod_params_from_z(z);
}

double total_energy(const Primitive& w, double gamma) {
  return 0.5 * w.rho * w.u * w.u + w.p / (gamma - 1.0);
}

namespace {

struct PressureFunction {
  double value, slope;
};

// Toro's f_K(p) and its derivative for one side.
PressureFunction pressure_function(double p, double rho_k, double p_k, double c_k, double g) {
  if (p > p_k) {
    const double a = 2.0 / ((g + 1.0) * rho_k);
    const double b = (g - 1.0) / (g + 1.0) * p_k;
    const double root = std::sqrt(a / (p + b));
    return {(p - p_k) * root, root * (1.0 - 0.5 * (p - p_k) / (b + p))};
  }
  const double ratio = p / p_k;
  return {2.0 * c_k / (g - 1.0) * (std::pow(ratio, (g - 1.0) / (2.0 * g)) - 1.0),
          std::pow(ratio, -(g + 1.0) / (2.0 * g)) / (rho_k * c_k)};
}

}  // namespace

RiemannSolution riemann_solve(const RiemannState& st) {
  st.validate();
  const double g = st.gamma;
  const double c_l = std::sqrt(g * st.p_l / st.rho_l);
  const double c_r = std::sqrt(g * st.p_r / st.rho_r);
  const double du = st.u_r - st.u_l;
  if (2.0 / (g - 1.0) * (c_l + c_r) <= du)
    throw InvalidArgument("Riemann data generates vacuum");

  RiemannSolution sol;
  sol.state = st;

  // Primitive-variable guess, kept positive.
  double p = 0.5 * (st.p_l + st.p_r) - 0.125 * du * (st.rho_l + st.rho_r) * (c_l + c_r);
  p = std::max(p, 1e-8);
  constexpr int max_iter = 100;
  constexpr double tol = 1e-12;
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    const auto fl = pressure_function(p, st.rho_l, st.p_l, c_l, g);
    const auto fr = pressure_function(p, st.rho_r, st.p_r, c_r, g);
    double next = p - (fl.value + fr.value + du) / (fl.slope + fr.slope);
    if (next <= 0.0) next = 0.5 * p;
    const double change = 2.0 * std::abs(next - p) / (next + p);
    p = next;
    sol.iterations = it;
    if (change < tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("star-pressure Newton iteration did not converge in " +
                         std::to_string(max_iter) + " iterations");

  const auto fl = pressure_function(p, st.rho_l, st.p_l, c_l, g);
  const auto fr = pressure_function(p, st.rho_r, st.p_r, c_r, g);
  sol.p_star = p;
  sol.u_star = 0.5 * (st.u_l + st.u_r) + 0.5 * (fr.value - fl.value);

  const double g6 = (g - 1.0) / (g + 1.0);
  if (p > st.p_l) {
    const double ratio = p / st.p_l;
    sol.left = WaveKind::shock;
    sol.rho_star_l = st.rho_l * (ratio + g6) / (g6 * ratio + 1.0);
    const double s = st.u_l - c_l * std::sqrt((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g));
    sol.left_head = sol.left_tail = s;
  } else {
    sol.left = WaveKind::rarefaction;
    sol.rho_star_l = st.rho_l * std::pow(p / st.p_l, 1.0 / g);
    const double c_star = c_l * std::pow(p / st.p_l, (g - 1.0) / (2.0 * g));
    sol.left_head = st.u_l - c_l;
    sol.left_tail = sol.u_star - c_star;
  }
  if (p > st.p_r) {
    const double ratio = p / st.p_r;
    sol.right = WaveKind::shock;
    sol.rho_star_r = st.rho_r * (ratio + g6) / (g6 * ratio + 1.0);
    const double s = st.u_r + c_r * std::sqrt((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g));
    sol.right_head = sol.right_tail = s;
  } else {
    sol.right = WaveKind::rarefaction;
    sol.rho_star_r = st.rho_r * std::pow(p / st.p_r, 1.0 / g);
    const double c_star = c_r * std::pow(p / st.p_r, (g - 1.0) / (2.0 * g));
    sol.right_head = st.u_r + c_r;
    sol.right_tail = sol.u_star + c_star;
  }
  return sol;
}

Primitive RiemannSolution::sample(double s) const {
  const RiemannState& st = state;
  const double g = st.gamma;
  if (s <= u_star) {
    if (s <= left_head) return {st.rho_l, st.u_l, st.p_l};
    if (s >= left_tail) return {rho_star_l, u_star, p_star};
    // Inside the left fan.
    const double c_l = std::sqrt(g * st.p_l / st.rho_l);
    const double base = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c_l) * (st.u_l - s);
    return {st.rho_l * std::pow(base, 2.0 / (g - 1.0)),
            2.0 / (g + 1.0) * (c_l + 0.5 * (g - 1.0) * st.u_l + s),
            st.p_l * std::pow(base, 2.0 * g / (g - 1.0))};
  }
  if (s >= right_head) return {st.rho_r, st.u_r, st.p_r};
  if (s <= right_tail) return {rho_star_r, u_star, p_star};
  const double c_r = std::sqrt(g * st.p_r / st.rho_r);
  const double base = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * c_r) * (st.u_r - s);
  return {st.rho_r * std::pow(base, 2.0 / (g - 1.0)),
          2.0 / (g + 1.0) * (-c_r + 0.5 * (g - 1.0) * st.u_r + s),
          st.p_r * std::pow(base, 2.0 * g / (g - 1.0))};
}

EulerFields euler_riemann_exact(const RiemannState& state, const Vec& x, double t) {
  require(t > 0.0, "Riemann sampling time must be positive");
  const RiemannSolution sol = riemann_solve(state);
  EulerFields f;
  f.rho.resize(x.size());
  f.u.resize(x.size());
  f.p.resize(x.size());
  f.e.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Primitive w = sol.sample((x[i] - state.x0) / t);
    f.rho[i] = w.rho;
    f.u[i] = w.u;
    f.p[i] = w.p;
    f.e[i] = total_energy(w, state.gamma);
  }
  return f;
}

}  // namespace radon::pde
