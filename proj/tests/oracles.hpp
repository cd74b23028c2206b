#pragma once

// Independent reference implementations used only by the tests. Nothing in
// here calls into the library code it checks.

#include "radon/common.hpp"
#include "radon/nn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using radon::Mat;
using radon::Vec;

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// |a - b| / max(|a|, |b|, floor)
inline double rel_diff(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central differences of f with respect to every entry of params.
inline Vec fd_gradient(const std::function<double()>& f, std::vector<double*> params,
                       double h = 1e-6) {
  Vec g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = *params[i];
    *params[i] = keep + h;
    const double up = f();
    *params[i] = keep - h;
    const double down = f();
    *params[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Scalar-loop MLP forward, one sample at a time.
inline Mat mlp_forward_loops(const radon::nn::MlpParams& p, const Mat& batch) {
  Mat out(batch.rows(), p.output_dim());
  for (Eigen::Index s = 0; s < batch.rows(); ++s) {
    std::vector<double> a(batch.cols());
    for (Eigen::Index j = 0; j < batch.cols(); ++j) a[j] = batch(s, j);
    for (int l = 0; l < p.layer_count(); ++l) {
      const Mat& w = p.weights[l];
      std::vector<double> z(w.rows());
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        double acc = p.biases[l][r];
        for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * a[c];
        const bool hidden = l + 1 < p.layer_count();
        if (hidden)
          acc = p.activation == radon::nn::Activation::relu ? relu(acc) : std::tanh(acc);
        z[r] = acc;
      }
      a = std::move(z);
    }
    for (std::size_t j = 0; j < a.size(); ++j) out(s, j) = a[j];
  }
  return out;
}

// The equidistributed map of the unshifted mollified box in closed form:
// x(xi) = -pi + (2 - 2d/pi)(xi + pi) + (4d/pi - 2) relu(xi + 3pi/4)
//         + (2 - 4d/pi) relu(xi + pi/4) + (4d/pi - 2) relu(xi - pi/4)
//         + (2 - 4d/pi) relu(xi - 3pi/4)
inline double appendix_map(double delta, double xi) {
  constexpr double pi = std::numbers::pi;
  const double a = 4.0 * delta / pi - 2.0;
  return -pi + (2.0 - 2.0 * delta / pi) * (xi + pi) + a * relu(xi + 0.75 * pi) -
         a * relu(xi + 0.25 * pi) + a * relu(xi - 0.25 * pi) - a * relu(xi - 0.75 * pi);
}

// Composite Simpson integral of the piecewise-linear interpolant of (x, f)
// over [x0, b] with `per_cell` subintervals in every cell.
inline double integrate_piecewise_linear(const Vec& x, const Vec& f, double b, int per_cell = 8) {
  auto value = [&](double t) {
    const auto it = std::upper_bound(x.data(), x.data() + x.size(), t);
    Eigen::Index i = std::clamp<Eigen::Index>((it - x.data()) - 1, 0, x.size() - 2);
    const double s = (t - x[i]) / (x[i + 1] - x[i]);
    return f[i] + s * (f[i + 1] - f[i]);
  };
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size() && x[i] < b; ++i) {
    const double a = x[i];
    const double c = std::min(x[i + 1], b);
    const double h = (c - a) / per_cell;
    double s = value(a) + value(c);
    for (int k = 1; k < per_cell; ++k) s += (k % 2 ? 4.0 : 2.0) * value(a + k * h);
    total += s * h / 3.0;
  }
  return total;
}

// Heat equation u_t = nu u_xx on the unit torus by a direct O(n^2) Fourier
// transform: every mode decays by exp(-nu (2 pi k)^2 t).
inline Vec heat_kernel_dft(const Vec& u0, double nu, double t) {
  const Eigen::Index n = u0.size();
  const double two_pi = 2.0 * std::numbers::pi;
  Vec out = Vec::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index kk = k <= n / 2 ? k : k - n;
    double re = 0.0, im = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = two_pi * static_cast<double>(k * j % n) / n;
      re += u0[j] * std::cos(a);
      im -= u0[j] * std::sin(a);
    }
    const double damp = std::exp(-nu * (two_pi * kk) * (two_pi * kk) * t) / n;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = two_pi * static_cast<double>(k * j % n) / n;
      out[j] += damp * (re * std::cos(a) - im * std::sin(a));
    }
  }
  return out;
}

// First-order Godunov finite volumes with the HLLC flux for the 1D Euler
// equations, transmissive boundaries. Cells are centred at lo + (i + 1/2) dx.
struct EulerCells {
  Vec x, rho, u, p;
};

inline EulerCells godunov_hllc(double rho_l, double u_l, double p_l, double rho_r, double u_r,
                               double p_r, double x0, double lo, double hi, int cells, double t,
                               double gamma = 1.4, double cfl = 0.9) {
  const double dx = (hi - lo) / cells;
  std::vector<double> q0(cells + 2), q1(cells + 2), q2(cells + 2);
  for (int i = 0; i < cells; ++i) {
    const double xc = lo + (i + 0.5) * dx;
    const bool left = xc < x0;
    const double r = left ? rho_l : rho_r;
    const double v = left ? u_l : u_r;
    const double pr = left ? p_l : p_r;
    q0[i + 1] = r;
    q1[i + 1] = r * v;
    q2[i + 1] = pr / (gamma - 1.0) + 0.5 * r * v * v;
  }
  auto prim = [&](int i, double& r, double& v, double& pr) {
    r = q0[i];
    v = q1[i] / r;
    pr = (gamma - 1.0) * (q2[i] - 0.5 * r * v * v);
  };
  std::vector<double> f0(cells + 1), f1(cells + 1), f2(cells + 1);
  double time = 0.0;
  while (time < t) {
    q0[0] = q0[1], q1[0] = q1[1], q2[0] = q2[1];
    q0[cells + 1] = q0[cells], q1[cells + 1] = q1[cells], q2[cells + 1] = q2[cells];
    double smax = 0.0;
    for (int i = 1; i <= cells; ++i) {
      double r, v, pr;
      prim(i, r, v, pr);
      smax = std::max(smax, std::abs(v) + std::sqrt(gamma * pr / r));
    }
    const double dt = std::min(cfl * dx / smax, t - time);
    for (int f = 0; f <= cells; ++f) {
      double rl, ul, pl, rr, ur, pr;
      prim(f, rl, ul, pl);
      prim(f + 1, rr, ur, pr);
      const double cl = std::sqrt(gamma * pl / rl), cr = std::sqrt(gamma * pr / rr);
      const double sl = std::min(ul - cl, ur - cr), sr = std::max(ul + cl, ur + cr);
      const double el = q2[f], er = q2[f + 1];
      const double ss = (pr - pl + rl * ul * (sl - ul) - rr * ur * (sr - ur)) /
                        (rl * (sl - ul) - rr * (sr - ur));
      const double fl0 = rl * ul, fl1 = rl * ul * ul + pl, fl2 = ul * (el + pl);
      const double fr0 = rr * ur, fr1 = rr * ur * ur + pr, fr2 = ur * (er + pr);
      if (sl >= 0.0) {
        f0[f] = fl0, f1[f] = fl1, f2[f] = fl2;
      } else if (sr <= 0.0) {
        f0[f] = fr0, f1[f] = fr1, f2[f] = fr2;
      } else if (ss >= 0.0) {
        const double k = rl * (sl - ul) / (sl - ss);
        const double s0 = k, s1 = k * ss,
                     s2 = k * (el / rl + (ss - ul) * (ss + pl / (rl * (sl - ul))));
        f0[f] = fl0 + sl * (s0 - q0[f]);
        f1[f] = fl1 + sl * (s1 - q1[f]);
        f2[f] = fl2 + sl * (s2 - q2[f]);
      } else {
        const double k = rr * (sr - ur) / (sr - ss);
        const double s0 = k, s1 = k * ss,
                     s2 = k * (er / rr + (ss - ur) * (ss + pr / (rr * (sr - ur))));
        f0[f] = fr0 + sr * (s0 - q0[f + 1]);
        f1[f] = fr1 + sr * (s1 - q1[f + 1]);
        f2[f] = fr2 + sr * (s2 - q2[f + 1]);
      }
    }
    const double c = dt / dx;
    for (int i = 1; i <= cells; ++i) {
      q0[i] -= c * (f0[i] - f0[i - 1]);
      q1[i] -= c * (f1[i] - f1[i - 1]);
      q2[i] -= c * (f2[i] - f2[i - 1]);
    }
    time += dt;
  }
  EulerCells out;
  out.x.resize(cells);
  out.rho.resize(cells);
  out.u.resize(cells);
  out.p.resize(cells);
  for (int i = 0; i < cells; ++i) {
    out.x[i] = lo + (i + 0.5) * dx;
    prim(i + 1, out.rho[i], out.u[i], out.p[i]);
  }
  return out;
}

}  // namespace oracle
