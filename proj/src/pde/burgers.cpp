#include "radon/pde/burgers.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

namespace radon::pde {

namespace {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;

struct EtdCoefficients {
  CVec e, e2, q, f1, f2, f3;
};

class Stepper {
public:
  explicit Stepper(const BurgersOptions& opts)
      : opts_(opts), n_(opts.n_modes), m_(n_ / 2 + 1), real_(n_), spec_(m_) {
    lin_.resize(m_);
    grad_.resize(m_);
    mask_.resize(m_);
    for (int k = 0; k < m_; ++k) {
      const double w = 2.0 * std::numbers::pi * k;
      lin_[k] = -opts.nu * w * w;
      grad_[k] = cplx(0.0, -0.5 * w);
      mask_[k] = (3 * k < n_ && 2 * k != n_) ? 1.0 : 0.0;
    }
    // ESTIMATE keeps the transforms bitwise reproducible from run to run.
    fwd_ = fftw_plan_dft_r2c_1d(n_, real_.data(), reinterpret_cast<fftw_complex*>(spec_.data()),
                                FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n_, reinterpret_cast<fftw_complex*>(spec_.data()), real_.data(),
                                FFTW_ESTIMATE);
  }
  ~Stepper() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  CVec to_spectral(const Vec& u) {
    real_ = u;
    fftw_execute(fwd_);
    return spec_;
  }

  Vec to_physical(const CVec& v) {
    spec_ = v;
    fftw_execute(inv_);
    return real_ / static_cast<double>(n_);
  }

  // -(1/2) d/dx (u^2), dealiased.
  CVec nonlinear(const CVec& v) {
    if (opts_.linear_only) return CVec::Zero(m_);
    spec_ = v.cwiseProduct(mask_.cast<cplx>());
    fftw_execute(inv_);
    real_ = (real_ / static_cast<double>(n_)).array().square().matrix();
    fftw_execute(fwd_);
    return spec_.cwiseProduct(grad_).cwiseProduct(mask_.cast<cplx>());
  }

  const EtdCoefficients& coefficients(double h) {
    auto it = cache_.find(h);
    if (it != cache_.end()) return it->second;
    constexpr int contour = 32;
    EtdCoefficients c;
    c.e.resize(m_);
    c.e2.resize(m_);
    c.q.resize(m_);
    c.f1.resize(m_);
    c.f2.resize(m_);
    c.f3.resize(m_);
    for (int k = 0; k < m_; ++k) {
      const double hl = h * lin_[k];
      c.e[k] = std::exp(hl);
      c.e2[k] = std::exp(0.5 * hl);
      cplx q = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0;
      for (int j = 1; j <= contour; ++j) {
        const cplx z = hl + std::exp(cplx(0.0, std::numbers::pi * (j - 0.5) / contour));
        const cplx ez = std::exp(z);
        const cplx z3 = z * z * z;
        q += (std::exp(0.5 * z) - 1.0) / z;
        f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
        f2 += (2.0 + z + ez * (z - 2.0)) / z3;
        f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
      }
      // Real L: the upper half circle and its conjugate average to the real part.
      c.q[k] = h * (q / double(contour)).real();
      c.f1[k] = h * (f1 / double(contour)).real();
      c.f2[k] = h * (f2 / double(contour)).real();
      c.f3[k] = h * (f3 / double(contour)).real();
    }
    return cache_.emplace(h, std::move(c)).first->second;
  }

  void step(CVec& v, double h) {
    const EtdCoefficients& c = coefficients(h);
    const CVec nv = nonlinear(v);
    const CVec a = c.e2.cwiseProduct(v) + c.q.cwiseProduct(nv);
    const CVec na = nonlinear(a);
    const CVec b = c.e2.cwiseProduct(v) + c.q.cwiseProduct(na);
    const CVec nb = nonlinear(b);
    const CVec cc = c.e2.cwiseProduct(a) + c.q.cwiseProduct(2.0 * nb - nv);
    const CVec nc = nonlinear(cc);
    v = c.e.cwiseProduct(v) + nv.cwiseProduct(c.f1) + 2.0 * (na + nb).cwiseProduct(c.f2) +
        nc.cwiseProduct(c.f3);
  }

  // Advance v by span using steps of dt and one shorter closing step if needed.
  void advance(CVec& v, double span) {
    if (span <= 0.0) return;
    const double dt = opts_.dt;
    long long steps = static_cast<long long>(std::floor(span / dt));
    double rest = span - static_cast<double>(steps) * dt;
    if (std::abs(rest - dt) <= 1e-9 * dt) {
      ++steps;
      rest = 0.0;
    } else if (rest <= 1e-9 * dt) {
      rest = 0.0;
    }
    for (long long s = 0; s < steps; ++s) {
      step(v, dt);
      if (s % 256 == 255) check(v);
    }
    if (rest > 0.0) step(v, rest);
    check(v);
  }

private:
  void check(const CVec& v) const {
    if (!v.allFinite())
      throw NumericalError("Burgers solver blew up (non-finite Fourier modes); nu=" +
                           std::to_string(opts_.nu) + ", dt=" + std::to_string(opts_.dt));
  }

  BurgersOptions opts_;
  int n_, m_;
  Vec real_;
  CVec spec_;
  Vec lin_, mask_;
  CVec grad_;
  fftw_plan fwd_, inv_;
  std::map<double, EtdCoefficients> cache_;
};

void validate(const Vec& u0, const BurgersOptions& opts) {
  require(opts.nu > 0.0, "Burgers viscosity must be positive");
  require(opts.dt > 0.0 && opts.dt <= 1e-3, "Burgers time step must lie in (0, 1e-3]");
  require(opts.n_modes >= 8 && opts.n_modes % 2 == 0, "Burgers needs an even grid of >= 8 points");
  require(u0.size() == opts.n_modes, "initial data length must equal n_modes");
  require(u0.allFinite(), "initial data must be finite");
}

}  // namespace

Vec burgers_solve(const Vec& u0, double t, const BurgersOptions& opts) {
  return burgers_solve_on_times(u0, Vec::Constant(1, t), opts).row(0).transpose();
}

Mat burgers_solve_on_times(const Vec& u0, const Vec& times, const BurgersOptions& opts) {
  validate(u0, opts);
  require(times.size() >= 1, "at least one output time is required");
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    require(times[k] >= 0.0, "output times must be nonnegative");
    if (k > 0) require(times[k] >= times[k - 1], "output times must be nondecreasing");
  }
  Stepper stepper(opts);
  CVec v = stepper.to_spectral(u0);
  Mat out(times.size(), opts.n_modes);
  double now = 0.0;
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    stepper.advance(v, times[k] - now);
    now = times[k];
    out.row(k) = stepper.to_physical(v).transpose();
  }
  return out;
}

}  // namespace radon::pde
