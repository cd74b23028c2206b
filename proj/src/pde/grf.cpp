#include "radon/pde/grf.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace radon::pde {

double GrfSpec::mode_std(int k) const {
  double lambda = 0.0;
  if (convention == "2pi") {
    const double w = 2.0 * std::numbers::pi * k;
    lambda = w * w;
  } else if (convention == "integer") {
    lambda = static_cast<double>(k) * k;
  } else {
    throw InvalidArgument("unknown GRF eigenvalue convention '" + convention + "'");
  }
  return amplitude * std::pow(lambda + tau * tau, -0.5 * order);
}

Vec grf_sample(std::mt19937_64& rng, int n, const GrfSpec& spec) {
  require(n >= 4 && (n & (n - 1)) == 0, "GRF grid size must be a power of two >= 4");
  require(spec.amplitude > 0.0 && spec.order > 0.0, "GRF amplitude and order must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);

  const int half = n / 2;
  std::vector<std::complex<double>> c(half + 1, 0.0);
  c[0] = spec.mode_std(0) * normal(rng);
  for (int k = 1; k < half; ++k) {
    const double s = spec.mode_std(k) * std::sqrt(0.5);
    const double re = normal(rng);
    const double im = normal(rng);
    c[k] = {s * re, s * im};
  }

  // Unnormalized c2r gives u_j = sum_k c_k exp(2 pi i k j / n).
  Vec u(n);
  fftw_plan plan = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(c.data()), u.data(),
                                        FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return u;
}

}  // namespace radon::pde
