#pragma once

#include "radon/common.hpp"

#include <random>
#include <string>

namespace radon::pde {

// Periodic Gaussian random field on [0, 1) with covariance
// amplitude^2 (-Laplacian + tau^2 I)^(-order). The mode-k standard deviation
// is amplitude * (lambda_k + tau^2)^(-order/2) where lambda_k = (2 pi k)^2
// ("2pi" convention) or k^2 ("integer" convention).
struct GrfSpec {
  double amplitude = 25.0;
  double tau = 5.0;
  double order = 4.0;
  std::string convention = "2pi";

  double mode_std(int k) const;
};

// Samples on n points x_j = j / n. c_0 is real, Nyquist is zero, real and
// imaginary parts of c_k (0 < k < n/2) each carry variance sigma_k^2 / 2.
Vec grf_sample(std::mt19937_64& rng, int n, const GrfSpec& spec = {});

}  // namespace radon::pde
