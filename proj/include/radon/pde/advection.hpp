#pragma once

#include "radon/common.hpp"

#include <random>

namespace radon::pde {

// h * 1[-w/2, w/2](x - zeta)
struct BoxWaveParams {
  double h = 1.0;
  double w = 0.2;
  double zeta = 0.0;

  Vec encode() const { return Vec{{h, w, zeta}}; }
};

// Exact periodic translation of the box by speed*T on [lo, lo + period).
// A point lies in the support when -w/2 <= y < w/2, y the wrapped offset.
Vec advection_exact(const BoxWaveParams& p, double speed, double t, const Vec& x, double lo,
                    double period);

// h ~ U[0.2, 0.8], w ~ U[0.05, 0.3], zeta ~ U[0, 0.5]
BoxWaveParams sample_box_params(std::mt19937_64& rng);

}  // namespace radon::pde
