#include "radon/pde/advection.hpp"

#include <cmath>

namespace radon::pde {

Vec advection_exact(const BoxWaveParams& p, double speed, double t, const Vec& x, double lo,
                    double period) {
  require(period > 0.0, "advection period must be positive");
  require(p.w > 0.0 && p.w < period, "box width must lie in (0, period)");
  require(std::isfinite(speed) && std::isfinite(t), "advection speed and time must be finite");
  Vec u(x.size());
  const double half = 0.5 * period;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    require(x[i] >= lo && x[i] <= lo + period, "advection grid must lie within one period");
    // Offset from the translated center, wrapped into [-period/2, period/2).
    double y = x[i] - speed * t - p.zeta;
    y -= period * std::floor((y + half) / period);
    u[i] = (y >= -0.5 * p.w && y < 0.5 * p.w) ? p.h : 0.0;
  }
  return u;
}

BoxWaveParams sample_box_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BoxWaveParams p;
  p.h = 0.2 + 0.6 * unit(rng);
  p.w = 0.05 + 0.25 * unit(rng);
  p.zeta = 0.5 * unit(rng);
  return p;
}

}  // namespace radon::pde
