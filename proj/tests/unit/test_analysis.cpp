#include "oracles.hpp"
#include "radon/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace radon;
using namespace radon::analysis;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("spectrum equals the eigenvalues of the weighted covariance") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  Mat x(30, 12);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  const double dx = 0.1;
  const Mat cov = dx * x.transpose() * x / 30.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  Vec ref = es.eigenvalues().reverse();
  const auto s = covariance_spectrum(x, dx, "t");
  REQUIRE(s.eigenvalues.size() == 12);
  CHECK((s.eigenvalues - ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(optimal_error_tail(s, 3) == doctest::Approx(std::sqrt(ref.tail(9).sum())));
  CHECK(optimal_error_tail(s, 12) == 0.0);
  CHECK(optimal_error_tail(s, 0) == doctest::Approx(std::sqrt(ref.sum())));
}

TEST_CASE("rate fit recovers an exact power law") {
  std::vector<double> n = {8, 16, 32, 64};
  std::vector<double> e;
  for (double v : n) e.push_back(3.0 * std::pow(v, -1.5));
  const RateFit f = rate_fit(n, e);
  CHECK(f.slope == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  CHECK_THROWS_AS(rate_fit({1, 2}, {1, 1}), InvalidArgument);
  CHECK_THROWS_AS(rate_fit({1, 2, 3}, {1, 0, 1}), InvalidArgument);
}

TEST_CASE("mollified box profile") {
  const MollifiedBox b{0.2, 0.0};
  CHECK(b.mollified(0.0) == 1.0);
  CHECK(b.mollified(0.5 * kPi) == doctest::Approx(0.5));
  CHECK(b.mollified(-0.5 * kPi) == doctest::Approx(0.5));
  CHECK(b.mollified(3.0) == 0.0);
  CHECK(b.exact(0.5 * kPi - 1e-9) == 1.0);
  CHECK(b.exact(0.5 * kPi + 1e-9) == 0.0);
  CHECK(b.ramp_breaks().size() == 4);
}

TEST_CASE("mollification error is delta / 6") {
  for (double d : {1e-1, 1e-2, 1e-3}) {
    const auto r = appendixB_construct(d, 16, 0.0);
    CHECK(r.mollification_sq == doctest::Approx(d / 6.0).epsilon(1e-9));
  }
}

TEST_CASE("equidistributed box map matches the closed form") {
  const double d = 0.05;
  const Vec xi = Vec::LinSpaced(257, -kPi, kPi);
  const Vec x = mollified_box_map({d, 0.0}, xi);
  for (Eigen::Index j = 0; j < xi.size(); ++j) CHECK(std::abs(x[j] - oracle::appendix_map(d, xi[j])) < 1e-12);
}

TEST_CASE("shifted box map is a translate") {
  const double d = 0.05, s = 0.37;
  const Vec xi = Vec::LinSpaced(65, -kPi, kPi);
  const Vec x = mollified_box_map({d, s}, xi);
  for (Eigen::Index j = 1; j < xi.size(); ++j) CHECK(x[j] > x[j - 1]);
  // Mass between consecutive knots is constant: check via the ramp density.
  const MollifiedBox box{d, s};
  CHECK(x[0] == -kPi);
  CHECK(x[64] == kPi);
  CHECK(box.mollified(x[32]) >= 0.0);
}

TEST_CASE("adaptive interpolant error is small and decreasing") {
  double prev = 1.0;
  for (int n : {16, 32, 64}) {
    const auto r = appendixB_construct(std::pow(n, -3.0), n, 0.37);
    CHECK(r.error < prev);
    prev = r.error;
  }
}

TEST_CASE("uniform interpolation of smooth and discontinuous data") {
  const int m = 1 << 14;
  Vec s(m + 1);
  for (int i = 0; i <= m; ++i) s[i] = std::sin(2.0 * kPi * i / m);
  const double e16 = fem_uniform_interp_error(s, 0.0, 1.0, 16);
  const double e32 = fem_uniform_interp_error(s, 0.0, 1.0, 32);
  CHECK(std::log2(e16 / e32) == doctest::Approx(2.0).epsilon(0.05));
  const double b16 = box_uniform_interp_error(0.37, 16);
  const double b64 = box_uniform_interp_error(0.37, 64);
  CHECK(std::log2(b16 / b64) == doctest::Approx(1.0).epsilon(0.25));
  CHECK_THROWS_AS(fem_uniform_interp_error(s, 0.0, 1.0, 3), InvalidArgument);
}
