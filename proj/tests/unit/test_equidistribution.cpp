#include "oracles.hpp"
#include "radon/equidistribution.hpp"
#include "radon/pde/advection.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace radon;
using namespace radon::equi;

TEST_CASE("constant density gives the uniform mesh") {
  const DensityField rho{Vec::LinSpaced(11, 0.0, 2.0), Vec::Constant(11, 3.0)};
  const Vec x = equidistribute_1d(rho, 8);
  CHECK((x - Vec::LinSpaced(9, 0.0, 2.0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("every computational cell carries equal mass") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  DensityField rho{Vec::LinSpaced(40, -1.0, 3.0), Vec(40)};
  for (Eigen::Index i = 0; i < 40; ++i) rho.rho[i] = u(rng);
  const int n = 17;
  const Vec x = equidistribute_1d(rho, n);
  const double total = oracle::integrate_piecewise_linear(rho.x, rho.rho, 3.0);
  CHECK(total_mass(rho) == doctest::Approx(total).epsilon(1e-12));
  CHECK(x[0] == -1.0);
  CHECK(x[n] == 3.0);
  for (int j = 0; j <= n; ++j) {
    const double m = oracle::integrate_piecewise_linear(rho.x, rho.rho, x[j]);
    CHECK(m == doctest::Approx(total * j / n).epsilon(1e-10));
  }
}

TEST_CASE("cumulative mass agrees with brute-force integration") {
  DensityField rho{Vec::LinSpaced(5, 0.0, 1.0), Vec{{1.0, 2.0, 0.5, 3.0, 1.0}}};
  for (double b : {0.0, 0.1, 0.25, 0.6, 1.0})
    CHECK(cumulative_mass_at(rho, b) ==
          doctest::Approx(oracle::integrate_piecewise_linear(rho.x, rho.rho, b)).epsilon(1e-12));
}

TEST_CASE("arclength density of a smooth field") {
  const int n = 256;
  SampledField f{{0.0, 1.0, n, true}, Vec(n)};
  for (int i = 0; i < n; ++i) f.values[i] = std::sin(2.0 * std::numbers::pi * i / n);
  const DensityField rho = density_arclength(f, {1.0, 0});
  REQUIRE(rho.x.size() == n + 1);
  for (int i = 0; i <= n; i += 32) {
    const double d = 2.0 * std::numbers::pi * std::cos(2.0 * std::numbers::pi * i / n);
    CHECK(rho.rho[i] == doctest::Approx(std::sqrt(1.0 + d * d)).epsilon(1e-3));
  }
  CHECK(rho.rho[0] == rho.rho[n]);
}

TEST_CASE("smoothing keeps the density positive and periodic") {
  const int n = 64;
  SampledField f{{0.0, 1.0, n, true}, Vec::Zero(n)};
  f.values.segment(20, 10).setOnes();
  const DensityField r0 = density_arclength(f, {1.0, 0});
  const DensityField r2 = density_arclength(f, {1.0, 2});
  CHECK(r2.rho.minCoeff() >= 1.0);
  CHECK(r2.rho.maxCoeff() < r0.rho.maxCoeff());
  CHECK(r2.rho[0] == r2.rho[n]);
}

TEST_CASE("jacobian stencil") {
  const Vec x{{0.0, 0.1, 0.3, 0.6, 1.0}};
  const Vec bounded = jacobian_det_1d(x, 0.25, false);
  CHECK(bounded[0] == doctest::Approx(0.4));
  CHECK(bounded[2] == doctest::Approx(1.0));
  CHECK(bounded[4] == doctest::Approx(1.6));
  const Vec periodic = jacobian_det_1d(x, 0.25, true);
  // ends: (x1 - x0 + x_{n-1} - x_{n-2}) / (2 dxi) with the period folded in
  CHECK(periodic[0] == doctest::Approx((0.1 + 0.4) / 0.5));
  CHECK(periodic[4] == periodic[0]);
}

TEST_CASE("weights respect their caps") {
  const Vec det{{0.0, 1.0, 10.0}};
  const Vec ws = weight_solution(det, 2.0);
  CHECK(ws[0] == doctest::Approx(1.0));
  CHECK(ws[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(ws[2] == 2.0);
  const Vec wc = weight_coordinate(Vec{{0.0, 2.0, 100.0}}, det, 100.0);
  CHECK(wc[0] == doctest::Approx(1.0));
  CHECK(wc[1] == doctest::Approx(std::sqrt(1.0 + 16.0)));
  CHECK(wc[2] == 100.0);
}

TEST_CASE("advection sample preprocessing") {
  const int n = 2048;
  std::mt19937_64 rng(17);
  const auto p = pde::sample_box_params(rng);
  const Vec nodes = Vec::LinSpaced(n, 0.0, 1.0 - 1.0 / n);
  SampledField f{{0.0, 1.0, n, true}, pde::advection_exact(p, 1.0, 0.25, nodes, 0.0, 1.0)};
  PreprocessOptions opts;
  DensityField rho;
  const AdaptiveSample s = preprocess_sample(f, opts, rho);
  REQUIRE(s.x.size() == opts.n_xi + 1);
  CHECK(s.x[0] == 0.0);
  CHECK(s.x[opts.n_xi] == 1.0);
  for (int j = 1; j <= opts.n_xi; ++j) CHECK(s.x[j] > s.x[j - 1]);
  CHECK(s.det_j.minCoeff() > 0.0);
  CHECK(s.w_solution.maxCoeff() <= opts.cap_solution);
  CHECK(s.w_coordinate.maxCoeff() <= opts.cap_coordinate);
  CHECK(s.sigma == doctest::Approx(total_mass(rho)));
  // The mesh concentrates at the jumps: smallest cell well below uniform.
  double smallest = 1.0;
  for (int j = 1; j <= opts.n_xi; ++j) smallest = std::min(smallest, s.x[j] - s.x[j - 1]);
  CHECK(smallest < 0.25 / opts.n_xi);
  CHECK(integral_residual(s, rho) < 1e-9);
}

TEST_CASE("bounded grids pin both ends") {
  SampledField f{{-1.0, 1.0, 101, false}, Vec(101)};
  for (int i = 0; i < 101; ++i) f.values[i] = std::tanh(20.0 * (-1.0 + 0.02 * i));
  PreprocessOptions o;
  o.n_xi = 32;
  const auto s = preprocess_sample(f, o);
  CHECK(s.x[0] == -1.0);
  CHECK(s.x[32] == 1.0);
  CHECK(s.xi[0] == -1.0);
  CHECK(s.xi[32] == 1.0);
  CHECK(s.u[16] == doctest::Approx(0.0).epsilon(1e-2));
}

TEST_CASE("preprocessed container round trip") {
  const int n = 64;
  PreprocessedSplit p;
  p.split = "train";
  p.periodic = true;
  p.options.n_xi = 8;
  p.inputs = Mat::Random(3, 2);
  p.source_hash = "abc";
  for (Mat* m : {&p.x, &p.u, &p.det_j, &p.w_solution, &p.w_coordinate}) m->resize(3, 9);
  p.sigma.resize(3);
  p.source_ids = Vec{{0.0, 1.0, 2.0}};
  for (int i = 0; i < 3; ++i) {
    SampledField f{{0.0, 1.0, n, true}, Vec(n)};
    for (int k = 0; k < n; ++k) f.values[k] = std::sin(2.0 * std::numbers::pi * (k + i) / n);
    const auto s = preprocess_sample(f, p.options);
    p.xi = s.xi;
    p.x.row(i) = s.x.transpose();
    p.u.row(i) = s.u.transpose();
    p.det_j.row(i) = s.det_j.transpose();
    p.w_solution.row(i) = s.w_solution.transpose();
    p.w_coordinate.row(i) = s.w_coordinate.transpose();
    p.sigma[i] = s.sigma;
  }
  const auto q = preprocessed_from_container(deserialize(serialize(to_container(p))));
  CHECK(q.x == p.x);
  CHECK(q.w_coordinate == p.w_coordinate);
  CHECK(q.source_hash == "abc");
  CHECK(q.options.n_xi == 8);
  CHECK(q.periodic);
}

TEST_CASE("invalid inputs are rejected") {
  const DensityField bad{Vec::LinSpaced(3, 0.0, 1.0), Vec{{1.0, -1.0, 1.0}}};
  CHECK_THROWS_AS(equidistribute_1d(bad, 4), InvalidArgument);
  const DensityField ok{Vec::LinSpaced(3, 0.0, 1.0), Vec::Ones(3)};
  CHECK_THROWS_AS(equidistribute_1d(ok, 0), InvalidArgument);
  SampledField nan{{0.0, 1.0, 4, true}, Vec::Constant(4, std::nan(""))};
  CHECK_THROWS(preprocess_sample(nan, {}));
}
