#pragma once

// Equidistribution-based data transformation: a field u sampled on a uniform
// physical grid becomes an adaptive coordinate map x(xi) and an adaptive
// solution u(x(xi)) on a uniform computational grid, plus the two training
// weights.
//
// The computational domain coincides with the physical one, [lo, hi], and the
// computational grid is xi_j = lo + j (hi - lo) / n_xi, j = 0..n_xi.

#include "radon/container.hpp"

#include <string>
#include <vector>

namespace radon::equi {

struct SampledField {
  UniformGrid grid;
  Vec values;  // one value per grid node

  void validate() const;
  // Nodes and values on the closed interval [lo, hi]; periodic fields get
  // the wrapped value appended at hi.
  Vec closed_nodes() const;
  Vec closed_values() const;
};

// Mesh density on the closed nodes of a uniform grid, piecewise linear
// between nodes.
struct DensityField {
  Vec x;
  Vec rho;
};

struct DensityOptions {
  double beta = 1.0;         // rho = sqrt(1 + beta |u'|^2)
  int smoothing_passes = 2;  // 3-point averaging passes
};

// Derivative of u on the closed nodes: central differences, periodic wrap or
// one-sided at the ends of bounded grids.
Vec field_derivative(const SampledField& f);

DensityField density_arclength(const SampledField& f, const DensityOptions& opts = {});
// Convenience form on [0, (n-1) dx] (or [0, n dx) when periodic).
DensityField density_arclength(const Vec& u, double dx, int smoothing_passes,
                               bool periodic = false, double beta = 1.0);

// Exact integral of the piecewise-linear density over [x.first, b].
double cumulative_mass_at(const DensityField& rho, double b);
double total_mass(const DensityField& rho);

// Knots x(xi_j), j = 0..n_xi, with int_{lo}^{x_j} rho = (j / n_xi) int rho.
// The cumulative integral is exact for the piecewise-linear density and
// inverted exactly (quadratic per cell). Endpoints are pinned.
Vec equidistribute_1d(const DensityField& rho, int n_xi);

// Central-difference dx/dxi; periodic maps wrap at the ends (period =
// x.last - x.first), bounded maps use one-sided differences there.
Vec jacobian_det_1d(const Vec& x, double dxi, bool periodic = false);

// min(M, sqrt(1 + detJ^2))
Vec weight_solution(const Vec& det_j, double cap);
// min(Mbar, sqrt(1 + |grad u|^4 detJ^2))
Vec weight_coordinate(const Vec& grad_u, const Vec& det_j, double cap);

struct PreprocessOptions {
  int n_xi = 64;
  double cap_solution = 2.0;      // M
  double cap_coordinate = 100.0;  // Mbar
  DensityOptions density;
};

struct AdaptiveSample {
  Vec xi;
  Vec x;
  Vec u;
  Vec det_j;
  Vec w_solution;
  Vec w_coordinate;
  double sigma = 0.0;  // int rho / |domain|
};

AdaptiveSample preprocess_sample(const SampledField& f, const PreprocessOptions& opts);
// Same, also returning the density that was equidistributed.
AdaptiveSample preprocess_sample(const SampledField& f, const PreprocessOptions& opts,
                                 DensityField& density_out);

// field is (n_t x grid.n); every time slice is preprocessed independently
// with the spatial density, all slices share the xi grid.
std::vector<AdaptiveSample> preprocess_spacetime(const Mat& field, const UniformGrid& grid,
                                                 const PreprocessOptions& opts);

// max_j |rho(x_j) (x_{j+1} - x_{j-1}) / (2 dxi) - s| / s over interior knots,
// s the mean of the products, rho interpolated at the knots.
double pointwise_residual(const AdaptiveSample& s, const DensityField& rho);

// Integral form over each dual cell [x_{j-1}, x_{j+1}]:
// max_j |int rho / (2 dxi) - sigma| / sigma.
double integral_residual(const AdaptiveSample& s, const DensityField& rho);

// A preprocessed split: one row per sample, columns t-major over
// (slice, xi). `source_ids` are the row indices in the raw split.
struct PreprocessedSplit {
  std::string split;
  Vec xi;
  Vec times;  // empty unless space-time
  bool periodic = false;
  PreprocessOptions options;
  Mat inputs;
  Mat x, u, det_j, w_solution, w_coordinate;
  Vec sigma;  // per sample and slice, t-major (N * slices)
  Vec source_ids;
  std::string source_hash;  // hash of the raw split file

  int count() const { return static_cast<int>(inputs.rows()); }
  int slices() const { return times.size() == 0 ? 1 : static_cast<int>(times.size()); }
  void validate() const;
};

inline constexpr int kPreprocessedVersion = 1;

Container to_container(const PreprocessedSplit& p);
PreprocessedSplit preprocessed_from_container(const Container& c);

}  // namespace radon::equi
