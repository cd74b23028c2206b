#include "radon/reconstruct.hpp"

#include <algorithm>
#include <cmath>

namespace radon::reconstruct {

Vec monotone_fix(const Vec& knots, double lo, double hi) {
  require(hi > lo, "monotone_fix needs a nonempty domain");
  require(knots.size() >= 2, "monotone_fix needs at least two knots");
  require(knots.allFinite(), "monotone_fix needs finite knots");
  const Eigen::Index n = knots.size();
  const double eps = 1e-9 * (hi - lo);

  bool valid = knots[0] == lo && knots[n - 1] == hi;
  for (Eigen::Index j = 1; valid && j < n; ++j) valid = knots[j] - knots[j - 1] >= eps;
  if (valid) return knots;

  Vec y = knots.cwiseMax(lo).cwiseMin(hi);
  y[0] = lo;
  y[n - 1] = hi;
  // Cumulative max with separation, then the mirror pass keeps every knot
  // below hi with room for the ones after it.
  for (Eigen::Index j = 1; j + 1 < n; ++j) y[j] = std::max(y[j], y[j - 1] + eps);
  for (Eigen::Index j = n - 2; j >= 1; --j) y[j] = std::min(y[j], y[j + 1] - eps);
  return y;
}

namespace {

double interp_at(const Vec& knots, const Vec& values, double q) {
  const Eigen::Index n = knots.size();
  const double* begin = knots.data();
  const double* it = std::upper_bound(begin, begin + n, q);
  Eigen::Index i = std::clamp<Eigen::Index>((it - begin) - 1, 0, n - 2);
  const double t = (q - knots[i]) / (knots[i + 1] - knots[i]);
  return values[i] + t * (values[i + 1] - values[i]);
}

}  // namespace

Vec interp_linear_1d(const Vec& knots, const Vec& values, const Vec& queries, OutOfRange policy) {
  require(knots.size() >= 2, "interpolation needs at least two knots");
  require(knots.size() == values.size(), "knots and values differ in length");
  for (Eigen::Index j = 1; j < knots.size(); ++j)
    require(knots[j] > knots[j - 1], "interpolation knots must be strictly increasing");
  const double lo = knots[0];
  const double hi = knots[knots.size() - 1];
  const double period = hi - lo;

  Vec out(queries.size());
  for (Eigen::Index q = 0; q < queries.size(); ++q) {
    double y = queries[q];
    if (y < lo || y > hi) {
      switch (policy) {
        case OutOfRange::error:
          throw InvalidArgument("interpolation query " + std::to_string(y) + " outside [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
        case OutOfRange::clamp:
          y = std::clamp(y, lo, hi);
          break;
        case OutOfRange::wrap:
          y = lo + std::fmod(std::fmod(y - lo, period) + period, period);
          break;
      }
    }
    out[q] = interp_at(knots, values, y);
  }
  return out;
}

Vec recover_uniform(const GraphPrediction& graph, const Vec& targets, double lo, double hi,
                    bool periodic) {
  require(graph.knots.size() == graph.values.size(), "graph knots and values differ in length");
  const Vec knots = monotone_fix(graph.knots, lo, hi);
  return interp_linear_1d(knots, graph.values, targets,
                          periodic ? OutOfRange::wrap : OutOfRange::clamp);
}

Mat recover_spacetime(const std::vector<GraphPrediction>& slices, const Vec& slice_times,
                      const Vec& target_x, const Vec& target_t, double lo, double hi,
                      bool periodic) {
  require(!slices.empty(), "space-time recovery needs at least one slice");
  require(static_cast<Eigen::Index>(slices.size()) == slice_times.size(),
          "one time value per slice is required");
  for (Eigen::Index k = 1; k < slice_times.size(); ++k)
    require(slice_times[k] > slice_times[k - 1], "slice times must be strictly increasing");

  const Eigen::Index nt = slice_times.size();
  Mat per_slice(nt, target_x.size());
  for (Eigen::Index k = 0; k < nt; ++k)
    per_slice.row(k) = recover_uniform(slices[k], target_x, lo, hi, periodic).transpose();
  if (nt == 1) return per_slice.replicate(target_t.size(), 1);

  Mat out(target_t.size(), target_x.size());
  for (Eigen::Index q = 0; q < target_t.size(); ++q) {
    const double t = std::clamp(target_t[q], slice_times[0], slice_times[nt - 1]);
    const double* b = slice_times.data();
    Eigen::Index k = std::clamp<Eigen::Index>((std::upper_bound(b, b + nt, t) - b) - 1, 0, nt - 2);
    const double s = (t - slice_times[k]) / (slice_times[k + 1] - slice_times[k]);
    out.row(q) = (1.0 - s) * per_slice.row(k) + s * per_slice.row(k + 1);
  }
  return out;
}

Vec rel_l2_errors(const Mat& pred, const Mat& ref) {
  require(pred.rows() == ref.rows() && pred.cols() == ref.cols(),
          "prediction and reference grids differ");
  require(ref.cols() > 0, "empty reference");
  Vec e(ref.rows());
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    const double denom = ref.row(i).norm();
    if (denom == 0.0) throw InvalidArgument("zero-norm reference in relative L2 error");
    // The 1/sqrt(N2) factors of the RMS norm cancel in the ratio.
    e[i] = (pred.row(i) - ref.row(i)).norm() / denom;
  }
  return e;
}

double rel_l2_error(const Mat& pred, const Mat& ref) {
  require(ref.rows() > 0, "relative L2 error needs at least one sample");
  return rel_l2_errors(pred, ref).mean();
}

}  // namespace radon::reconstruct
