#pragma once

// Recovery of physical-domain fields from adaptive (knot, value) graphs and
// the relative L2 error metric.

#include "radon/common.hpp"

#include <vector>

namespace radon::reconstruct {

// Knots y_j with values u_j, in computational-grid order.
struct GraphPrediction {
  Vec knots;
  Vec values;
};

enum class OutOfRange { error, clamp, wrap };

// Pins the endpoints to [lo, hi] and makes the interior strictly increasing
// with a minimum gap of 1e-9 * (hi - lo). Already-valid input is returned
// unchanged.
Vec monotone_fix(const Vec& knots, double lo, double hi);

// Piecewise-linear interpolation through strictly increasing knots. With
// OutOfRange::wrap the period is knots.last - knots.first.
Vec interp_linear_1d(const Vec& knots, const Vec& values, const Vec& queries,
                     OutOfRange policy = OutOfRange::error);

// monotone_fix followed by interpolation onto `targets`. Periodic domains
// wrap out-of-range queries, bounded ones clamp to the endpoint values.
Vec recover_uniform(const GraphPrediction& graph, const Vec& targets, double lo, double hi,
                    bool periodic);

// Per-slice 1D recovery in x followed by linear interpolation in t. Returns
// a (target_t.size() x target_x.size()) field.
Mat recover_spacetime(const std::vector<GraphPrediction>& slices, const Vec& slice_times,
                      const Vec& target_x, const Vec& target_t, double lo, double hi,
                      bool periodic);

// Mean over rows of ||pred_i - ref_i|| / ||ref_i|| with the root-mean-square
// grid norm. Throws on a zero-norm reference row.
double rel_l2_error(const Mat& pred, const Mat& ref);

// Per-row relative errors (same definition, no averaging).
Vec rel_l2_errors(const Mat& pred, const Mat& ref);

}  // namespace radon::reconstruct
