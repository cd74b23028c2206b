#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace radon {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown for violated preconditions (shapes, ranges, malformed config).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical procedure cannot produce a valid result
// (non-convergence, blow-up, vacuum states).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Thrown for unreadable, truncated or mismatched files.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void require(bool condition, std::string_view message);

// Uniform 1D grid. Periodic grids hold n nodes lo + i*(hi-lo)/n (the node at
// hi is the image of lo); closed grids hold n nodes including both ends.
struct UniformGrid {
  double lo = 0.0;
  double hi = 1.0;
  int n = 2;
  bool periodic = false;

  double spacing() const;
  double node(int i) const;
  Vec nodes() const;
  double length() const { return hi - lo; }
};

// Derives an independent 64-bit seed for a named substream of a root seed.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name,
                             std::uint64_t index = 0);

// 64-bit FNV-1a over raw bytes; used for provenance hashes.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace radon
