#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace hlx {

/// A point or displacement in R^d, d in {1, 2}. Unused trailing components
/// are zero, so Euclidean norms can always be taken over both entries.
using Point = std::array<double, 2>;

/// An integer displacement on the grid lattice, in units of the spacing.
using Offset = std::array<int, 2>;

inline double norm(const Point& p) { return std::hypot(p[0], p[1]); }

inline double norm(const Offset& o, double h) {
  return h * std::hypot(static_cast<double>(o[0]), static_cast<double>(o[1]));
}

}  // namespace hlx
