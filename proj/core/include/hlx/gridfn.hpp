#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "hlx/types.hpp"

namespace hlx {

/// Uniform tensor grid on a box [lower, upper] in R^d, d in {1, 2}, with the
/// same spacing h on every axis. Nodes are stored with axis 0 fastest.
class GridDomain {
 public:
  GridDomain(int dim, Point lower, Point upper, std::array<int, 2> counts);

  /// Builds the grid with spacing exactly h. When (upper - lower) / h is not
  /// an integer, the box is widened symmetrically to the next whole number of
  /// cells so that the spacing stays uniform across axes.
  static GridDomain from_spacing(std::span<const double> lower,
                                 std::span<const double> upper, double h);

  int dim() const noexcept { return dim_; }
  double spacing() const noexcept { return h_; }
  const Point& lower() const noexcept { return lower_; }
  const Point& upper() const noexcept { return upper_; }
  int count(int axis) const noexcept { return counts_[axis]; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(counts_[0]) * static_cast<std::size_t>(counts_[1]);
  }

  std::size_t index(int i0, int i1 = 0) const noexcept {
    return static_cast<std::size_t>(i1) * static_cast<std::size_t>(counts_[0]) +
           static_cast<std::size_t>(i0);
  }
  std::array<int, 2> coords(std::size_t idx) const noexcept {
    return {static_cast<int>(idx % static_cast<std::size_t>(counts_[0])),
            static_cast<int>(idx / static_cast<std::size_t>(counts_[0]))};
  }
  Point node(std::size_t idx) const noexcept;
  Point center() const noexcept;
  /// Smallest half-width over the active axes.
  double half_width() const noexcept;
  /// Half the Euclidean diameter of the box.
  double half_diameter() const noexcept;
  /// Index of the node nearest to x after clamping x into the box.
  std::size_t nearest_node(const Point& x) const noexcept;

  bool operator==(const GridDomain&) const = default;

 private:
  int dim_;
  Point lower_;
  Point upper_;
  std::array<int, 2> counts_;
  double h_;
};

using ScalarField = std::function<double(const Point&)>;

/// A bounded function sampled on a GridDomain, extended outside the box by
/// clamping to the nearest box point, and evaluated between nodes by
/// multilinear interpolation.
///
/// `trusted_radius` delimits the part of the box whose values are not
/// polluted by the truncation of the state space: a node is trusted when its
/// distance to the box boundary along every axis is at least
/// `domain.half_width() - trusted_radius`. Operators with a finite reach
/// shrink it.
class GridFunction {
 public:
  GridFunction(GridDomain domain, std::vector<double> values, double trusted_radius);
  /// Full trust: trusted_radius = half the box width.
  GridFunction(GridDomain domain, std::vector<double> values);

  static GridFunction sample(const GridDomain& domain, const ScalarField& formula);

  const GridDomain& domain() const noexcept { return domain_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t idx) const noexcept { return values_[idx]; }
  std::size_t size() const noexcept { return values_.size(); }

  double trusted_radius() const noexcept { return trusted_radius_; }
  GridFunction with_trusted_radius(double r) const;
  /// Margin from the box boundary excluded from the trusted region.
  double untrusted_margin() const noexcept;
  bool is_trusted(std::size_t idx) const noexcept;
  std::vector<std::size_t> trusted_nodes() const;

  /// Node value with each lattice coordinate clamped into the grid.
  double clamped(int i0, int i1 = 0) const noexcept;
  /// Multilinear interpolation inside the box, clamp extension outside.
  double value_at(const Point& x) const noexcept;

  GridFunction negated() const;
  GridFunction plus_constant(double k) const;

 private:
  GridDomain domain_;
  std::vector<double> values_;
  double trusted_radius_;
};

/// max - min over the grid values.
double variation(const GridFunction& f);

/// Largest adjacent-node slope |difference| / h over all axes. This is a lower
/// bound on the Lipschitz constant of the sampled formula and equals the
/// Lipschitz constant of the interpolant along each axis.
double lipschitz_estimate(const GridFunction& f);

/// Largest multiple m h of the spacing such that every pair of nodes within
/// distance m h differs by at most eps, capped at half the box diameter.
/// Returns 0 when already neighbouring nodes differ by more than eps.
double inverse_modulus(const GridFunction& f, double eps);

double max_value(const GridFunction& f);
double min_value(const GridFunction& f);

/// Common trusted nodes of f and g (taking the smaller trusted radius).
std::vector<std::size_t> common_trusted_nodes(const GridFunction& f, const GridFunction& g);

/// sup over the common trusted region of f - g; -inf when the region is empty.
double sup_difference(const GridFunction& f, const GridFunction& g);
/// sup over the common trusted region of |f - g|.
double max_abs_difference(const GridFunction& f, const GridFunction& g);

/// CSV with header "x0[,x1],value", one row per node in storage order.
void write_csv(const GridFunction& f, std::ostream& os);
/// Reads the format of write_csv; the domain is recovered from the node
/// coordinates, which must form a uniform grid.
GridFunction read_csv(std::istream& is);

}  // namespace hlx
