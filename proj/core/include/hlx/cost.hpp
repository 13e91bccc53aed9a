#pragma once

#include <limits>
#include <string>

#include "hlx/types.hpp"

namespace hlx {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class CostKind { Power, Quadratic, BallIndicator, DiracIndicator };

/// A radially symmetric convex running cost c with c(0) = 0, possibly
/// rescaled to c_s(a) = s * c(a / s).
///
/// Every kind is a function of |a| only, which keeps the radial conjugate
///   cbar(b) = sup_a (b |a| - c(a))
/// in closed form. Values are extended reals: indicators return +inf outside
/// their feasible set.
class CostFunction {
 public:
  /// c(a) = kappa |a|^p, p > 1, kappa > 0.
  static CostFunction power(double exponent, double kappa);
  /// c(a) = kappa |a|^2.
  static CostFunction quadratic(double kappa);
  /// c = 0 on |a| <= R, +inf outside.
  static CostFunction ball_indicator(double radius);
  /// c = 0 at a = 0, +inf elsewhere.
  static CostFunction dirac_indicator();

  CostKind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return exponent_; }
  double kappa() const noexcept { return kappa_; }
  double radius() const noexcept { return radius_; }
  /// Accumulated rescaling factor s (1 for an unscaled cost).
  double scale() const noexcept { return scale_; }

  double eval(const Point& a) const { return eval_radial(norm(a)); }
  /// c evaluated at any vector of norm r >= 0.
  double eval_radial(double r) const;

  /// Closed-form radial conjugate; throws InvalidArgument for b < 0.
  double conjugate(double b) const;

  /// c_t(a) = t c(a / t); the conjugate satisfies cbar_t = t cbar.
  CostFunction rescale(double t) const;

  /// True for the kinds whose superlinear growth is finite everywhere.
  bool is_finite_valued() const noexcept {
    return kind_ == CostKind::Power || kind_ == CostKind::Quadratic;
  }

  std::string describe() const;

 private:
  CostFunction(CostKind kind, double exponent, double kappa, double radius)
      : kind_(kind), exponent_(exponent), kappa_(kappa), radius_(radius) {}

  double base_radial(double r) const;
  double base_conjugate(double b) const;

  CostKind kind_;
  double exponent_ = 2.0;
  double kappa_ = 0.0;
  double radius_ = 0.0;
  double scale_ = 1.0;
};

/// Smallest rho such that c_t(a) > varf for every |a| > rho. Any maximizer of
/// f(x + a) - c_t(a) lies in this ball when var f <= varf.
double search_radius(const CostFunction& c, double t, double varf);

/// Smallest rho such that c_t(a) >= lip |a| for every |a| >= rho. A
/// maximizer of f(x + a) - c_t(a) lies in this ball when f is lip-Lipschitz.
double lipschitz_search_radius(const CostFunction& c, double t, double lip);

}  // namespace hlx
