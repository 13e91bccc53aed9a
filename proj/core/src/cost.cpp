#include "hlx/cost.hpp"

#include <cmath>
#include <sstream>

#include "hlx/errors.hpp"

namespace hlx {

CostFunction CostFunction::power(double exponent, double kappa) {
  if (!(exponent > 1.0) || !std::isfinite(exponent)) {
    throw InvalidArgument("power cost: exponent must be > 1");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw InvalidArgument("power cost: kappa must be > 0");
  }
  return CostFunction(CostKind::Power, exponent, kappa, 0.0);
}

CostFunction CostFunction::quadratic(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw InvalidArgument("quadratic cost: kappa must be > 0");
  }
  return CostFunction(CostKind::Quadratic, 2.0, kappa, 0.0);
}

CostFunction CostFunction::ball_indicator(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("ball indicator cost: radius must be > 0");
  }
  return CostFunction(CostKind::BallIndicator, 0.0, 0.0, radius);
}

CostFunction CostFunction::dirac_indicator() {
  return CostFunction(CostKind::DiracIndicator, 0.0, 0.0, 0.0);
}

double CostFunction::base_radial(double r) const {
  switch (kind_) {
    case CostKind::Power:
      return kappa_ * std::pow(r, exponent_);
    case CostKind::Quadratic:
      return kappa_ * r * r;
    case CostKind::BallIndicator:
      return r <= radius_ ? 0.0 : kInfinity;
    case CostKind::DiracIndicator:
      return r == 0.0 ? 0.0 : kInfinity;
  }
  return kInfinity;
}

double CostFunction::eval_radial(double r) const {
  if (r == 0.0) return 0.0;
  if (!std::isfinite(r)) return kInfinity;
  const double v = scale_ * base_radial(r / scale_);
  return std::isfinite(v) ? v : kInfinity;
}

// sup_{r >= 0} (b r - c(r)) per kind. For kappa r^p the maximizer is
// r* = (b / (kappa p))^(1/(p-1)) with value (p - 1) kappa r*^p.
double CostFunction::base_conjugate(double b) const {
  switch (kind_) {
    case CostKind::Power: {
      if (b == 0.0) return 0.0;
      const double r = std::pow(b / (kappa_ * exponent_), 1.0 / (exponent_ - 1.0));
      return (exponent_ - 1.0) * kappa_ * std::pow(r, exponent_);
    }
    case CostKind::Quadratic:
      return b * b / (4.0 * kappa_);
    case CostKind::BallIndicator:
      return b * radius_;
    case CostKind::DiracIndicator:
      return 0.0;
  }
  return kInfinity;
}

double CostFunction::conjugate(double b) const {
  if (!(b >= 0.0)) throw InvalidArgument("conjugate: slope b must be >= 0");
  return scale_ * base_conjugate(b);
}

CostFunction CostFunction::rescale(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw InvalidArgument("rescale: t must be > 0");
  }
  CostFunction out = *this;
  out.scale_ = scale_ * t;
  return out;
}

std::string CostFunction::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case CostKind::Power:
      os << "power(p=" << exponent_ << ", kappa=" << kappa_ << ")";
      break;
    case CostKind::Quadratic:
      os << "quadratic(kappa=" << kappa_ << ")";
      break;
    case CostKind::BallIndicator:
      os << "ball(R=" << radius_ << ")";
      break;
    case CostKind::DiracIndicator:
      os << "dirac";
      break;
  }
  if (scale_ != 1.0) os << " scaled by " << scale_;
  return os.str();
}

double search_radius(const CostFunction& c, double t, double varf) {
  if (!(t > 0.0)) throw InvalidArgument("search_radius: t must be > 0");
  if (!(varf >= 0.0)) throw InvalidArgument("search_radius: varf must be >= 0");
  const double s = c.scale() * t;
  switch (c.kind()) {
    case CostKind::Power:
    case CostKind::Quadratic:
      // s kappa (r / s)^p = varf
      return s * std::pow(varf / (s * c.kappa()), 1.0 / c.exponent());
    case CostKind::BallIndicator:
      return s * c.radius();
    case CostKind::DiracIndicator:
      return 0.0;
  }
  return kInfinity;
}

double lipschitz_search_radius(const CostFunction& c, double t, double lip) {
  if (!(t > 0.0)) throw InvalidArgument("lipschitz_search_radius: t must be > 0");
  if (!(lip >= 0.0)) throw InvalidArgument("lipschitz_search_radius: lip must be >= 0");
  const double s = c.scale() * t;
  switch (c.kind()) {
    case CostKind::Power:
    case CostKind::Quadratic:
      // s kappa (r / s)^p = lip r
      return s * std::pow(lip / c.kappa(), 1.0 / (c.exponent() - 1.0));
    case CostKind::BallIndicator:
      return s * c.radius();
    case CostKind::DiracIndicator:
      return 0.0;
  }
  return kInfinity;
}

}  // namespace hlx
