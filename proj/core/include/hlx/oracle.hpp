#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "hlx/cost.hpp"
#include "hlx/gridfn.hpp"
#include "hlx/hopflax.hpp"
#include "hlx/levykernel.hpp"
#include "hlx/scheme.hpp"

namespace hlx {

// ---------------------------------------------------------------------------
// Hopf-Cole closed form
//
// For standard Brownian noise and c(a) = |a|^2 / 2 in one dimension the value
// function is V_t f(x) = log E[exp f(x + B_t)]. The expectation is integrated
// cell by cell between grid nodes (where the interpolant of f is linear) with
// Gauss-Legendre rules, over |z| <= 8 sqrt(t).
// ---------------------------------------------------------------------------

/// True for the configuration the Hopf-Cole oracle covers.
bool is_hopf_cole_benchmark(const CostFunction& cost, const KernelModel& kernel);

/// V_t f at every node; the trusted radius shrinks by 8 sqrt(t).
GridFunction hopf_cole(const GridFunction& f, double t, int gauss_points = 4);

/// V_t f at an arbitrary point x.
double hopf_cole_at(const GridFunction& f, double t, double x, int gauss_points = 4);

/// Largest change of hopf_cole_at on a sample of trusted nodes when the
/// Gauss rule is doubled from 4 to 8 points.
double hopf_cole_error_estimate(const GridFunction& f, double t);

/// V_t f(x) for a smooth formula f, by composite Gauss-Legendre quadrature.
double hopf_cole_formula(const std::function<double(double)>& f, double t, double x);

// ---------------------------------------------------------------------------
// Discrete optimal transport
// ---------------------------------------------------------------------------

struct DiscreteMeasure {
  std::vector<Point> support;
  std::vector<double> weights;

  /// Non-negative weights summing to 1 within 1e-12.
  void validate() const;
};

/// A transport plan between two finite measures, row-major
/// (rows = support of mu, columns = support of nu).
struct Coupling {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> plan;

  double at(std::size_t i, std::size_t j) const { return plan[i * cols + j]; }
  /// Marginals match within tol and all entries are non-negative.
  bool is_coupling_of(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol) const;
};

struct TransportSolution {
  double value = 0.0;  ///< +inf when no finite-cost coupling exists
  Coupling coupling;
};

/// Exact min-cost transport for small supports (successive shortest paths).
/// `cost` is applied to z - y for y in supp(mu), z in supp(nu).
TransportSolution solve_transport(const CostFunction& cost, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu);

/// OT_c(mu, nu) = inf over couplings of the integral of c(z - y).
double ot_value(const CostFunction& cost, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct OtRepresentation {
  double lhs = 0.0;            ///< (I f)(x) = (mu Phi_t f)(x)
  double rhs_maps = 0.0;       ///< max over offset maps of sum_j w_j [f(x+y_j+a_j) - c_t(a_j)]
  double rhs_transport = 0.0;  ///< max over the same nu of (nu f)(x) - OT_{c_t}(mu, nu)
  bool transport_checked = false;
  std::size_t maps = 0;
  double tolerance = 0.0;
  bool holds = false;
};

/// Compares the I step at node `x_index` with the transport-penalized sup
/// over the measures nu obtained by moving each kernel atom to one of the
/// lattice offsets within the Hopf-Lax search radius. The transport value is
/// solved exactly for every enumerated nu while their count stays below
/// `transport_budget`. Throws EnumerationBudgetExceeded above `map_budget`.
OtRepresentation verify_ot_representation(const GridFunction& f, std::size_t x_index,
                                          const DiscreteKernel& kernel, const CostFunction& cost,
                                          double t, std::size_t map_budget = 5'000'000,
                                          std::size_t transport_budget = 200'000,
                                          double tol_constant = 4.0);

// ---------------------------------------------------------------------------
// Monte Carlo evaluation of piecewise-constant feedback controls
// ---------------------------------------------------------------------------

/// Lattice feedback control: on step k (forward time) a state X moves by
/// fields[k][nearest node of X] * h and pays c_dt of that displacement.
struct PolicyField {
  GridDomain domain;
  double dt = 0.0;
  CostFunction cost;
  std::vector<ArgmaxField> fields;

  /// Policy of a J iteration recorded with record_policy.
  static PolicyField from_report(const IterationReport& report, const CostFunction& cost);
  /// Always-zero control for n steps.
  static PolicyField zero(const GridDomain& domain, double t, int n, const CostFunction& cost);
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double excursion_fraction = 0.0;
  std::size_t paths = 0;
};

/// Mean of f(X_t) - sum_k c_dt(a_k) under the policy and the Levy increments
/// of `model`. Paths leaving the box are clamped back and counted. Each path
/// draws from its own stream, so the result does not depend on scheduling.
MonteCarloEstimate simulate_policy(const PolicyField& policy, const KernelModel& model,
                                   const GridFunction& f, const Point& x0, std::size_t paths,
                                   std::uint64_t seed);

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> v);

}  // namespace hlx
