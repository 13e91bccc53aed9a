#pragma once

#include <optional>
#include <vector>

#include "hlx/cost.hpp"
#include "hlx/gridfn.hpp"
#include "hlx/hopflax.hpp"
#include "hlx/levykernel.hpp"

namespace hlx {

/// I composes kernel after Hopf-Lax (I_t f = mu_t Phi_t f); J composes
/// Hopf-Lax after kernel (J_t f = Phi_t mu_t f).
enum class Order { I, J };

const char* to_string(Order o) noexcept;

struct SchemeConfig {
  double t = 1.0;
  int n = 1;
  Order order = Order::I;
  CostFunction cost = CostFunction::quadratic(0.5);
  KernelModel kernel = KernelModel::dirac(1);
  /// Keep the Hopf-Lax argmax field of every step (forces the brute-force path).
  bool record_policy = false;
  /// C in tol(h) = C h L.
  double tol_constant = 4.0;
  bool use_fast_path = true;
  ConvolutionPath convolution = ConvolutionPath::Auto;
};

/// The two building blocks of one step of size dt: Phi_dt with cost c_dt and
/// the discretized kernel mu_dt. Both orders built from the same instance
/// share the kernel weights bit for bit.
class StepOperators {
 public:
  StepOperators(const CostFunction& cost, const KernelModel& model, double dt,
                const GridDomain& domain, bool use_fast_path = true,
                ConvolutionPath convolution = ConvolutionPath::Auto);

  double dt() const noexcept { return dt_; }
  const CostFunction& cost() const noexcept { return cost_; }
  const DiscreteKernel& kernel() const noexcept { return kernel_; }
  bool kernel_is_identity() const noexcept { return identity_kernel_; }

  HopfLaxStep hopf_lax_step(const GridFunction& f) const;
  /// Phi_dt f; fills `argmax` (brute force) when non-null.
  GridFunction hopf_lax(const GridFunction& f, ArgmaxField* argmax = nullptr) const;
  GridFunction kernel_apply(const GridFunction& f) const;

  GridFunction i_step(const GridFunction& f, ArgmaxField* argmax = nullptr) const;
  GridFunction j_step(const GridFunction& f, ArgmaxField* argmax = nullptr) const;

 private:
  CostFunction cost_;
  double dt_;
  DiscreteKernel kernel_;
  bool identity_kernel_;
  bool use_fast_path_;
  ConvolutionPath convolution_;
};

struct StepRecord {
  int step = 0;
  double sup = 0.0;
  double inf = 0.0;
  double lip = 0.0;
  double trusted_radius = 0.0;
  /// dt * cbar(L) with L the Lipschitz estimate of the current iterate.
  double gap_bound = 0.0;
  double search_radius = 0.0;
};

struct IterationReport {
  Order order = Order::I;
  double t = 0.0;
  int n = 0;
  GridFunction iterate;
  std::vector<StepRecord> steps;
  /// (t / n) cbar(L) with L the Lipschitz estimate of the initial datum.
  double gap_bound = 0.0;
  /// tol(h) = C h L for the initial datum.
  double tolerance = 0.0;
  /// Argmax fields in application order (the first entry acts on f itself,
  /// i.e. it is the control of the last time interval).
  std::vector<ArgmaxField> policy;
};

/// One I step mu_dt Phi_dt f with an explicit lattice kernel.
GridFunction i_step(const GridFunction& f, const CostFunction& cost, double dt,
                    const DiscreteKernel& kernel);
/// One J step Phi_dt mu_dt f with an explicit lattice kernel.
GridFunction j_step(const GridFunction& f, const CostFunction& cost, double dt,
                    const DiscreteKernel& kernel);

/// Runs n steps of the configured order with step size t / n. The trusted
/// radius after step k is the initial one minus the accumulated Hopf-Lax
/// search radii and the cumulative kernel reach. Throws DomainTooSmall
/// (carrying the step index) when it turns negative.
IterationReport iterate(const GridFunction& f, const SchemeConfig& cfg);
IterationReport iterate(const GridFunction& f, const SchemeConfig& cfg, const StepOperators& ops);

struct SandwichRun {
  IterationReport upper;  ///< I-iterate
  IterationReport lower;  ///< J-iterate
  /// sup over the common trusted region of (I-iterate - J-iterate).
  double measured_gap = 0.0;
};

/// Both orders at cfg.n with shared step operators.
SandwichRun iterate_both(const GridFunction& f, const SchemeConfig& cfg);

/// tol(h) = C h L with L the Lipschitz estimate of f.
double discretization_tolerance(const GridFunction& f, double tol_constant);

/// (t / n) cbar(L) with L = lipschitz_estimate(f).
double gap_bound(const GridFunction& f, const SchemeConfig& cfg);

/// Smallest n >= 1 with n >= (t / eps) cbar(var f / delta) where delta is the
/// grid inverse modulus of f at eps. Throws GridTooCoarse when delta = 0.
int guarantee_n(const GridFunction& f, double eps, const SchemeConfig& cfg);

/// Finite family of kernels with penalties gamma_i >= 0, min gamma_i = 0.
/// A penalty of +inf excludes the kernel.
struct PenalizedFamily {
  std::vector<DiscreteKernel> kernels;
  std::vector<double> penalties;

  void validate() const;
};

/// Pointwise min_i (mu_i f + gamma_i).
GridFunction psi_penalized(const GridFunction& f, const PenalizedFamily& family);

/// Infimal counterpart of a supremal operator: f -> -op(-f).
template <class Op>
GridFunction infimal(Op&& op, const GridFunction& f) {
  return op(f.negated()).negated();
}

struct KeyEstimate {
  double lhs = 0.0;        ///< sup over the trusted region of I^n f - J^n f
  double rhs = 0.0;        ///< sup over the grid of Phi_{t/n} f - f
  double tolerance = 0.0;  ///< tol(h)
  bool holds = false;      ///< lhs <= rhs + 2 tol(h)
};

KeyEstimate key_estimate_check(const GridFunction& f, const SchemeConfig& cfg, int n);

}  // namespace hlx
