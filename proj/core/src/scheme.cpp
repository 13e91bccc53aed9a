#include "hlx/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hlx/errors.hpp"

namespace hlx {

const char* to_string(Order o) noexcept { return o == Order::I ? "I" : "J"; }

StepOperators::StepOperators(const CostFunction& cost, const KernelModel& model, double dt,
                             const GridDomain& domain, bool use_fast_path,
                             ConvolutionPath convolution)
    : cost_(cost),
      dt_(dt),
      kernel_(discretize(model, dt, domain.spacing(), domain.half_width())),
      identity_kernel_(model.is_identity()),
      use_fast_path_(use_fast_path),
      convolution_(convolution) {
  if (!(dt > 0.0)) throw InvalidArgument("step size must be > 0");
  if (model.dim() != domain.dim()) throw InvalidArgument("kernel and domain differ in dimension");
}

HopfLaxStep StepOperators::hopf_lax_step(const GridFunction& f) const {
  return make_hopf_lax_step(cost_, dt_, f);
}

GridFunction StepOperators::hopf_lax(const GridFunction& f, ArgmaxField* argmax) const {
  const HopfLaxStep step = hopf_lax_step(f);
  if (argmax != nullptr || !use_fast_path_) {
    HopfLaxResult r = apply_bruteforce(f, step);
    if (argmax != nullptr) *argmax = std::move(r.argmax);
    return std::move(r.value);
  }
  return apply_hopf_lax(f, step);
}

GridFunction StepOperators::kernel_apply(const GridFunction& f) const {
  if (identity_kernel_) return f;
  return apply_kernel(f, kernel_, convolution_);
}

GridFunction StepOperators::i_step(const GridFunction& f, ArgmaxField* argmax) const {
  return kernel_apply(hopf_lax(f, argmax));
}

GridFunction StepOperators::j_step(const GridFunction& f, ArgmaxField* argmax) const {
  return hopf_lax(kernel_apply(f), argmax);
}

GridFunction i_step(const GridFunction& f, const CostFunction& cost, double dt,
                    const DiscreteKernel& kernel) {
  const GridFunction lifted = apply_hopf_lax(f, make_hopf_lax_step(cost, dt, f));
  return apply_kernel(lifted, kernel);
}

GridFunction j_step(const GridFunction& f, const CostFunction& cost, double dt,
                    const DiscreteKernel& kernel) {
  const GridFunction smoothed = apply_kernel(f, kernel);
  return apply_hopf_lax(smoothed, make_hopf_lax_step(cost, dt, smoothed));
}

double discretization_tolerance(const GridFunction& f, double tol_constant) {
  return tol_constant * f.domain().spacing() * lipschitz_estimate(f);
}

double gap_bound(const GridFunction& f, const SchemeConfig& cfg) {
  if (cfg.n < 1) throw InvalidArgument("gap_bound: n must be >= 1");
  return cfg.t / cfg.n * cfg.cost.conjugate(lipschitz_estimate(f));
}

IterationReport iterate(const GridFunction& f, const SchemeConfig& cfg) {
  if (cfg.n < 1) throw InvalidArgument("iterate: n must be >= 1");
  if (!(cfg.t > 0.0)) throw InvalidArgument("iterate: t must be > 0");
  const StepOperators ops(cfg.cost, cfg.kernel, cfg.t / cfg.n, f.domain(), cfg.use_fast_path,
                          cfg.convolution);
  return iterate(f, cfg, ops);
}

IterationReport iterate(const GridFunction& f, const SchemeConfig& cfg, const StepOperators& ops) {
  if (cfg.n < 1) throw InvalidArgument("iterate: n must be >= 1");
  const double dt = ops.dt();
  const double h = f.domain().spacing();

  IterationReport report{cfg.order, cfg.t, cfg.n, f, {}, gap_bound(f, cfg),
                         discretization_tolerance(f, cfg.tol_constant), {}};
  double hopf_lax_reach = 0.0;
  GridFunction current = f;
  for (int k = 1; k <= cfg.n; ++k) {
    ArgmaxField field;
    ArgmaxField* sink = cfg.record_policy ? &field : nullptr;
    // The radius is fixed by the input of the Hopf-Lax application.
    double radius = 0.0;
    GridFunction next = current;
    if (cfg.order == Order::I) {
      radius = ops.hopf_lax_step(current).radius;
      next = ops.i_step(current, sink);
    } else {
      const GridFunction smoothed = ops.kernel_apply(current);
      radius = ops.hopf_lax_step(smoothed).radius;
      next = ops.hopf_lax(smoothed, sink);
    }
    hopf_lax_reach += radius;
    const double trust =
        f.trusted_radius() - hopf_lax_reach - cumulative_reach(cfg.kernel, dt, k, h);
    if (trust < 0.0) {
      throw DomainTooSmall("domain too small: trusted region empty after step " +
                               std::to_string(k) + " of " + std::to_string(cfg.n),
                           k);
    }
    current = next.with_trusted_radius(trust);
    if (cfg.record_policy) report.policy.push_back(std::move(field));

    const double lip = lipschitz_estimate(current);
    report.steps.push_back(StepRecord{k, max_value(current), min_value(current), lip, trust,
                                      dt * cfg.cost.conjugate(lip), radius});
  }
  report.iterate = std::move(current);
  return report;
}

SandwichRun iterate_both(const GridFunction& f, const SchemeConfig& cfg) {
  if (cfg.n < 1) throw InvalidArgument("iterate: n must be >= 1");
  const StepOperators ops(cfg.cost, cfg.kernel, cfg.t / cfg.n, f.domain(), cfg.use_fast_path,
                          cfg.convolution);
  SchemeConfig ci = cfg;
  ci.order = Order::I;
  SchemeConfig cj = cfg;
  cj.order = Order::J;
  SandwichRun run{iterate(f, ci, ops), iterate(f, cj, ops), 0.0};
  run.measured_gap = sup_difference(run.upper.iterate, run.lower.iterate);
  return run;
}

int guarantee_n(const GridFunction& f, double eps, const SchemeConfig& cfg) {
  if (!(eps > 0.0)) throw InvalidArgument("guarantee_n: eps must be > 0");
  const double delta = inverse_modulus(f, eps);
  if (delta <= 0.0) {
    throw GridTooCoarse("grid too coarse: neighbouring nodes already differ by more than eps = " +
                        std::to_string(eps));
  }
  const double bound = cfg.t / eps * cfg.cost.conjugate(variation(f) / delta);
  if (bound > 1e9) throw InvalidArgument("guarantee_n: required n exceeds 1e9");
  return std::max(1, static_cast<int>(std::ceil(bound)));
}

void PenalizedFamily::validate() const {
  if (kernels.empty()) throw InvalidArgument("penalized family: empty");
  if (kernels.size() != penalties.size()) {
    throw InvalidArgument("penalized family: one penalty per kernel required");
  }
  double smallest = std::numeric_limits<double>::infinity();
  for (double g : penalties) {
    if (!(g >= 0.0)) throw InvalidArgument("penalized family: penalties must be >= 0");
    smallest = std::min(smallest, g);
  }
  if (smallest != 0.0) throw InvalidArgument("penalized family: smallest penalty must be 0");
}

GridFunction psi_penalized(const GridFunction& f, const PenalizedFamily& family) {
  family.validate();
  std::vector<double> best(f.size(), std::numeric_limits<double>::infinity());
  double trust = f.trusted_radius();
  for (std::size_t i = 0; i < family.kernels.size(); ++i) {
    const double gamma = family.penalties[i];
    if (!std::isfinite(gamma)) continue;
    const GridFunction g = apply_kernel(f, family.kernels[i]);
    trust = std::min(trust, g.trusted_radius());
    for (std::size_t j = 0; j < best.size(); ++j) best[j] = std::min(best[j], g[j] + gamma);
  }
  return GridFunction(f.domain(), std::move(best), trust);
}

KeyEstimate key_estimate_check(const GridFunction& f, const SchemeConfig& cfg, int n) {
  SchemeConfig c = cfg;
  c.n = n;
  const SandwichRun run = iterate_both(f, c);
  const StepOperators ops(cfg.cost, cfg.kernel, cfg.t / n, f.domain(), cfg.use_fast_path,
                          cfg.convolution);
  const GridFunction lifted = ops.hopf_lax(f);
  double rhs = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) rhs = std::max(rhs, lifted[i] - f[i]);
  KeyEstimate k;
  k.lhs = run.measured_gap;
  k.rhs = rhs;
  k.tolerance = discretization_tolerance(f, cfg.tol_constant);
  k.holds = k.lhs <= k.rhs + 2.0 * k.tolerance;
  return k;
}

}  // namespace hlx
