#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <random>
#include <variant>
#include <vector>

#include "hlx/gridfn.hpp"
#include "hlx/types.hpp"

namespace hlx {

/// mu_t = delta_{shift * t}.
struct DiracComponent {
  Point shift{0.0, 0.0};
};

/// Brownian motion with drift: mu_t = N(drift * t, diag(sigma2) * t).
struct GaussianComponent {
  Point drift{0.0, 0.0};
  Point sigma2{0.0, 0.0};
};

struct Jump {
  Point displacement{0.0, 0.0};
  double probability = 0.0;
};

/// Compound Poisson process with intensity `rate` and a finitely supported
/// jump law. Jump displacements are snapped to the lattice on discretization.
struct CompoundPoissonComponent {
  double rate = 0.0;
  std::vector<Jump> jumps;
};

using KernelComponent = std::variant<DiracComponent, GaussianComponent, CompoundPoissonComponent>;

/// The law (mu_t)_{t>0} of a Levy process: a sum of independent Dirac,
/// Gaussian and compound Poisson parts.
class KernelModel {
 public:
  static KernelModel dirac(int dim, Point shift = {0.0, 0.0});
  static KernelModel gaussian(int dim, Point drift, Point sigma2);
  static KernelModel compound_poisson(int dim, double rate, std::vector<Jump> jumps);
  static KernelModel sum(const std::vector<KernelModel>& parts);

  int dim() const noexcept { return dim_; }
  const std::vector<KernelComponent>& components() const noexcept { return components_; }

  double tail_mass_tol() const noexcept { return tail_mass_tol_; }
  KernelModel with_tail_mass_tol(double tol) const;

  /// True when mu_t = delta_0 for every t.
  bool is_identity() const noexcept;

 private:
  KernelModel(int dim, std::vector<KernelComponent> parts)
      : dim_(dim), components_(std::move(parts)) {}

  int dim_;
  std::vector<KernelComponent> components_;
  double tail_mass_tol_ = 1e-12;
};

/// Lattice discretization of mu_t: weights on integer offsets (units of h),
/// normalized to sum 1.
struct DiscreteKernel {
  int dim = 1;
  double h = 1.0;
  std::vector<Offset> offsets;
  std::vector<double> weights;
  /// max |offset| over the support, in state units.
  double truncation_radius = 0.0;
  /// Probability mass removed by truncation before renormalization.
  double truncated_mass = 0.0;
};

/// Gaussian parts are sampled at the nodes (midpoint rule) and truncated at
/// |drift| t + 8 sigma sqrt(t); compound Poisson parts use the Poisson series
/// up to the order whose tail is below the model's tail_mass_tol, with exact
/// lattice self-convolutions. Throws DomainTooSmall when the truncation radius
/// exceeds max_radius.
DiscreteKernel discretize(const KernelModel& model, double t, double h,
                          double max_radius = std::numeric_limits<double>::infinity());

/// Law of the sum of independent increments distributed by a and b.
DiscreteKernel convolve(const DiscreteKernel& a, const DiscreteKernel& b);

/// Total variation distance sum |a - b| / 2 between two lattice kernels.
double total_variation(const DiscreteKernel& a, const DiscreteKernel& b);

/// Mean offset in state units.
Point kernel_mean(const DiscreteKernel& k);

enum class ConvolutionPath { Auto, Direct, Spectral };

/// (mu f)(x) = sum_j w_j f(x + y_j) with clamp extension. The trusted radius
/// shrinks by the kernel's truncation radius.
GridFunction apply_kernel(const GridFunction& f, const DiscreteKernel& kernel,
                          ConvolutionPath path = ConvolutionPath::Auto);

/// Distance from which truncation-boundary pollution of `steps` successive
/// applications of discretize(model, dt, h) cannot reach (up to the
/// tail tolerance). Never larger than steps times the per-step truncation
/// radius; for Gaussian parts the spread grows like sqrt(steps dt).
double cumulative_reach(const KernelModel& model, double dt, int steps, double h);

/// One draw of Y_t ~ mu_t using a fresh stream derived from `seed`.
Point sample_increment(const KernelModel& model, double t, std::uint64_t seed);
/// One draw of Y_t ~ mu_t consuming `rng`.
Point sample_increment(const KernelModel& model, double t, std::mt19937_64& rng);

/// Independent stream for (seed, stream) pairs, e.g. one per Monte Carlo path.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// CSV "offset0[,offset1],weight" in state units.
void write_kernel_csv(const DiscreteKernel& kernel, std::ostream& os);

}  // namespace hlx
