#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "hlx/cost.hpp"
#include "hlx/gridfn.hpp"

namespace hlx {

/// One application of the Hopf-Lax operator
///   (Phi_t f)(x) = sup_a ( f(x + a) - t c(a / t) )
/// with the supremum taken over lattice offsets a, |a| <= radius.
struct HopfLaxStep {
  CostFunction cost;  ///< the unscaled running cost c
  double t = 1.0;
  double radius = 0.0;
};

/// Builds a step whose radius bounds every maximizer for the input f: the
/// smaller of the variation-based and the Lipschitz-based search radii.
HopfLaxStep make_hopf_lax_step(const CostFunction& cost, double t, const GridFunction& f);

/// One maximizing lattice offset per node.
using ArgmaxField = std::vector<Offset>;

struct HopfLaxResult {
  GridFunction value;
  ArgmaxField argmax;
};

/// Reference implementation: exhaustive scan of all lattice offsets inside
/// the radius. Ties go to the offset of smallest norm, then smallest
/// lexicographic (a0, a1). The trusted radius shrinks by step.radius.
HopfLaxResult apply_bruteforce(const GridFunction& f, const HopfLaxStep& step);

/// Same values as apply_bruteforce in O(N) per axis (lower envelope of
/// parabolas) for quadratic cost in any dimension, and O(N log N) (monotone
/// argmax divide and conquer) for power cost in one dimension. Returns
/// nullopt when the cost kind has no fast path.
std::optional<GridFunction> apply_fast(const GridFunction& f, const HopfLaxStep& step);

/// Fast path when available, otherwise brute force.
GridFunction apply_hopf_lax(const GridFunction& f, const HopfLaxStep& step);

/// CSV with header "x0[,x1],a0[,a1]" listing the argmax offset (in state
/// units) at every node.
void write_argmax_csv(const GridDomain& domain, const ArgmaxField& field, std::ostream& os);

}  // namespace hlx
