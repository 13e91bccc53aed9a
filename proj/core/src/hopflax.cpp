#include "hlx/hopflax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "hlx/errors.hpp"

namespace hlx {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ScoredOffset {
  Offset offset;
  double cost;
};

// Lattice offsets inside the radius with finite cost, ordered by norm and
// then lexicographically, so a strict ">" scan realizes the tie-break.
std::vector<ScoredOffset> offsets_within(const GridDomain& d, const CostFunction& step_cost,
                                         double radius) {
  const double h = d.spacing();
  const double r = radius * (1.0 + 1e-12) + 1e-12 * h;
  // Offsets longer than the grid only reach clamped boundary values, which
  // the boundary node itself dominates.
  const int k_max = static_cast<int>(std::floor(r / h));
  const int k0_max = std::min(k_max, d.count(0) - 1);
  const int k1_max = d.dim() == 2 ? std::min(k_max, d.count(1) - 1) : 0;
  std::vector<ScoredOffset> out;
  for (int k1 = -k1_max; k1 <= k1_max; ++k1) {
    for (int k0 = -k0_max; k0 <= k0_max; ++k0) {
      const Offset o{k0, k1};
      const double len = norm(o, h);
      if (len > r) continue;
      const double c = step_cost.eval_radial(len);
      if (!std::isfinite(c)) continue;
      out.push_back({o, c});
    }
  }
  std::sort(out.begin(), out.end(), [](const ScoredOffset& a, const ScoredOffset& b) {
    const long na = static_cast<long>(a.offset[0]) * a.offset[0] +
                    static_cast<long>(a.offset[1]) * a.offset[1];
    const long nb = static_cast<long>(b.offset[0]) * b.offset[0] +
                    static_cast<long>(b.offset[1]) * b.offset[1];
    if (na != nb) return na < nb;
    return a.offset < b.offset;
  });
  return out;
}

// True when offset a (= j - i) is preferred to b under the tie rule.
bool preferred(long a, long b) {
  const long aa = std::abs(a);
  const long bb = std::abs(b);
  return aa != bb ? aa < bb : a < b;
}

// Row-wise sup-convolution out[i] = max_j in[j] - cost[|i - j|] for a
// quadratic table cost[k] = q k^2 (up to rounding), via the lower envelope of
// the parabolas q (i - j)^2 - in[j].
void envelope_pass(const double* in, std::ptrdiff_t in_stride, double* out,
                   std::ptrdiff_t out_stride, int n, double q, const std::vector<double>& cost,
                   std::vector<int>& v, std::vector<double>& z) {
  v.assign(static_cast<std::size_t>(n), 0);
  z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  auto F = [&](int j) { return -in[j * in_stride] / q + static_cast<double>(j) * j; };
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int j = 1; j < n; ++j) {
    double s = (F(j) - F(v[k])) / (2.0 * (j - v[k]));
    while (s <= z[k]) {
      --k;
      s = (F(j) - F(v[k])) / (2.0 * (j - v[k]));
    }
    ++k;
    v[k] = j;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  const int last = k;
  k = 0;
  for (int i = 0; i < n; ++i) {
    while (z[k + 1] < i) ++k;
    // Re-score the envelope neighbours with the exact cost table so the
    // result is a max over the same floating-point candidates as the scan.
    double best = kNegInf;
    long best_off = 0;
    for (int kk = std::max(0, k - 1); kk <= std::min(last, k + 1); ++kk) {
      const int j = v[kk];
      const double val = in[j * in_stride] - cost[static_cast<std::size_t>(std::abs(i - j))];
      const long off = j - i;
      if (val > best || (val == best && preferred(off, best_off))) {
        best = val;
        best_off = off;
      }
    }
    out[i * out_stride] = best;
  }
}

// Monotone-argmax divide and conquer for a convex cost table in 1-D.
void monotone_pass(std::span<const double> in, std::span<double> out,
                   const std::vector<double>& cost, int ilo, int ihi, int jlo, int jhi) {
  while (ilo <= ihi) {
    const int mid = ilo + (ihi - ilo) / 2;
    double best = kNegInf;
    int arg = jlo;
    for (int j = jlo; j <= jhi; ++j) {
      const double val = in[static_cast<std::size_t>(j)] -
                         cost[static_cast<std::size_t>(std::abs(mid - j))];
      if (val > best) {
        best = val;
        arg = j;
      }
    }
    out[static_cast<std::size_t>(mid)] = best;
    monotone_pass(in, out, cost, ilo, mid - 1, jlo, arg);
    ilo = mid + 1;
    jlo = arg;
  }
}

std::vector<double> axis_cost_table(const CostFunction& step_cost, double h, int n) {
  std::vector<double> table(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) table[static_cast<std::size_t>(k)] = step_cost.eval_radial(k * h);
  return table;
}

}  // namespace

HopfLaxStep make_hopf_lax_step(const CostFunction& cost, double t, const GridFunction& f) {
  if (!(t > 0.0)) throw InvalidArgument("hopf-lax step: t must be > 0");
  const double varf = variation(f);
  // Grid values obey |f(y) - f(x)| <= L |y - x|_1 <= L sqrt(d) |y - x|.
  const double lip = lipschitz_estimate(f) * std::sqrt(static_cast<double>(f.domain().dim()));
  const double r = std::min(search_radius(cost, t, varf), lipschitz_search_radius(cost, t, lip));
  return HopfLaxStep{cost, t, r};
}

HopfLaxResult apply_bruteforce(const GridFunction& f, const HopfLaxStep& step) {
  if (!(step.t > 0.0)) throw InvalidArgument("hopf-lax: t must be > 0");
  if (!std::isfinite(step.radius)) throw InvalidArgument("hopf-lax: search radius is infinite");
  const GridDomain& d = f.domain();
  const auto offsets = offsets_within(d, step.cost.rescale(step.t), step.radius);
  std::vector<double> out(f.size());
  ArgmaxField arg(f.size(), Offset{0, 0});
  const auto n = static_cast<std::ptrdiff_t>(f.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const auto c = d.coords(static_cast<std::size_t>(idx));
    double best = kNegInf;
    Offset best_o{0, 0};
    for (const ScoredOffset& s : offsets) {
      const double v = f.clamped(c[0] + s.offset[0], c[1] + s.offset[1]) - s.cost;
      if (v > best) {
        best = v;
        best_o = s.offset;
      }
    }
    out[static_cast<std::size_t>(idx)] = best;
    arg[static_cast<std::size_t>(idx)] = best_o;
  }
  return {GridFunction(d, std::move(out), f.trusted_radius() - step.radius), std::move(arg)};
}

std::optional<GridFunction> apply_fast(const GridFunction& f, const HopfLaxStep& step) {
  if (!(step.t > 0.0)) throw InvalidArgument("hopf-lax: t must be > 0");
  const GridDomain& d = f.domain();
  const double trust = f.trusted_radius() - step.radius;
  const CostFunction step_cost = step.cost.rescale(step.t);
  const double h = d.spacing();

  switch (step.cost.kind()) {
    case CostKind::DiracIndicator:
      return f.with_trusted_radius(trust);
    case CostKind::BallIndicator:
      return std::nullopt;
    case CostKind::Power:
      if (d.dim() != 1) return std::nullopt;
      break;
    case CostKind::Quadratic:
      break;
  }

  const int n0 = d.count(0);
  const int n1 = d.count(1);
  std::vector<double> out(f.size());

  if (step.cost.kind() == CostKind::Power) {
    const auto table = axis_cost_table(step_cost, h, n0);
    monotone_pass(f.values(), out, table, 0, n0 - 1, 0, n0 - 1);
    return GridFunction(d, std::move(out), trust);
  }

  // Quadratic: c_t(a) = (kappa / s) |a|^2 with s the accumulated scale, so
  // in lattice units the parabola coefficient is q = kappa h^2 / s.
  const double q = step_cost.kappa() * h * h / step_cost.scale();
  const auto table0 = axis_cost_table(step_cost, h, n0);
  const double* src = f.values().data();
  std::vector<double> tmp;
  if (d.dim() == 2) tmp.resize(f.size());
  double* first = d.dim() == 2 ? tmp.data() : out.data();

#pragma omp parallel
  {
    std::vector<int> v;
    std::vector<double> z;
#pragma omp for schedule(static)
    for (int i1 = 0; i1 < n1; ++i1) {
      const std::size_t row = static_cast<std::size_t>(i1) * static_cast<std::size_t>(n0);
      envelope_pass(src + row, 1, first + row, 1, n0, q, table0, v, z);
    }
  }
  if (d.dim() == 2) {
    const auto table1 = axis_cost_table(step_cost, h, n1);
#pragma omp parallel
    {
      std::vector<int> v;
      std::vector<double> z;
#pragma omp for schedule(static)
      for (int i0 = 0; i0 < n0; ++i0) {
        envelope_pass(tmp.data() + i0, n0, out.data() + i0, n0, n1, q, table1, v, z);
      }
    }
  }
  return GridFunction(d, std::move(out), trust);
}

GridFunction apply_hopf_lax(const GridFunction& f, const HopfLaxStep& step) {
  if (auto fast = apply_fast(f, step)) return std::move(*fast);
  return apply_bruteforce(f, step).value;
}

void write_argmax_csv(const GridDomain& domain, const ArgmaxField& field, std::ostream& os) {
  const double h = domain.spacing();
  os << (domain.dim() == 1 ? "x0,a0\n" : "x0,x1,a0,a1\n");
  os.precision(17);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Point x = domain.node(i);
    os << x[0];
    if (domain.dim() == 2) os << ',' << x[1];
    os << ',' << field[i][0] * h;
    if (domain.dim() == 2) os << ',' << field[i][1] * h;
    os << '\n';
  }
}

}  // namespace hlx
