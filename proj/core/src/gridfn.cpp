#include "hlx/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "hlx/errors.hpp"

namespace hlx {

GridDomain::GridDomain(int dim, Point lower, Point upper, std::array<int, 2> counts)
    : dim_(dim), lower_(lower), upper_(upper), counts_(counts), h_(0.0) {
  if (dim != 1 && dim != 2) throw InvalidArgument("grid domain: dim must be 1 or 2");
  if (dim == 1) {
    lower_[1] = upper_[1] = 0.0;
    counts_[1] = 1;
  }
  for (int a = 0; a < dim; ++a) {
    if (!std::isfinite(lower_[a]) || !std::isfinite(upper_[a]) || !(upper_[a] > lower_[a])) {
      throw InvalidArgument("grid domain: need finite lower < upper on every axis");
    }
    if (counts_[a] < 3) throw InvalidArgument("grid domain: need at least 3 points per axis");
  }
  h_ = (upper_[0] - lower_[0]) / (counts_[0] - 1);
  if (dim == 2) {
    const double h1 = (upper_[1] - lower_[1]) / (counts_[1] - 1);
    if (std::abs(h1 - h_) > 1e-12 * std::max(1.0, h_)) {
      throw InvalidArgument("grid domain: spacing must be uniform across axes");
    }
  }
}

GridDomain GridDomain::from_spacing(std::span<const double> lower,
                                    std::span<const double> upper, double h) {
  if (lower.size() != upper.size() || lower.empty() || lower.size() > 2) {
    throw InvalidArgument("grid domain: lower/upper must both have 1 or 2 entries");
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("grid domain: h must be > 0");
  const int dim = static_cast<int>(lower.size());
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
  std::array<int, 2> counts{1, 1};
  for (int a = 0; a < dim; ++a) {
    const double width = upper[a] - lower[a];
    if (!(width > 0.0)) throw InvalidArgument("grid domain: need lower < upper on every axis");
    const double cells_exact = width / h;
    double cells = std::round(cells_exact);
    if (std::abs(cells - cells_exact) > 1e-9 * std::max(1.0, cells_exact)) {
      cells = std::ceil(cells_exact);
    }
    const double mid = 0.5 * (lower[a] + upper[a]);
    const double half = 0.5 * cells * h;
    lo[a] = mid - half;
    hi[a] = mid + half;
    counts[a] = static_cast<int>(cells) + 1;
  }
  return GridDomain(dim, lo, hi, counts);
}

Point GridDomain::node(std::size_t idx) const noexcept {
  const auto c = coords(idx);
  Point p{lower_[0] + c[0] * h_, 0.0};
  if (dim_ == 2) p[1] = lower_[1] + c[1] * h_;
  return p;
}

Point GridDomain::center() const noexcept {
  return {0.5 * (lower_[0] + upper_[0]), 0.5 * (lower_[1] + upper_[1])};
}

double GridDomain::half_width() const noexcept {
  double w = 0.5 * (upper_[0] - lower_[0]);
  if (dim_ == 2) w = std::min(w, 0.5 * (upper_[1] - lower_[1]));
  return w;
}

double GridDomain::half_diameter() const noexcept {
  return 0.5 * std::hypot(upper_[0] - lower_[0], upper_[1] - lower_[1]);
}

std::size_t GridDomain::nearest_node(const Point& x) const noexcept {
  std::array<int, 2> c{0, 0};
  for (int a = 0; a < dim_; ++a) {
    const double s = std::round((x[a] - lower_[a]) / h_);
    c[a] = static_cast<int>(std::clamp(s, 0.0, static_cast<double>(counts_[a] - 1)));
  }
  return index(c[0], c[1]);
}

GridFunction::GridFunction(GridDomain domain, std::vector<double> values, double trusted_radius)
    : domain_(std::move(domain)), values_(std::move(values)), trusted_radius_(trusted_radius) {
  if (values_.size() != domain_.size()) {
    throw InvalidArgument("grid function: value count does not match the domain");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("grid function: non-finite value");
  }
  trusted_radius_ = std::min(trusted_radius_, domain_.half_width());
}

GridFunction::GridFunction(GridDomain domain, std::vector<double> values)
    : GridFunction(domain, std::move(values), domain.half_width()) {}

GridFunction GridFunction::sample(const GridDomain& domain, const ScalarField& formula) {
  std::vector<double> v(domain.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = formula(domain.node(i));
    if (!std::isfinite(v[i])) {
      throw InvalidArgument("sample: formula is not finite at node " + std::to_string(i));
    }
  }
  return GridFunction(domain, std::move(v));
}

GridFunction GridFunction::with_trusted_radius(double r) const {
  GridFunction out = *this;
  out.trusted_radius_ = std::min(r, domain_.half_width());
  return out;
}

double GridFunction::untrusted_margin() const noexcept {
  return domain_.half_width() - trusted_radius_;
}

bool GridFunction::is_trusted(std::size_t idx) const noexcept {
  if (trusted_radius_ < 0.0) return false;
  const double margin = untrusted_margin() - 1e-9 * domain_.spacing();
  const Point x = domain_.node(idx);
  for (int a = 0; a < domain_.dim(); ++a) {
    const double d = std::min(x[a] - domain_.lower()[a], domain_.upper()[a] - x[a]);
    if (d < margin) return false;
  }
  return true;
}

std::vector<std::size_t> GridFunction::trusted_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (is_trusted(i)) out.push_back(i);
  }
  return out;
}

double GridFunction::clamped(int i0, int i1) const noexcept {
  i0 = std::clamp(i0, 0, domain_.count(0) - 1);
  i1 = std::clamp(i1, 0, domain_.count(1) - 1);
  return values_[domain_.index(i0, i1)];
}

double GridFunction::value_at(const Point& x) const noexcept {
  const double h = domain_.spacing();
  std::array<int, 2> base{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int a = 0; a < domain_.dim(); ++a) {
    const int n = domain_.count(a);
    const double s = std::clamp((x[a] - domain_.lower()[a]) / h, 0.0, static_cast<double>(n - 1));
    int i = static_cast<int>(std::floor(s));
    i = std::min(i, n - 2);
    base[a] = i;
    frac[a] = s - i;
  }
  if (domain_.dim() == 1) {
    const double v0 = clamped(base[0]);
    const double v1 = clamped(base[0] + 1);
    return frac[0] == 0.0 ? v0 : v0 + frac[0] * (v1 - v0);
  }
  const double v00 = clamped(base[0], base[1]);
  const double v10 = clamped(base[0] + 1, base[1]);
  const double v01 = clamped(base[0], base[1] + 1);
  const double v11 = clamped(base[0] + 1, base[1] + 1);
  const double lo = v00 + frac[0] * (v10 - v00);
  const double hi = v01 + frac[0] * (v11 - v01);
  return lo + frac[1] * (hi - lo);
}

GridFunction GridFunction::negated() const {
  GridFunction out = *this;
  for (double& v : out.values_) v = -v;
  return out;
}

GridFunction GridFunction::plus_constant(double k) const {
  GridFunction out = *this;
  for (double& v : out.values_) v += k;
  return out;
}

double max_value(const GridFunction& f) {
  return *std::max_element(f.values().begin(), f.values().end());
}

double min_value(const GridFunction& f) {
  return *std::min_element(f.values().begin(), f.values().end());
}

double variation(const GridFunction& f) { return max_value(f) - min_value(f); }

double lipschitz_estimate(const GridFunction& f) {
  const GridDomain& d = f.domain();
  const double h = d.spacing();
  double worst = 0.0;
  for (int i1 = 0; i1 < d.count(1); ++i1) {
    for (int i0 = 0; i0 < d.count(0); ++i0) {
      const double v = f.clamped(i0, i1);
      if (i0 + 1 < d.count(0)) worst = std::max(worst, std::abs(f.clamped(i0 + 1, i1) - v));
      if (d.dim() == 2 && i1 + 1 < d.count(1)) {
        worst = std::max(worst, std::abs(f.clamped(i0, i1 + 1) - v));
      }
    }
  }
  return worst / h;
}

namespace {

// Largest |f(y) - f(x)| over node pairs at lattice offset o.
double max_difference_at(const GridFunction& f, const Offset& o) {
  const GridDomain& d = f.domain();
  const int n0 = d.count(0);
  const int n1 = d.count(1);
  const int lo0 = std::max(0, -o[0]);
  const int hi0 = std::min(n0, n0 - o[0]);
  const int lo1 = std::max(0, -o[1]);
  const int hi1 = std::min(n1, n1 - o[1]);
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (int i1 = lo1; i1 < hi1; ++i1) {
    for (int i0 = lo0; i0 < hi0; ++i0) {
      const double diff = std::abs(f.clamped(i0 + o[0], i1 + o[1]) - f.clamped(i0, i1));
      worst = std::max(worst, diff);
    }
  }
  return worst;
}

}  // namespace

double inverse_modulus(const GridFunction& f, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("inverse_modulus: eps must be > 0");
  const GridDomain& d = f.domain();
  const double h = d.spacing();
  const double cap = d.half_diameter();
  const int max_ring = static_cast<int>(std::floor(cap / h + 1e-9));
  // Ring m holds the offsets with norm in ((m-1) h, m h]; one per
  // unordered pair of directions.
  for (int m = 1; m <= max_ring; ++m) {
    const double r_hi = static_cast<double>(m) * m;
    const double r_lo = static_cast<double>(m - 1) * (m - 1);
    const int k1_max = d.dim() == 2 ? m : 0;
    for (int k1 = 0; k1 <= k1_max; ++k1) {
      for (int k0 = (k1 == 0 ? 1 : -m); k0 <= m; ++k0) {
        const double r2 = static_cast<double>(k0) * k0 + static_cast<double>(k1) * k1;
        if (r2 <= r_lo || r2 > r_hi) continue;
        if (std::abs(k0) >= d.count(0) || k1 >= d.count(1)) continue;
        if (max_difference_at(f, {k0, k1}) > eps) return (m - 1) * h;
      }
    }
  }
  return std::min(cap, max_ring * h);
}

std::vector<std::size_t> common_trusted_nodes(const GridFunction& f, const GridFunction& g) {
  if (!(f.domain() == g.domain())) {
    throw InvalidArgument("grid functions live on different domains");
  }
  const GridFunction& tighter = f.trusted_radius() <= g.trusted_radius() ? f : g;
  return tighter.trusted_nodes();
}

double sup_difference(const GridFunction& f, const GridFunction& g) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i : common_trusted_nodes(f, g)) best = std::max(best, f[i] - g[i]);
  return best;
}

double max_abs_difference(const GridFunction& f, const GridFunction& g) {
  double best = 0.0;
  for (std::size_t i : common_trusted_nodes(f, g)) best = std::max(best, std::abs(f[i] - g[i]));
  return best;
}

void write_csv(const GridFunction& f, std::ostream& os) {
  const GridDomain& d = f.domain();
  os << (d.dim() == 1 ? "x0,value\n" : "x0,x1,value\n");
  os.precision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point x = d.node(i);
    os << x[0];
    if (d.dim() == 2) os << ',' << x[1];
    os << ',' << f[i] << '\n';
  }
}

GridFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("csv: empty input");
  int dim = 0;
  if (line.rfind("x0,value", 0) == 0) {
    dim = 1;
  } else if (line.rfind("x0,x1,value", 0) == 0) {
    dim = 2;
  } else {
    throw InvalidArgument("csv: header must be \"x0,value\" or \"x0,x1,value\"");
  }
  std::vector<Point> xs;
  std::vector<double> vals;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidArgument("csv: cannot parse \"" + cell + "\"");
      }
    }
    if (static_cast<int>(row.size()) != dim + 1) throw InvalidArgument("csv: wrong column count");
    xs.push_back({row[0], dim == 2 ? row[1] : 0.0});
    vals.push_back(row.back());
  }
  if (vals.empty()) throw InvalidArgument("csv: no data rows");
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
  std::array<int, 2> counts{1, 1};
  for (int a = 0; a < dim; ++a) {
    std::set<double> distinct;
    for (const Point& x : xs) distinct.insert(x[a]);
    lo[a] = *distinct.begin();
    hi[a] = *distinct.rbegin();
    counts[a] = static_cast<int>(distinct.size());
  }
  GridDomain domain(dim, lo, hi, counts);
  if (domain.size() != vals.size()) throw InvalidArgument("csv: rows do not form a full grid");
  std::vector<double> ordered(vals.size());
  for (std::size_t r = 0; r < vals.size(); ++r) {
    ordered[domain.nearest_node(xs[r])] = vals[r];
  }
  return GridFunction(domain, std::move(ordered));
}

}  // namespace hlx
