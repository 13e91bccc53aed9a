#include "hlx/oracle.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <variant>

#include "hlx/errors.hpp"

namespace hlx {

namespace {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

template <unsigned N>
GaussRule legendre_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  GaussRule r;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.nodes.push_back(x[i]);
    r.weights.push_back(w[i]);
    if (x[i] != 0.0) {
      r.nodes.push_back(-x[i]);
      r.weights.push_back(w[i]);
    }
  }
  return r;
}

const GaussRule& rule_for(int points) {
  static const GaussRule r4 = legendre_rule<4>();
  static const GaussRule r8 = legendre_rule<8>();
  static const GaussRule r10 = legendre_rule<10>();
  switch (points) {
    case 4:
      return r4;
    case 8:
      return r8;
    case 10:
      return r10;
    default:
      throw InvalidArgument("hopf_cole: supported Gauss rules have 4, 8 or 10 points");
  }
}

constexpr double kHopfColeWidth = 8.0;

double gaussian_density(double z, double t) {
  return std::exp(-0.5 * z * z / t) / std::sqrt(2.0 * std::numbers::pi * t);
}

}  // namespace

bool is_hopf_cole_benchmark(const CostFunction& cost, const KernelModel& kernel) {
  if (kernel.dim() != 1 || kernel.components().size() != 1) return false;
  if (cost.kind() != CostKind::Quadratic || cost.kappa() != 0.5 || cost.scale() != 1.0) {
    return false;
  }
  const auto* g = std::get_if<GaussianComponent>(&kernel.components().front());
  return g != nullptr && g->drift[0] == 0.0 && g->sigma2[0] == 1.0;
}

double hopf_cole_at(const GridFunction& f, double t, double x, int gauss_points) {
  if (f.domain().dim() != 1) throw InvalidArgument("hopf_cole: one-dimensional grids only");
  if (!(t > 0.0)) throw InvalidArgument("hopf_cole: t must be > 0");
  const GaussRule& rule = rule_for(gauss_points);
  const double h = f.domain().spacing();
  const double lower = f.domain().lower()[0];
  const double width = kHopfColeWidth * std::sqrt(t);
  const double a = x - width;
  const double b = x + width;
  const double shift = max_value(f);

  // Breakpoints at the (virtual, beyond the box) grid nodes inside (a, b).
  const auto k_first = static_cast<long>(std::floor((a - lower) / h)) + 1;
  const auto k_last = static_cast<long>(std::ceil((b - lower) / h)) - 1;
  double acc = 0.0;
  double left = a;
  for (long k = k_first; k <= k_last + 1; ++k) {
    const double right = k <= k_last ? std::min(b, lower + k * h) : b;
    if (right <= left) continue;
    const double mid = 0.5 * (left + right);
    const double half = 0.5 * (right - left);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double y = mid + half * rule.nodes[q];
      acc += half * rule.weights[q] * std::exp(f.value_at({y, 0.0}) - shift) *
             gaussian_density(y - x, t);
    }
    left = right;
  }
  return shift + std::log(acc);
}

GridFunction hopf_cole(const GridFunction& f, double t, int gauss_points) {
  if (f.domain().dim() != 1) throw InvalidArgument("hopf_cole: one-dimensional grids only");
  std::vector<double> out(f.size());
  const auto n = static_cast<std::ptrdiff_t>(f.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        hopf_cole_at(f, t, f.domain().node(static_cast<std::size_t>(i))[0], gauss_points);
  }
  return GridFunction(f.domain(), std::move(out),
                      f.trusted_radius() - kHopfColeWidth * std::sqrt(t));
}

double hopf_cole_error_estimate(const GridFunction& f, double t) {
  const auto nodes = f.trusted_nodes();
  if (nodes.empty()) return 0.0;
  double worst = 0.0;
  const std::size_t samples = std::min<std::size_t>(9, nodes.size());
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t idx = nodes[s * (nodes.size() - 1) / std::max<std::size_t>(1, samples - 1)];
    const double x = f.domain().node(idx)[0];
    worst = std::max(worst, std::abs(hopf_cole_at(f, t, x, 4) - hopf_cole_at(f, t, x, 8)));
  }
  return worst;
}

double hopf_cole_formula(const std::function<double(double)>& f, double t, double x) {
  if (!(t > 0.0)) throw InvalidArgument("hopf_cole: t must be > 0");
  const GaussRule& rule = rule_for(10);
  const double width = 10.0 * std::sqrt(t);
  const int panels = std::max(64, static_cast<int>(std::ceil(2.0 * width / 0.05)));
  const double len = 2.0 * width / panels;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(panels) * rule.nodes.size());
  double shift = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> samples;  // (f value, weight * density)
  for (int p = 0; p < panels; ++p) {
    const double mid = x - width + (p + 0.5) * len;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double y = mid + 0.5 * len * rule.nodes[q];
      const double fy = f(y);
      shift = std::max(shift, fy);
      samples.emplace_back(fy, 0.5 * len * rule.weights[q] * gaussian_density(y - x, t));
    }
  }
  for (const auto& [fy, w] : samples) terms.push_back(w * std::exp(fy - shift));
  return shift + std::log(pairwise_sum(terms));
}

// ---------------------------------------------------------------------------

void DiscreteMeasure::validate() const {
  if (support.empty() || support.size() != weights.size()) {
    throw InvalidArgument("discrete measure: need one weight per support point");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("discrete measure: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("discrete measure: weights must sum to 1");
}

bool Coupling::is_coupling_of(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              double tol) const {
  if (rows != mu.weights.size() || cols != nu.weights.size()) return false;
  for (double p : plan) {
    if (p < -tol) return false;
  }
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += at(i, j);
    if (std::abs(s - mu.weights[i]) > tol) return false;
  }
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += at(i, j);
    if (std::abs(s - nu.weights[j]) > tol) return false;
  }
  return true;
}

namespace {

struct FlowEdge {
  int to;
  int rev;
  double cap;
  double cost;
};

class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : graph_(static_cast<std::size_t>(n)) {}

  int add_edge(int u, int v, double cap, double cost) {
    graph_[u].push_back({v, static_cast<int>(graph_[v].size()), cap, cost});
    graph_[v].push_back({u, static_cast<int>(graph_[u].size()) - 1, 0.0, -cost});
    return static_cast<int>(graph_[u].size()) - 1;
  }

  // Pushes up to `demand` units from s to t along successive shortest paths.
  double run(int s, int t, double demand) {
    constexpr double kCapEps = 1e-15;
    const auto n = graph_.size();
    double flow = 0.0;
    for (std::size_t iter = 0; iter < 64 * n * n && flow < demand - 1e-14; ++iter) {
      std::vector<double> dist(n, std::numeric_limits<double>::infinity());
      std::vector<int> prev_node(n, -1);
      std::vector<int> prev_edge(n, -1);
      dist[static_cast<std::size_t>(s)] = 0.0;
      for (std::size_t round = 0; round + 1 < n; ++round) {
        bool changed = false;
        for (std::size_t u = 0; u < n; ++u) {
          if (!std::isfinite(dist[u])) continue;
          for (std::size_t e = 0; e < graph_[u].size(); ++e) {
            const FlowEdge& ed = graph_[u][e];
            if (ed.cap <= kCapEps) continue;
            const double nd = dist[u] + ed.cost;
            if (nd < dist[static_cast<std::size_t>(ed.to)] - 1e-15) {
              dist[static_cast<std::size_t>(ed.to)] = nd;
              prev_node[static_cast<std::size_t>(ed.to)] = static_cast<int>(u);
              prev_edge[static_cast<std::size_t>(ed.to)] = static_cast<int>(e);
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (!std::isfinite(dist[static_cast<std::size_t>(t)])) break;
      double push = demand - flow;
      for (int v = t; v != s; v = prev_node[static_cast<std::size_t>(v)]) {
        const auto u = static_cast<std::size_t>(prev_node[static_cast<std::size_t>(v)]);
        push = std::min(push, graph_[u][static_cast<std::size_t>(prev_edge[static_cast<std::size_t>(v)])].cap);
      }
      if (push <= kCapEps) break;
      for (int v = t; v != s; v = prev_node[static_cast<std::size_t>(v)]) {
        const auto u = static_cast<std::size_t>(prev_node[static_cast<std::size_t>(v)]);
        FlowEdge& ed = graph_[u][static_cast<std::size_t>(prev_edge[static_cast<std::size_t>(v)])];
        ed.cap -= push;
        graph_[static_cast<std::size_t>(ed.to)][static_cast<std::size_t>(ed.rev)].cap += push;
      }
      flow += push;
    }
    return flow;
  }

  const FlowEdge& edge(int u, int idx) const {
    return graph_[static_cast<std::size_t>(u)][static_cast<std::size_t>(idx)];
  }

 private:
  std::vector<std::vector<FlowEdge>> graph_;
};

}  // namespace

TransportSolution solve_transport(const CostFunction& cost, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu) {
  mu.validate();
  nu.validate();
  const int m = static_cast<int>(mu.support.size());
  const int n = static_cast<int>(nu.support.size());
  const int source = 0;
  const int sink = m + n + 1;
  MinCostFlow g(m + n + 2);
  for (int i = 0; i < m; ++i) g.add_edge(source, 1 + i, mu.weights[static_cast<std::size_t>(i)], 0.0);
  for (int j = 0; j < n; ++j) g.add_edge(1 + m + j, sink, nu.weights[static_cast<std::size_t>(j)], 0.0);
  std::vector<std::vector<int>> handle(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(n), -1));
  std::vector<double> unit(static_cast<std::size_t>(m * n), 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const Point& y = mu.support[static_cast<std::size_t>(i)];
      const Point& z = nu.support[static_cast<std::size_t>(j)];
      const double c = cost.eval({z[0] - y[0], z[1] - y[1]});
      unit[static_cast<std::size_t>(i * n + j)] = c;
      if (std::isfinite(c)) handle[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = g.add_edge(1 + i, 1 + m + j, 2.0, c);
    }
  }
  const double flow = g.run(source, sink, 1.0);

  TransportSolution sol;
  sol.coupling.rows = static_cast<std::size_t>(m);
  sol.coupling.cols = static_cast<std::size_t>(n);
  sol.coupling.plan.assign(static_cast<std::size_t>(m * n), 0.0);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const int e = handle[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (e < 0) continue;
      const double shipped = 2.0 - g.edge(1 + i, e).cap;
      sol.coupling.plan[static_cast<std::size_t>(i * n + j)] = shipped;
      total += shipped * unit[static_cast<std::size_t>(i * n + j)];
    }
  }
  sol.value = flow < 1.0 - 1e-9 ? kInfinity : std::max(0.0, total);
  return sol;
}

double ot_value(const CostFunction& cost, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return solve_transport(cost, mu, nu).value;
}

OtRepresentation verify_ot_representation(const GridFunction& f, std::size_t x_index,
                                          const DiscreteKernel& kernel, const CostFunction& cost,
                                          double t, std::size_t map_budget,
                                          std::size_t transport_budget, double tol_constant) {
  const GridDomain& d = f.domain();
  if (x_index >= f.size()) throw InvalidArgument("verify_ot_representation: node out of range");
  const double h = d.spacing();
  const CostFunction step_cost = cost.rescale(t);
  const HopfLaxStep step = make_hopf_lax_step(cost, t, f);

  std::vector<Offset> moves;
  std::vector<double> move_cost;
  const int k = static_cast<int>(std::floor(step.radius / h + 1e-9));
  const int k1 = d.dim() == 2 ? k : 0;
  for (int b = -k1; b <= k1; ++b) {
    for (int a = -k; a <= k; ++a) {
      const Offset o{a, b};
      if (norm(o, h) > step.radius * (1.0 + 1e-12) + 1e-12 * h) continue;
      const double c = step_cost.eval_radial(norm(o, h));
      if (!std::isfinite(c)) continue;
      moves.push_back(o);
      move_cost.push_back(c);
    }
  }
  const std::size_t atoms = kernel.offsets.size();
  double count = 1.0;
  for (std::size_t j = 0; j < atoms; ++j) count *= static_cast<double>(moves.size());
  if (count > static_cast<double>(map_budget)) {
    throw EnumerationBudgetExceeded("enumeration budget exceeded: " + std::to_string(count) +
                                    " offset maps");
  }

  OtRepresentation out;
  out.lhs = i_step(f, cost, t, kernel)[x_index];
  out.tolerance = tol_constant * h * lipschitz_estimate(f);
  out.maps = static_cast<std::size_t>(count);
  out.transport_checked = out.maps <= transport_budget;

  const auto xc = d.coords(x_index);
  // landing[j][m] = f(x + y_j + a_m)
  std::vector<std::vector<double>> landing(atoms, std::vector<double>(moves.size()));
  for (std::size_t j = 0; j < atoms; ++j) {
    for (std::size_t m = 0; m < moves.size(); ++m) {
      landing[j][m] = f.clamped(xc[0] + kernel.offsets[j][0] + moves[m][0],
                                xc[1] + kernel.offsets[j][1] + moves[m][1]);
    }
  }
  DiscreteMeasure mu;
  for (std::size_t j = 0; j < atoms; ++j) {
    mu.support.push_back({kernel.offsets[j][0] * h, kernel.offsets[j][1] * h});
    mu.weights.push_back(kernel.weights[j]);
  }
  DiscreteMeasure nu = mu;

  out.rhs_maps = -kInfinity;
  out.rhs_transport = -kInfinity;
  std::vector<std::size_t> choice(atoms, 0);
  for (std::size_t visited = 0; visited < out.maps; ++visited) {
    double by_map = 0.0;
    double nu_f = 0.0;
    for (std::size_t j = 0; j < atoms; ++j) {
      const std::size_t m = choice[j];
      by_map += kernel.weights[j] * (landing[j][m] - move_cost[m]);
      nu_f += kernel.weights[j] * landing[j][m];
    }
    out.rhs_maps = std::max(out.rhs_maps, by_map);
    if (out.transport_checked) {
      for (std::size_t j = 0; j < atoms; ++j) {
        nu.support[j] = {(kernel.offsets[j][0] + moves[choice[j]][0]) * h,
                         (kernel.offsets[j][1] + moves[choice[j]][1]) * h};
      }
      out.rhs_transport = std::max(out.rhs_transport, nu_f - ot_value(step_cost, mu, nu));
    }
    for (std::size_t j = 0; j < atoms; ++j) {
      if (++choice[j] < moves.size()) break;
      choice[j] = 0;
    }
  }
  out.holds = std::abs(out.lhs - out.rhs_maps) <= out.tolerance &&
              (!out.transport_checked || std::abs(out.lhs - out.rhs_transport) <= out.tolerance);
  return out;
}

// ---------------------------------------------------------------------------

PolicyField PolicyField::from_report(const IterationReport& report, const CostFunction& cost) {
  if (report.order != Order::J) {
    throw InvalidArgument("policy: only J iterations yield control-then-noise policies");
  }
  if (static_cast<int>(report.policy.size()) != report.n) {
    throw InvalidArgument("policy: the iteration was run without record_policy");
  }
  PolicyField p{report.iterate.domain(), report.t / report.n, cost, {}};
  p.fields.assign(report.policy.rbegin(), report.policy.rend());
  return p;
}

PolicyField PolicyField::zero(const GridDomain& domain, double t, int n, const CostFunction& cost) {
  PolicyField p{domain, t / n, cost, {}};
  p.fields.assign(static_cast<std::size_t>(n), ArgmaxField(domain.size(), Offset{0, 0}));
  return p;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

MonteCarloEstimate simulate_policy(const PolicyField& policy, const KernelModel& model,
                                   const GridFunction& f, const Point& x0, std::size_t paths,
                                   std::uint64_t seed) {
  if (paths < 1000) throw InvalidArgument("simulate_policy: need at least 1000 paths");
  if (!(f.domain() == policy.domain)) throw InvalidArgument("simulate_policy: domain mismatch");
  const GridDomain& d = policy.domain;
  const double h = d.spacing();
  const CostFunction step_cost = policy.cost.rescale(policy.dt);
  std::vector<double> payoff(paths);
  std::vector<unsigned char> escaped(paths, 0);
  const auto n_paths = static_cast<std::ptrdiff_t>(paths);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n_paths; ++p) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(p));
    Point x = x0;
    double reward = 0.0;
    for (const ArgmaxField& field : policy.fields) {
      const Offset o = field[d.nearest_node(x)];
      const Point a{o[0] * h, o[1] * h};
      reward -= step_cost.eval(a);
      const Point y = sample_increment(model, policy.dt, rng);
      for (int ax = 0; ax < d.dim(); ++ax) {
        x[ax] += a[ax] + y[ax];
        if (x[ax] < d.lower()[ax] || x[ax] > d.upper()[ax]) {
          escaped[static_cast<std::size_t>(p)] = 1;
          x[ax] = std::clamp(x[ax], d.lower()[ax], d.upper()[ax]);
        }
      }
    }
    payoff[static_cast<std::size_t>(p)] = reward + f.value_at(x);
  }
  // Centering on the first path makes identical payoffs average exactly.
  const double pivot = payoff.front();
  std::vector<double> centered(paths);
  for (std::size_t i = 0; i < paths; ++i) centered[i] = payoff[i] - pivot;
  const double mean_dev = pairwise_sum(centered) / static_cast<double>(paths);
  for (std::size_t i = 0; i < paths; ++i) {
    const double e = centered[i] - mean_dev;
    centered[i] = e * e;
  }
  const double var = pairwise_sum(centered) / static_cast<double>(paths - 1);
  std::size_t escapes = 0;
  for (unsigned char e : escaped) escapes += e;

  MonteCarloEstimate est;
  est.mean = pivot + mean_dev;
  est.std_error = std::sqrt(var / static_cast<double>(paths));
  est.excursion_fraction = static_cast<double>(escapes) / static_cast<double>(paths);
  est.paths = paths;
  return est;
}

}  // namespace hlx
