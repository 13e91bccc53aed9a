#include "hlx_app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include <hlx/errors.hpp>
#include <hlx/oracle.hpp>
#include <hlx/scheme.hpp>

#include "hlx_app/config.hpp"

namespace hlx::app {

using nlohmann::json;

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

struct Session {
  RunConfig cfg;
  GridFunction f;       // the datum as configured
  GridFunction work;    // what the supremal operators act on (-f in infimal mode)
  bool infimal = false;
  double tol = 0.0;
};

Session open_session(const std::filesystem::path& config, const CommandOptions& opts) {
  RunConfig cfg = load_config(config);
  if (opts.eps) {
    if (!(*opts.eps > 0.0)) throw ConfigError("eps", "must be > 0");
    cfg.eps = opts.eps;
  }
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out) cfg.output = *opts.out;
  GridFunction f = build_datum(cfg);
  GridFunction work = opts.infimal ? f.negated() : f;
  const double tol = discretization_tolerance(f, cfg.numerics.tol_constant);
  return Session{std::move(cfg), std::move(f), std::move(work), opts.infimal, tol};
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainTooSmall& e) {
    err << "domain too small: " << e.what() << '\n';
    return kExitDomain;
  } catch (const GridTooCoarse& e) {
    err << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string to_csv(const GridFunction& g) {
  std::ostringstream os;
  write_csv(g, os);
  return os.str();
}

std::string steps_csv(const IterationReport& r) {
  std::ostringstream os;
  os << std::setprecision(17) << "step,sup,inf,lip,trusted_radius,gap_bound\n";
  for (const StepRecord& s : r.steps) {
    os << s.step << ',' << s.sup << ',' << s.inf << ',' << s.lip << ',' << s.trusted_radius << ','
       << s.gap_bound << '\n';
  }
  return os.str();
}

// Maps a report computed on -f back to the infimal operator applied to f.
IterationReport as_infimal(IterationReport r) {
  r.iterate = r.iterate.negated();
  for (StepRecord& s : r.steps) {
    const double sup = s.sup;
    s.sup = -s.inf;
    s.inf = -sup;
  }
  return r;
}

struct OrderRuns {
  std::optional<IterationReport> i;
  std::optional<IterationReport> j;
  double measured_gap = std::numeric_limits<double>::quiet_NaN();
  double gap_bound = 0.0;
};

OrderRuns run_orders(const Session& s, int n, OrderChoice choice, bool record_policy = false) {
  OrderRuns out;
  SchemeConfig sc = s.cfg.scheme(n, Order::I);
  sc.record_policy = record_policy;
  out.gap_bound = gap_bound(s.work, sc);
  if (choice == OrderChoice::Both) {
    SandwichRun run = iterate_both(s.work, sc);
    out.measured_gap = run.measured_gap;
    out.i = std::move(run.upper);
    out.j = std::move(run.lower);
  } else if (choice == OrderChoice::I) {
    out.i = iterate(s.work, sc);
  } else {
    sc.order = Order::J;
    out.j = iterate(s.work, sc);
  }
  if (s.infimal) {
    if (out.i) out.i = as_infimal(std::move(*out.i));
    if (out.j) out.j = as_infimal(std::move(*out.j));
  }
  return out;
}

std::size_t center_node(const GridDomain& d) { return d.nearest_node(d.center()); }

// Nodes spread evenly over the common trusted region of a and b.
std::vector<std::size_t> sample_nodes(const GridFunction& a, const GridFunction& b, int count) {
  const auto nodes = common_trusted_nodes(a, b);
  std::vector<std::size_t> out;
  if (nodes.empty() || count <= 0) return out;
  for (int k = 0; k < count; ++k) {
    const auto pos = static_cast<std::size_t>((k + 1) * static_cast<double>(nodes.size() - 1) / (count + 1));
    out.push_back(nodes[pos]);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool kernel_is_stochastic(const KernelModel& k) {
  return std::any_of(k.components().begin(), k.components().end(), [](const KernelComponent& c) {
    return !std::holds_alternative<DiracComponent>(c);
  });
}

struct OracleBlock {
  double hopf_cole_value = std::numeric_limits<double>::quiet_NaN();
  double mc_mean = std::numeric_limits<double>::quiet_NaN();
  double mc_std_error = std::numeric_limits<double>::quiet_NaN();
  double excursion_fraction = std::numeric_limits<double>::quiet_NaN();

  json to_json() const {
    return {{"hopf_cole_value", number_or_null(hopf_cole_value)},
            {"mc_mean", number_or_null(mc_mean)},
            {"mc_std_error", number_or_null(mc_std_error)},
            {"excursion_fraction", number_or_null(excursion_fraction)}};
  }
};

bool hopf_cole_applies(const Session& s) {
  return s.f.domain().dim() == 1 && is_hopf_cole_benchmark(s.cfg.cost, s.cfg.kernel);
}

double oracle_value_at(const Session& s, double x) {
  const double v = hopf_cole_at(s.work, s.cfg.t, x);
  return s.infimal ? -v : v;
}

// J policy at n evaluated from x0 by Monte Carlo; only for the supremal problem.
MonteCarloEstimate monte_carlo(const Session& s, const IterationReport& j_with_policy, const Point& x0) {
  const PolicyField policy = PolicyField::from_report(j_with_policy, s.cfg.cost);
  return simulate_policy(policy, s.cfg.kernel, s.f, x0, s.cfg.numerics.mc_paths, s.cfg.seed);
}

bool monte_carlo_applies(const Session& s) {
  return !s.infimal && s.cfg.numerics.mc_paths > 0 && kernel_is_stochastic(s.cfg.kernel);
}

std::string order_tag(OrderChoice c) {
  return c == OrderChoice::I ? "I" : c == OrderChoice::J ? "J" : "both";
}

}  // namespace

int cmd_iterate(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const Session s = open_session(config, opts);
    const auto& dir = s.cfg.output;
    std::ostringstream conv;
    conv << std::setprecision(17) << "n,sup_J,inf_I,measured_gap,gap_bound\n";
    json runs = json::array();
    for (int n : s.cfg.n_list) {
      const OrderRuns r = run_orders(s, n, s.cfg.order);
      const std::string suffix = "_n" + std::to_string(n) + ".csv";
      if (s.cfg.order == OrderChoice::Both) {
        write_atomically(dir / ("iterate_I" + suffix), to_csv(r.i->iterate));
        write_atomically(dir / ("iterate_J" + suffix), to_csv(r.j->iterate));
      } else {
        write_atomically(dir / ("iterate" + suffix), to_csv((r.i ? r.i : r.j)->iterate));
      }
      if (r.i) write_atomically(dir / ("steps_I" + suffix), steps_csv(*r.i));
      if (r.j) write_atomically(dir / ("steps_J" + suffix), steps_csv(*r.j));

      auto cell = [](double v) {
        std::ostringstream c;
        c << std::setprecision(17);
        if (std::isfinite(v)) c << v;
        return c.str();
      };
      const double sup_j = r.j ? max_value(r.j->iterate) : std::nan("");
      const double inf_i = r.i ? min_value(r.i->iterate) : std::nan("");
      conv << n << ',' << cell(sup_j) << ',' << cell(inf_i) << ',' << cell(r.measured_gap) << ','
           << cell(r.gap_bound) << '\n';
      runs.push_back({{"n", n},
                      {"measured_gap", number_or_null(r.measured_gap)},
                      {"gap_bound", r.gap_bound},
                      {"sup_J", number_or_null(sup_j)},
                      {"inf_I", number_or_null(inf_i)}});
      out << "n=" << n << " gap_bound=" << r.gap_bound;
      if (std::isfinite(r.measured_gap)) out << " measured_gap=" << r.measured_gap;
      out << '\n';
    }
    write_atomically(dir / "convergence.csv", conv.str());

    OracleBlock oracle;
    const GridDomain& d = s.f.domain();
    if (hopf_cole_applies(s)) oracle.hopf_cole_value = oracle_value_at(s, d.center()[0]);
    const int n_max = s.cfg.n_list.back();
    if (monte_carlo_applies(s) && s.cfg.order != OrderChoice::I) {
      const OrderRuns rj = run_orders(s, n_max, OrderChoice::J, true);
      const MonteCarloEstimate mc = monte_carlo(s, *rj.j, d.node(center_node(d)));
      oracle.mc_mean = mc.mean;
      oracle.mc_std_error = mc.std_error;
      oracle.excursion_fraction = mc.excursion_fraction;
    }
    json guarantee = nullptr;
    if (s.cfg.eps) {
      try {
        guarantee = guarantee_n(s.work, *s.cfg.eps, s.cfg.scheme(1, Order::I));
      } catch (const GridTooCoarse&) {
        guarantee = "grid too coarse";
      }
    }
    const json& last = runs.back();
    json summary = {{"t", s.cfg.t},
                    {"n", n_max},
                    {"order", order_tag(s.cfg.order)},
                    {"infimal", s.infimal},
                    {"measured_gap", last["measured_gap"]},
                    {"gap_bound", last["gap_bound"]},
                    {"guarantee_n", guarantee},
                    {"tolerance", s.tol},
                    {"runs", runs},
                    {"oracle", oracle.to_json()}};
    write_atomically(dir / "summary.json", summary.dump(2) + "\n");
    return kExitOk;
  });
}

namespace {

struct Check {
  explicit Check(std::string n, bool ok = false, bool skip = false, std::string d = {})
      : name(std::move(n)), passed(ok), skipped(skip), detail(std::move(d)) {}

  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// lower - slack <= mid <= upper + slack on the common trusted region of the three.
Check sandwich_check(const std::string& name, const GridFunction& lower, const GridFunction& mid,
                     const GridFunction& upper, double slack) {
  Check c{name};
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t nodes = 0;
  for (std::size_t i = 0; i < mid.size(); ++i) {
    if (!lower.is_trusted(i) || !mid.is_trusted(i) || !upper.is_trusted(i)) continue;
    ++nodes;
    worst = std::max({worst, lower[i] - mid[i], mid[i] - upper[i]});
  }
  c.passed = nodes > 0 && worst <= slack;
  c.detail = nodes == 0 ? "empty trusted region"
                        : "max violation " + fmt(worst) + " vs slack " + fmt(slack) + " on " +
                              std::to_string(nodes) + " nodes";
  return c;
}

// a <= b + slack on the common trusted region.
Check below_check(const std::string& name, const GridFunction& a, const GridFunction& b, double slack) {
  Check c{name};
  const double worst = sup_difference(a, b);
  c.passed = std::isfinite(worst) && worst <= slack;
  c.detail = "sup difference " + fmt(worst) + " vs slack " + fmt(slack);
  return c;
}

}  // namespace

int cmd_verify(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const Session s = open_session(config, opts);
    const double tol = s.tol;
    std::vector<Check> checks;
    std::map<int, OrderRuns> runs;
    for (int n : s.cfg.n_list) runs.emplace(n, run_orders(s, n, OrderChoice::Both));

    // Upper and lower envelopes: I above J, or J-bar above I-bar in infimal mode.
    auto upper = [&](const OrderRuns& r) -> const GridFunction& { return s.infimal ? r.j->iterate : r.i->iterate; };
    auto lower = [&](const OrderRuns& r) -> const GridFunction& { return s.infimal ? r.i->iterate : r.j->iterate; };

    if (hopf_cole_applies(s)) {
      GridFunction v = hopf_cole(s.work, s.cfg.t);
      if (s.infimal) v = v.negated();
      for (const auto& [n, r] : runs) {
        checks.push_back(sandwich_check("sandwich_n" + std::to_string(n), lower(r), v, upper(r), 2.0 * tol));
      }
    } else {
      checks.emplace_back("sandwich", true, true, "no closed-form oracle for this configuration");
    }

    for (const auto& [n, r] : runs) {
      Check c{"gap_bound_n" + std::to_string(n)};
      const double gap = sup_difference(upper(r), lower(r));
      c.passed = gap <= r.gap_bound + 2.0 * tol;
      c.detail = "measured " + fmt(gap) + " vs bound " + fmt(r.gap_bound) + " + 2 tol";
      checks.push_back(c);
    }

    for (int n : s.cfg.n_list) {
      const KeyEstimate k = key_estimate_check(s.work, s.cfg.scheme(n, Order::I), n);
      checks.emplace_back("key_estimate_n" + std::to_string(n), k.holds, false,
                        "lhs " + fmt(k.lhs) + " vs rhs " + fmt(k.rhs) + " + 2 tol");
    }

    bool any_chain = false;
    for (const auto& [n, r] : runs) {
      const auto next = runs.find(2 * n);
      if (next == runs.end()) continue;
      any_chain = true;
      const std::string tag = std::to_string(n) + "_" + std::to_string(2 * n);
      // Halving the step lowers I and raises J; the infimal operators mirror this.
      const OrderRuns& fine = next->second;
      if (!s.infimal) {
        checks.push_back(below_check("doubling_J_" + tag, r.j->iterate, fine.j->iterate, 2.0 * tol));
        checks.push_back(below_check("doubling_I_" + tag, fine.i->iterate, r.i->iterate, 2.0 * tol));
      } else {
        checks.push_back(below_check("doubling_J_" + tag, fine.j->iterate, r.j->iterate, 2.0 * tol));
        checks.push_back(below_check("doubling_I_" + tag, r.i->iterate, fine.i->iterate, 2.0 * tol));
      }
    }
    if (!any_chain) checks.emplace_back("doubling", true, true, "n list has no doubling pairs");

    {
      const double dt = s.cfg.t / s.cfg.n_list.front();
      const DiscreteKernel kernel = discretize(s.cfg.kernel, dt, s.f.domain().spacing(), s.f.domain().half_width());
      if (kernel.offsets.size() > 6) {
        checks.emplace_back("ot_representation", true, true,
                          "kernel has " + std::to_string(kernel.offsets.size()) + " atoms (limit 6)");
      } else {
        const GridFunction probe = s.work.with_trusted_radius(s.work.trusted_radius() - kernel.truncation_radius);
        for (std::size_t idx : sample_nodes(probe, probe, s.cfg.numerics.ot_points)) {
          Check c{"ot_representation_node" + std::to_string(idx)};
          try {
            const OtRepresentation ot =
                verify_ot_representation(s.work, idx, kernel, s.cfg.cost, dt, s.cfg.numerics.ot_map_budget,
                                         s.cfg.numerics.ot_transport_budget, s.cfg.numerics.tol_constant);
            c.passed = ot.holds;
            c.detail = "lhs " + fmt(ot.lhs) + " rhs " + fmt(ot.rhs_maps) + " over " + std::to_string(ot.maps) + " maps";
          } catch (const EnumerationBudgetExceeded& e) {
            c.detail = e.what();
          }
          checks.push_back(c);
        }
      }
    }

    if (s.cfg.eps) {
      Check c{"guarantee"};
      try {
        const int n = guarantee_n(s.work, *s.cfg.eps, s.cfg.scheme(1, Order::I));
        const OrderRuns r = run_orders(s, n, OrderChoice::Both);
        const double gap = sup_difference(upper(r), lower(r));
        c.passed = gap <= *s.cfg.eps + 2.0 * tol;
        c.detail = "n = " + std::to_string(n) + ", measured gap " + fmt(gap) + " vs eps " + fmt(*s.cfg.eps);
      } catch (const GridTooCoarse&) {
        c.detail = "grid too coarse for eps = " + fmt(*s.cfg.eps);
      }
      checks.push_back(c);
    } else {
      checks.emplace_back("guarantee", true, true, "no eps given");
    }

    if (monte_carlo_applies(s)) {
      const int n = s.cfg.n_list.back();
      const OrderRuns rj = run_orders(s, n, OrderChoice::J, true);
      const OrderRuns& r = runs.at(n);
      for (std::size_t idx : sample_nodes(r.i->iterate, r.j->iterate, s.cfg.numerics.mc_points)) {
        const MonteCarloEstimate mc = monte_carlo(s, *rj.j, s.f.domain().node(idx));
        const double lo = r.j->iterate[idx] - 3.0 * mc.std_error - tol;
        const double hi = r.i->iterate[idx] + 3.0 * mc.std_error + tol;
        Check c{"monte_carlo_node" + std::to_string(idx)};
        c.passed = mc.mean >= lo && mc.mean <= hi && mc.excursion_fraction < 0.01;
        c.detail = "mean " + fmt(mc.mean) + " in [" + fmt(lo) + ", " + fmt(hi) + "], excursions " +
                   fmt(mc.excursion_fraction);
        checks.push_back(c);
      }
    } else {
      checks.emplace_back("monte_carlo", true, true, "not applicable");
    }

    bool all = true;
    json items = json::array();
    for (const Check& c : checks) {
      all = all && c.passed;
      const char* status = c.skipped ? "SKIP" : c.passed ? "PASS" : "FAIL";
      out << std::left << std::setw(6) << status << std::setw(34) << c.name << c.detail << '\n';
      items.push_back({{"name", c.name}, {"status", status}, {"detail", c.detail}});
    }
    json report = {{"passed", all}, {"infimal", s.infimal}, {"tolerance", tol}, {"checks", items}};
    write_atomically(s.cfg.output / "verify.json", report.dump(2) + "\n");
    return all ? kExitOk : kExitFailure;
  });
}

int cmd_guarantee(const std::filesystem::path& config, const CommandOptions& opts, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    const Session s = open_session(config, opts);
    if (!s.cfg.eps) throw ConfigError("eps", "missing (set it in the config or pass --eps)");
    const double eps = *s.cfg.eps;
    const int n = guarantee_n(s.work, eps, s.cfg.scheme(1, Order::I));
    const OrderRuns r = run_orders(s, n, OrderChoice::Both);
    const double gap = s.infimal ? sup_difference(r.j->iterate, r.i->iterate)
                                 : sup_difference(r.i->iterate, r.j->iterate);
    const bool ok = gap <= eps + 2.0 * s.tol;
    out << "guarantee_n " << n << '\n' << "measured_gap " << std::setprecision(10) << gap << '\n'
        << (ok ? "ok" : "FAILED") << ": measured_gap <= eps + 2 tol = " << eps + 2.0 * s.tol << '\n';
    json report = {{"eps", eps}, {"guarantee_n", n}, {"measured_gap", gap},
                   {"tolerance", s.tol}, {"passed", ok}};
    write_atomically(s.cfg.output / "guarantee.json", report.dump(2) + "\n");
    return ok ? kExitOk : kExitFailure;
  });
}

}  // namespace hlx::app
