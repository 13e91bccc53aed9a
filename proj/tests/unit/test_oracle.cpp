#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <hlx/errors.hpp>
#include <hlx/oracle.hpp>

#include "support.hpp"

using namespace hlx;
using hlx::test::kPi;

namespace {

const CostFunction kQuad = CostFunction::quadratic(0.5);

DiscreteMeasure random_measure(std::mt19937_64& rng, std::size_t atoms) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0), w(0.05, 1.0);
  DiscreteMeasure m;
  double total = 0.0;
  for (std::size_t i = 0; i < atoms; ++i) {
    m.support.push_back({pos(rng), pos(rng)});
    m.weights.push_back(w(rng));
    total += m.weights.back();
  }
  for (double& x : m.weights) x /= total;
  double drift = 1.0;
  for (std::size_t i = 0; i + 1 < atoms; ++i) drift -= m.weights[i];
  m.weights.back() = drift;
  return m;
}

}  // namespace

TEST_CASE("hopf-cole examples") {
  const auto d = test::line(-4 * kPi, 4 * kPi, 0.01);
  const auto seven = GridFunction::sample(d, [](const Point&) { return 7.0; });
  const auto v = hopf_cole(seven, 1.0);
  for (std::size_t i : v.trusted_nodes()) CHECK(std::abs(v[i] - 7.0) <= 1e-12);

  const auto f = test::cosine(d);
  const double at0 = hopf_cole_at(f, 1.0, 0.0);
  CHECK(std::abs(at0 - 0.688) <= 0.002);
  CHECK(std::abs(hopf_cole_formula([](double x) { return std::cos(x); }, 1.0, 0.0) - 0.6875695550555) <= 1e-9);
  CHECK(hopf_cole_error_estimate(f, 1.0) <= 1e-6);
  CHECK(v.trusted_radius() == doctest::Approx(d.half_width() - 8.0));
  CHECK(is_hopf_cole_benchmark(kQuad, KernelModel::gaussian(1, {0, 0}, {1, 0})));
  CHECK_FALSE(is_hopf_cole_benchmark(kQuad, KernelModel::gaussian(1, {0, 0}, {2, 0})));
  CHECK_FALSE(is_hopf_cole_benchmark(CostFunction::quadratic(1.0), KernelModel::gaussian(1, {0, 0}, {1, 0})));
}

TEST_CASE("hopf-cole is monotone") {
  std::mt19937_64 rng(71);
  const auto d = test::line(-12.0, 12.0, 0.05);
  for (int rep = 0; rep < 3; ++rep) {
    const auto f = test::random_smooth(rng, d);
    std::vector<double> bumped(f.values().begin(), f.values().end());
    std::uniform_real_distribution<double> u(0.0, 0.3);
    for (double& x : bumped) x += u(rng);
    const GridFunction g(d, bumped);
    const auto vf = hopf_cole(f, 0.5);
    const auto vg = hopf_cole(g, 0.5);
    for (std::size_t i : vf.trusted_nodes()) CHECK(vf[i] <= vg[i] + 1e-12);
  }
}

TEST_CASE("hopf-cole dynamic programming") {
  // The inner value is resampled on the grid, so the check also carries the
  // interpolation error of the piecewise-linear extension.
  const auto d = test::line(-4 * kPi, 4 * kPi, 0.005);
  const auto f = test::cosine(d);
  const auto inner = hopf_cole(f, 0.5);
  double curvature = 0.0;
  for (std::size_t i = 1; i + 1 < inner.size(); ++i) {
    curvature = std::max(curvature, std::abs(inner[i + 1] - 2 * inner[i] + inner[i - 1]));
  }
  const double tol = 2e-6 + curvature / 8;
  for (double x : {-1.0, 0.0, 0.7, 2.0}) {
    CHECK(std::abs(hopf_cole_at(inner, 0.5, x) - hopf_cole_at(f, 1.0, x)) <= tol);
  }
}

TEST_CASE("transport examples") {
  const DiscreteMeasure delta0{{{0.0, 0.0}}, {1.0}};
  const DiscreteMeasure deltaz{{{1.5, 0.0}}, {1.0}};
  CHECK(ot_value(kQuad, delta0, deltaz) == doctest::Approx(kQuad.eval({1.5, 0.0})));
  const DiscreteMeasure mu{{{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}};
  const DiscreteMeasure nu{{{1.0, 0.0}, {2.0, 0.0}}, {0.5, 0.5}};
  CHECK(ot_value(kQuad, mu, mu) == 0.0);
  const auto sol = solve_transport(kQuad, mu, nu);
  CHECK(sol.value == doctest::Approx(0.5));
  CHECK(sol.coupling.is_coupling_of(mu, nu, 1e-12));
  CHECK(sol.coupling.at(0, 0) == doctest::Approx(0.5));
  CHECK(sol.coupling.at(1, 1) == doctest::Approx(0.5));

  // ball of radius 0.5 cannot reach
  CHECK(ot_value(CostFunction::ball_indicator(0.5), delta0, deltaz) == kInfinity);
  DiscreteMeasure bad{{{0.0, 0.0}}, {0.9}};
  CHECK_THROWS_AS(ot_value(kQuad, bad, mu), InvalidArgument);
}

TEST_CASE("transport properties on random measures") {
  std::mt19937_64 rng(73);
  for (int rep = 0; rep < 30; ++rep) {
    const auto mu = random_measure(rng, 1 + rep % 6);
    const auto nu = random_measure(rng, 1 + (rep / 2) % 6);
    const auto sol = solve_transport(kQuad, mu, nu);
    CHECK(sol.coupling.is_coupling_of(mu, nu, 1e-12));
    CHECK(ot_value(kQuad, mu, mu) <= 1e-15);

    // the independent coupling is feasible, so it bounds the optimum
    double independent = 0.0;
    for (std::size_t i = 0; i < mu.support.size(); ++i) {
      for (std::size_t j = 0; j < nu.support.size(); ++j) {
        const Point a{nu.support[j][0] - mu.support[i][0], nu.support[j][1] - mu.support[i][1]};
        independent += mu.weights[i] * nu.weights[j] * kQuad.eval(a);
      }
    }
    CHECK(sol.value <= independent + 1e-12);

    auto reflect = [](DiscreteMeasure m) {
      for (Point& p : m.support) p = {-p[0], -p[1]};
      return m;
    };
    CHECK(ot_value(kQuad, reflect(mu), reflect(nu)) == doctest::Approx(sol.value).epsilon(1e-12));

    DiscreteMeasure moved = mu;
    double by_map = 0.0;
    std::uniform_real_distribution<double> step(-1.0, 1.0);
    for (std::size_t i = 0; i < mu.support.size(); ++i) {
      const Point a{step(rng), step(rng)};
      moved.support[i] = {mu.support[i][0] + a[0], mu.support[i][1] + a[1]};
      by_map += mu.weights[i] * kQuad.eval(a);
    }
    CHECK(ot_value(kQuad, mu, moved) <= by_map + 1e-12);
  }
}

TEST_CASE("ot representation examples") {
  const auto d = test::line(-4.0, 4.0, 0.05);
  const auto f = test::cosine(d);
  const std::size_t mid = d.size() / 2 + 7;

  const auto single = discretize(KernelModel::dirac(1), 1.0, 0.05);
  const auto r1 = verify_ot_representation(f, mid, single, kQuad, 0.5);
  CHECK(r1.holds);
  CHECK(r1.lhs == doctest::Approx(apply_hopf_lax(f, make_hopf_lax_step(kQuad, 0.5, f))[mid]));

  const DiscreteKernel two{1, 0.05, {{-4, 0}, {6, 0}}, {0.5, 0.5}, 0.3, 0.0};
  const auto r2 = verify_ot_representation(f, mid, two, kQuad, 0.5);
  CHECK(r2.holds);
  CHECK(r2.transport_checked);
  CHECK(std::abs(r2.lhs - r2.rhs_transport) <= r2.tolerance);

  const auto r3 = verify_ot_representation(f, mid, two, CostFunction::dirac_indicator(), 0.5);
  CHECK(r3.maps == 1u);
  CHECK(r3.lhs == doctest::Approx(0.5 * (f[mid - 4] + f[mid + 6])));
  CHECK(r3.rhs_maps == doctest::Approx(r3.lhs));

  CHECK_THROWS_AS(verify_ot_representation(f, mid, two, kQuad, 0.5, 100), EnumerationBudgetExceeded);
}

TEST_CASE("monte carlo examples") {
  const auto d = test::line(-4.0, 4.0, 0.01);
  const auto f = test::cosine(d);
  const Point x0{0.3, 0.0};
  const auto zero = PolicyField::zero(d, 1.0, 4, kQuad);
  const auto est = simulate_policy(zero, KernelModel::dirac(1), f, x0, 1000, 5);
  CHECK(est.mean == f.value_at(x0));
  CHECK(est.std_error == 0.0);
  CHECK(est.excursion_fraction == 0.0);

  SchemeConfig cfg;
  cfg.t = 1.0;
  cfg.n = 1;
  cfg.order = Order::J;
  cfg.cost = kQuad;
  cfg.kernel = KernelModel::dirac(1);
  cfg.record_policy = true;
  const auto report = iterate(f, cfg);
  const std::size_t node = d.nearest_node({2.0, 0.0});
  const auto det = simulate_policy(PolicyField::from_report(report, kQuad), cfg.kernel, f, d.node(node), 1000, 5);
  CHECK(std::abs(det.mean - report.iterate[node]) <= d.spacing() * lipschitz_estimate(f));

  CHECK_THROWS_AS(simulate_policy(zero, KernelModel::dirac(1), f, x0, 999, 5), InvalidArgument);
  cfg.order = Order::I;
  CHECK_THROWS_AS(PolicyField::from_report(iterate(f, cfg), kQuad), InvalidArgument);
}

TEST_CASE("monte carlo is reproducible and bounded by the I iterate") {
  const auto d = test::line(-4 * kPi, 4 * kPi, 0.02);
  const auto f = test::cosine(d);
  SchemeConfig cfg = test::benchmark(4);
  cfg.record_policy = true;
  const auto run = iterate_both(f, cfg);
  const auto policy = PolicyField::from_report(run.lower, cfg.cost);
  const double tol = discretization_tolerance(f, 4.0);
  const auto zero = PolicyField::zero(d, 1.0, 4, cfg.cost);
  for (double x : {-1.0, 0.5}) {
    const std::size_t node = d.nearest_node({x, 0.0});
    const auto a = simulate_policy(policy, cfg.kernel, f, d.node(node), 20'000, 11);
    const auto b = simulate_policy(policy, cfg.kernel, f, d.node(node), 20'000, 11);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.mean <= run.upper.iterate[node] + 3 * a.std_error + tol);
    const auto z = simulate_policy(zero, cfg.kernel, f, d.node(node), 20'000, 11);
    CHECK(z.mean <= run.upper.iterate[node] + 3 * z.std_error + tol);
  }
}

TEST_CASE("pairwise summation") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}
