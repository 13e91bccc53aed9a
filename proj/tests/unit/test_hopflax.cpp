#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include <hlx/hopflax.hpp>

#include "support.hpp"

using namespace hlx;
using hlx::test::kPi;

namespace {

const CostFunction kQuad = CostFunction::quadratic(0.5);

HopfLaxResult brute(const GridFunction& f, const CostFunction& c, double t) {
  return apply_bruteforce(f, make_hopf_lax_step(c, t, f));
}

GridFunction fast(const GridFunction& f, const CostFunction& c, double t) {
  return *apply_fast(f, make_hopf_lax_step(c, t, f));
}

bool same_bits(const GridFunction& a, const GridFunction& b) {
  return std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("dirac indicator cost is the identity") {
  const auto f = test::cosine(test::line(-3.0, 3.0, 0.05));
  const auto r = brute(f, CostFunction::dirac_indicator(), 1.0);
  CHECK(same_bits(r.value, f));
  for (const Offset& a : r.argmax) CHECK(a == Offset{0, 0});
  CHECK(same_bits(fast(f, CostFunction::dirac_indicator(), 1.0), f));
}

TEST_CASE("cosine examples") {
  const auto d = test::line(-4 * kPi, 4 * kPi, 0.01);
  const auto f = test::cosine(d);
  const auto r = brute(f, kQuad, 1.0);
  const std::size_t zero = d.nearest_node({0.0, 0.0});
  CHECK(r.value[zero] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.argmax[zero] == Offset{0, 0});
  // pi must be a node: next to it the maximizer moves by about (6 dx)^(1/3)
  const auto dp = test::line(-4 * kPi, 4 * kPi, kPi / 400);
  const std::size_t pi = dp.nearest_node({kPi, 0.0});
  REQUIRE(std::abs(dp.node(pi)[0] - kPi) < 1e-12);
  const auto rp = brute(test::cosine(dp), kQuad, 1.0);
  CHECK(rp.value[pi] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rp.argmax[pi] == Offset{0, 0});

  double gap = -kInfinity;
  for (std::size_t i : r.value.trusted_nodes()) gap = std::max(gap, r.value[i] - f[i]);
  CHECK(gap == doctest::Approx(0.46493).epsilon(1e-3));
  CHECK(gap <= kQuad.conjugate(1.0));
}

TEST_CASE("single-node bump gives a sampled parabolic cap") {
  const auto d = test::line(-3.0, 3.0, 0.05);
  const std::size_t c = d.nearest_node({0.4, 0.0});
  std::vector<double> v(d.size(), 0.0);
  v[c] = 1.0;
  const GridFunction f(d, v);
  const auto slow = brute(f, kQuad, 1.0).value;
  const auto quick = fast(f, kQuad, 1.0);
  const double x0 = d.node(c)[0];
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double dx = d.node(i)[0] - x0;
    CHECK(slow[i] == doctest::Approx(std::max(0.0, 1.0 - dx * dx / 2)).epsilon(1e-12));
  }
  CHECK(same_bits(slow, quick));
}

TEST_CASE("ties go to the smallest norm, then the smallest offset") {
  const auto d = test::line(-1.0, 1.0, 0.1);
  const std::size_t c = d.nearest_node({0.0, 0.0});
  std::vector<double> v(d.size(), 0.0);
  v[c - 3] = v[c + 3] = 1.0;
  const auto r = brute(GridFunction(d, v), kQuad, 1.0);
  CHECK(r.argmax[c] == Offset{-3, 0});
  const auto flat = brute(GridFunction::sample(d, [](const Point&) { return 2.0; }), kQuad, 1.0);
  for (const Offset& a : flat.argmax) CHECK(a == Offset{0, 0});
}

TEST_CASE("argmax offsets stay inside the search radius") {
  std::mt19937_64 rng(31);
  const auto d = test::square(-1.0, 1.0, 0.05);
  for (int k = 0; k < 5; ++k) {
    const auto f = test::random_noise(rng, d);
    const auto step = make_hopf_lax_step(kQuad, 0.3, f);
    const auto r = apply_bruteforce(f, step);
    for (const Offset& a : r.argmax) CHECK(norm(a, d.spacing()) <= step.radius * (1 + 1e-12));
    CHECK(r.value.trusted_radius() == doctest::Approx(f.trusted_radius() - step.radius));
  }
}

TEST_CASE("monotone increase, contraction and the lipschitz gap") {
  std::mt19937_64 rng(37);
  const auto d = test::line(-6.0, 6.0, 0.02);
  for (int k = 0; k < 10; ++k) {
    const auto f = test::random_smooth(rng, d);
    const auto g = test::random_smooth(rng, d);
    const double t = 0.2 + 0.1 * k;
    const auto pf = fast(f, kQuad, t);
    const auto pg = fast(g, kQuad, t);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(pf[i] >= f[i]);
    CHECK(max_abs_difference(pf, pg) <= test::max_abs(f, g) + 1e-12);
    const double lip = lipschitz_estimate(f);
    double gap = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) gap = std::max(gap, pf[i] - f[i]);
    CHECK(gap <= t * kQuad.conjugate(lip) + d.spacing() * lip);
  }
}

TEST_CASE("semigroup on the trusted region") {
  const auto d = test::line(-4 * kPi, 4 * kPi, 0.01);
  std::mt19937_64 rng(41);
  for (const auto& f : {test::cosine(d), test::random_smooth(rng, d)}) {
    const double tol = 4 * d.spacing() * lipschitz_estimate(f);
    for (auto [s, t] : {std::pair{0.5, 0.5}, std::pair{0.25, 0.75}}) {
      const auto whole = fast(f, kQuad, s + t);
      const auto inner = fast(f, kQuad, t);
      const auto split = fast(inner, kQuad, s);
      CHECK_FALSE(common_trusted_nodes(whole, split).empty());
      CHECK(max_abs_difference(whole, split) <= tol);
    }
  }
}

TEST_CASE("fast path matches brute force") {
  std::mt19937_64 rng(43);
  const auto d1 = test::line(-5.0, 5.0, 0.01);
  for (int k = 0; k < 10; ++k) {
    const auto f = k % 2 ? test::random_noise(rng, d1) : test::random_smooth(rng, d1);
    const double t = 0.1 + 0.2 * k;
    CHECK(same_bits(fast(f, kQuad, t), brute(f, kQuad, t).value));
    const auto p = CostFunction::power(1.5 + 0.3 * k, 0.5 + 0.1 * k);
    CHECK(same_bits(fast(f, p, t), brute(f, p, t).value));
  }
  const auto d2 = test::square(-1.0, 1.0, 0.02);
  for (int k = 0; k < 5; ++k) {
    const auto f = k % 2 ? test::random_noise(rng, d2) : test::random_smooth(rng, d2, 3.0);
    CHECK(test::max_abs(fast(f, kQuad, 0.5), brute(f, kQuad, 0.5).value) <= 1e-12);
  }
}

TEST_CASE("fast path availability") {
  const auto d1 = test::line(-1.0, 1.0, 0.1);
  const auto d2 = test::square(-1.0, 1.0, 0.1);
  const auto f1 = test::cosine(d1);
  const auto f2 = test::cosine(d2);
  CHECK_FALSE(apply_fast(f1, make_hopf_lax_step(CostFunction::ball_indicator(0.3), 1.0, f1)).has_value());
  CHECK_FALSE(apply_fast(f2, make_hopf_lax_step(CostFunction::power(3.0, 1.0), 1.0, f2)).has_value());
  CHECK(apply_fast(f2, make_hopf_lax_step(kQuad, 1.0, f2)).has_value());
  // the dispatcher falls back to brute force
  const auto ball = make_hopf_lax_step(CostFunction::ball_indicator(0.35), 1.0, f1);
  CHECK(same_bits(apply_hopf_lax(f1, ball), apply_bruteforce(f1, ball).value));
  const auto r = apply_hopf_lax(f1, ball);
  for (std::size_t i = 3; i + 3 < f1.size(); ++i) {
    double m = -kInfinity;
    for (int k = -3; k <= 3; ++k) m = std::max(m, f1[i + k]);
    CHECK(r[i] == m);
  }
}

TEST_CASE("argmax csv") {
  const GridDomain d(1, {0, 0}, {1, 0}, {3, 1});
  std::ostringstream os;
  write_argmax_csv(d, ArgmaxField{{1, 0}, {0, 0}, {-1, 0}}, os);
  CHECK(os.str() == "x0,a0\n0,0.5\n0.5,0\n1,-0.5\n");
}
