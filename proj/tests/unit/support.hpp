#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <hlx/gridfn.hpp>
#include <hlx/levykernel.hpp>
#include <hlx/scheme.hpp>

namespace hlx::test {

inline constexpr double kPi = std::numbers::pi;

inline GridDomain line(double lo, double hi, double h) {
  const std::vector<double> l{lo}, u{hi};
  return GridDomain::from_spacing(l, u, h);
}

inline GridDomain square(double lo, double hi, double h) {
  const std::vector<double> l{lo, lo}, u{hi, hi};
  return GridDomain::from_spacing(l, u, h);
}

inline GridFunction cosine(const GridDomain& d) {
  return GridFunction::sample(d, [](const Point& x) { return std::cos(x[0]); });
}

inline GridFunction ramp(const GridDomain& d, double slope) {
  return GridFunction::sample(d, [slope](const Point& x) { return slope * x[0]; });
}

inline SchemeConfig benchmark(int n) {
  SchemeConfig cfg;
  cfg.t = 1.0;
  cfg.n = n;
  cfg.cost = CostFunction::quadratic(0.5);
  cfg.kernel = KernelModel::gaussian(1, {0.0, 0.0}, {1.0, 0.0});
  return cfg;
}

// Smooth random field: a handful of random cosine modes.
inline GridFunction random_smooth(std::mt19937_64& rng, const GridDomain& d, double amplitude = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 4>> modes(5);
  for (auto& m : modes) m = {amplitude * u(rng), 2.0 * u(rng), 2.0 * u(rng), kPi * u(rng)};
  return GridFunction::sample(d, [&](const Point& x) {
    double v = 0.0;
    for (const auto& m : modes) v += m[0] * std::cos(m[1] * x[0] + m[2] * x[1] + m[3]);
    return v;
  });
}

// Independent uniform noise at every node.
inline GridFunction random_noise(std::mt19937_64& rng, const GridDomain& d, double amplitude = 1.0) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  std::vector<double> v(d.size());
  for (double& x : v) x = u(rng);
  return GridFunction(d, std::move(v));
}

inline double max_abs(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace hlx::test
