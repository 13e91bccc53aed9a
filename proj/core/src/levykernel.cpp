#include "hlx/levykernel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>

#include "hlx/errors.hpp"

namespace hlx {

namespace {

constexpr double kGaussianWidth = 8.0;

using SparseKernel = std::map<Offset, double>;

SparseKernel delta_at(Offset o) { return SparseKernel{{o, 1.0}}; }

SparseKernel convolve_sparse(const SparseKernel& a, const SparseKernel& b) {
  SparseKernel out;
  for (const auto& [oa, wa] : a) {
    for (const auto& [ob, wb] : b) {
      out[Offset{oa[0] + ob[0], oa[1] + ob[1]}] += wa * wb;
    }
  }
  return out;
}

int snap(double x, double h) { return static_cast<int>(std::lround(x / h)); }

std::vector<double> gaussian_axis(double mean, double var, double h, int& first) {
  if (var == 0.0) {
    first = snap(mean, h);
    return {1.0};
  }
  const double s = std::sqrt(var);
  first = static_cast<int>(std::floor((mean - kGaussianWidth * s) / h));
  const int last = static_cast<int>(std::ceil((mean + kGaussianWidth * s) / h));
  std::vector<double> w(static_cast<std::size_t>(last - first + 1));
  for (int k = first; k <= last; ++k) {
    const double z = (k * h - mean) / s;
    w[static_cast<std::size_t>(k - first)] = std::exp(-0.5 * z * z);
  }
  return w;
}

// Smallest K with P(N > K) <= tol for N ~ Poisson(m), and the pmf up to K.
std::vector<double> poisson_head(double m, double tol) {
  std::vector<double> pmf;
  double cdf = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double p = m == 0.0 ? (k == 0 ? 1.0 : 0.0)
                              : std::exp(-m + k * std::log(m) - std::lgamma(k + 1.0));
    pmf.push_back(p);
    cdf += p;
    if (1.0 - cdf <= tol && (m == 0.0 || k >= m)) return pmf;
  }
  throw InvalidArgument("compound poisson: series did not reach the tail tolerance");
}

SparseKernel jump_law(const CompoundPoissonComponent& cp, double h) {
  SparseKernel law;
  for (const Jump& j : cp.jumps) {
    law[Offset{snap(j.displacement[0], h), snap(j.displacement[1], h)}] += j.probability;
  }
  return law;
}

SparseKernel discretize_component(const KernelComponent& comp, double t, double h,
                                  double tol, double& truncated) {
  if (const auto* d = std::get_if<DiracComponent>(&comp)) {
    return delta_at(Offset{snap(d->shift[0] * t, h), snap(d->shift[1] * t, h)});
  }
  if (const auto* g = std::get_if<GaussianComponent>(&comp)) {
    int f0 = 0;
    int f1 = 0;
    const auto w0 = gaussian_axis(g->drift[0] * t, g->sigma2[0] * t, h, f0);
    const auto w1 = gaussian_axis(g->drift[1] * t, g->sigma2[1] * t, h, f1);
    SparseKernel out;
    double total = 0.0;
    for (std::size_t j = 0; j < w1.size(); ++j) {
      for (std::size_t i = 0; i < w0.size(); ++i) {
        const double w = w0[i] * w1[j];
        out.emplace(Offset{f0 + static_cast<int>(i), f1 + static_cast<int>(j)}, w);
        total += w;
      }
    }
    for (auto& [o, w] : out) w /= total;
    // Mass outside 8 standard deviations, per active axis.
    const double tail = std::erfc(kGaussianWidth / std::sqrt(2.0));
    truncated += (g->sigma2[0] > 0.0 ? tail : 0.0) + (g->sigma2[1] > 0.0 ? tail : 0.0);
    return out;
  }
  const auto& cp = std::get<CompoundPoissonComponent>(comp);
  const auto pmf = poisson_head(cp.rate * t, tol);
  const SparseKernel law = jump_law(cp, h);
  SparseKernel power = delta_at(Offset{0, 0});
  SparseKernel out;
  double kept = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    if (k > 0) power = convolve_sparse(power, law);
    for (const auto& [o, w] : power) out[o] += pmf[k] * w;
    kept += pmf[k];
  }
  for (auto& [o, w] : out) w /= kept;
  truncated += std::max(0.0, 1.0 - kept);
  return out;
}

DiscreteKernel from_sparse(const SparseKernel& s, int dim, double h) {
  DiscreteKernel k;
  k.dim = dim;
  k.h = h;
  double total = 0.0;
  for (const auto& [o, w] : s) {
    if (w <= 0.0) continue;
    k.offsets.push_back(o);
    k.weights.push_back(w);
    total += w;
    k.truncation_radius = std::max(k.truncation_radius, norm(o, h));
  }
  for (double& w : k.weights) w /= total;
  return k;
}

SparseKernel to_sparse(const DiscreteKernel& k) {
  SparseKernel s;
  for (std::size_t i = 0; i < k.offsets.size(); ++i) s[k.offsets[i]] += k.weights[i];
  return s;
}

void check_point(const Point& p, int dim, const char* what) {
  for (int a = 0; a < 2; ++a) {
    if (!std::isfinite(p[a])) throw InvalidArgument(std::string(what) + ": non-finite entry");
    if (a >= dim && p[a] != 0.0) {
      throw InvalidArgument(std::string(what) + ": entry beyond the model dimension");
    }
  }
}

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

int fft_size(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

GridFunction apply_direct(const GridFunction& f, const DiscreteKernel& k, double trust) {
  const GridDomain& d = f.domain();
  std::vector<double> out(f.size());
  const auto n = static_cast<std::ptrdiff_t>(f.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const auto c = d.coords(static_cast<std::size_t>(idx));
    double acc = 0.0;
    for (std::size_t j = 0; j < k.offsets.size(); ++j) {
      acc += k.weights[j] * f.clamped(c[0] + k.offsets[j][0], c[1] + k.offsets[j][1]);
    }
    out[static_cast<std::size_t>(idx)] = acc;
  }
  return GridFunction(d, std::move(out), trust);
}

// Correlation with the kernel via zero-wrap FFT convolution of the clamped,
// padded grid against the reflected kernel.
GridFunction apply_spectral(const GridFunction& f, const DiscreteKernel& k, double trust) {
  const GridDomain& d = f.domain();
  int lo0 = 0, hi0 = 0, lo1 = 0, hi1 = 0;
  for (const Offset& o : k.offsets) {
    lo0 = std::min(lo0, o[0]);
    hi0 = std::max(hi0, o[0]);
    lo1 = std::min(lo1, o[1]);
    hi1 = std::max(hi1, o[1]);
  }
  const int n0 = d.count(0);
  const int n1 = d.count(1);
  const int p0 = n0 + hi0 - lo0;  // padded signal extent
  const int p1 = n1 + hi1 - lo1;
  const int k0 = hi0 - lo0 + 1;  // kernel extent
  const int k1 = hi1 - lo1 + 1;
  const int L0 = fft_size(p0 + k0 - 1);
  const int L1 = d.dim() == 2 ? fft_size(p1 + k1 - 1) : 1;
  const int C0 = L0 / 2 + 1;
  const std::size_t real_n = static_cast<std::size_t>(L0) * static_cast<std::size_t>(L1);
  const std::size_t cplx_n = static_cast<std::size_t>(C0) * static_cast<std::size_t>(L1);

  double* sig = fftw_alloc_real(real_n);
  double* ker = fftw_alloc_real(real_n);
  fftw_complex* sig_hat = fftw_alloc_complex(cplx_n);
  fftw_complex* ker_hat = fftw_alloc_complex(cplx_n);
  std::fill(sig, sig + real_n, 0.0);
  std::fill(ker, ker + real_n, 0.0);

  for (int j1 = 0; j1 < p1; ++j1) {
    for (int j0 = 0; j0 < p0; ++j0) {
      sig[static_cast<std::size_t>(j1) * L0 + j0] = f.clamped(j0 + lo0, j1 + lo1);
    }
  }
  for (std::size_t j = 0; j < k.offsets.size(); ++j) {
    const int r0 = hi0 - k.offsets[j][0];
    const int r1 = hi1 - k.offsets[j][1];
    ker[static_cast<std::size_t>(r1) * L0 + r0] += k.weights[j];
  }

  fftw_plan fwd_sig, fwd_ker, inv;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (d.dim() == 1) {
      fwd_sig = fftw_plan_dft_r2c_1d(L0, sig, sig_hat, FFTW_ESTIMATE);
      fwd_ker = fftw_plan_dft_r2c_1d(L0, ker, ker_hat, FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_1d(L0, sig_hat, sig, FFTW_ESTIMATE);
    } else {
      fwd_sig = fftw_plan_dft_r2c_2d(L1, L0, sig, sig_hat, FFTW_ESTIMATE);
      fwd_ker = fftw_plan_dft_r2c_2d(L1, L0, ker, ker_hat, FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_2d(L1, L0, sig_hat, sig, FFTW_ESTIMATE);
    }
  }
  fftw_execute(fwd_sig);
  fftw_execute(fwd_ker);
  const double scale = 1.0 / static_cast<double>(real_n);
  for (std::size_t i = 0; i < cplx_n; ++i) {
    const double re = sig_hat[i][0] * ker_hat[i][0] - sig_hat[i][1] * ker_hat[i][1];
    const double im = sig_hat[i][0] * ker_hat[i][1] + sig_hat[i][1] * ker_hat[i][0];
    sig_hat[i][0] = re * scale;
    sig_hat[i][1] = im * scale;
  }
  fftw_execute(inv);

  // out(i) = sum_o w_o g(i - lo + o) = (g * kr)(i - lo + hi)
  std::vector<double> out(f.size());
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i0 = 0; i0 < n0; ++i0) {
      out[d.index(i0, i1)] =
          sig[static_cast<std::size_t>(i1 - lo1 + hi1) * L0 + (i0 - lo0 + hi0)];
    }
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_sig);
    fftw_destroy_plan(fwd_ker);
    fftw_destroy_plan(inv);
  }
  fftw_free(sig);
  fftw_free(ker);
  fftw_free(sig_hat);
  fftw_free(ker_hat);
  return GridFunction(d, std::move(out), trust);
}

}  // namespace

KernelModel KernelModel::dirac(int dim, Point shift) {
  if (dim != 1 && dim != 2) throw InvalidArgument("kernel: dim must be 1 or 2");
  check_point(shift, dim, "dirac kernel shift");
  return KernelModel(dim, {DiracComponent{shift}});
}

KernelModel KernelModel::gaussian(int dim, Point drift, Point sigma2) {
  if (dim != 1 && dim != 2) throw InvalidArgument("kernel: dim must be 1 or 2");
  check_point(drift, dim, "gaussian kernel drift");
  check_point(sigma2, dim, "gaussian kernel sigma2");
  for (double s : sigma2) {
    if (s < 0.0) throw InvalidArgument("gaussian kernel: sigma2 must be >= 0");
  }
  return KernelModel(dim, {GaussianComponent{drift, sigma2}});
}

KernelModel KernelModel::compound_poisson(int dim, double rate, std::vector<Jump> jumps) {
  if (dim != 1 && dim != 2) throw InvalidArgument("kernel: dim must be 1 or 2");
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw InvalidArgument("compound poisson: rate must be >= 0");
  }
  if (jumps.empty()) throw InvalidArgument("compound poisson: empty jump law");
  double total = 0.0;
  for (const Jump& j : jumps) {
    check_point(j.displacement, dim, "compound poisson jump");
    if (!(j.probability >= 0.0)) throw InvalidArgument("compound poisson: negative probability");
    total += j.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("compound poisson: jump probabilities must sum to 1");
  }
  return KernelModel(dim, {CompoundPoissonComponent{rate, std::move(jumps)}});
}

KernelModel KernelModel::sum(const std::vector<KernelModel>& parts) {
  if (parts.empty()) throw InvalidArgument("sum kernel: no components");
  std::vector<KernelComponent> all;
  const int dim = parts.front().dim();
  double tol = parts.front().tail_mass_tol();
  for (const KernelModel& p : parts) {
    if (p.dim() != dim) throw InvalidArgument("sum kernel: components differ in dimension");
    all.insert(all.end(), p.components().begin(), p.components().end());
    tol = std::min(tol, p.tail_mass_tol());
  }
  KernelModel out(dim, std::move(all));
  out.tail_mass_tol_ = tol;
  return out;
}

KernelModel KernelModel::with_tail_mass_tol(double tol) const {
  if (!(tol > 0.0) || !(tol < 1.0)) throw InvalidArgument("kernel: tail_mass_tol must be in (0,1)");
  KernelModel out = *this;
  out.tail_mass_tol_ = tol;
  return out;
}

bool KernelModel::is_identity() const noexcept {
  return std::all_of(components_.begin(), components_.end(), [](const KernelComponent& c) {
    const auto* d = std::get_if<DiracComponent>(&c);
    return d != nullptr && d->shift[0] == 0.0 && d->shift[1] == 0.0;
  });
}

DiscreteKernel discretize(const KernelModel& model, double t, double h, double max_radius) {
  if (!(t > 0.0)) throw InvalidArgument("discretize: t must be > 0");
  if (!(h > 0.0)) throw InvalidArgument("discretize: h must be > 0");
  double truncated = 0.0;
  SparseKernel acc = delta_at(Offset{0, 0});
  for (const KernelComponent& c : model.components()) {
    acc = convolve_sparse(acc, discretize_component(c, t, h, model.tail_mass_tol(), truncated));
  }
  DiscreteKernel k = from_sparse(acc, model.dim(), h);
  k.truncated_mass = truncated;
  if (k.truncation_radius > max_radius) {
    throw DomainTooSmall("domain too small: kernel truncation radius " +
                         std::to_string(k.truncation_radius) + " exceeds " +
                         std::to_string(max_radius));
  }
  return k;
}

DiscreteKernel convolve(const DiscreteKernel& a, const DiscreteKernel& b) {
  if (a.dim != b.dim || a.h != b.h) throw InvalidArgument("convolve: kernels on different lattices");
  DiscreteKernel k = from_sparse(convolve_sparse(to_sparse(a), to_sparse(b)), a.dim, a.h);
  k.truncated_mass = a.truncated_mass + b.truncated_mass;
  return k;
}

double total_variation(const DiscreteKernel& a, const DiscreteKernel& b) {
  SparseKernel diff = to_sparse(a);
  for (std::size_t i = 0; i < b.offsets.size(); ++i) diff[b.offsets[i]] -= b.weights[i];
  double tv = 0.0;
  for (const auto& [o, w] : diff) tv += std::abs(w);
  return 0.5 * tv;
}

Point kernel_mean(const DiscreteKernel& k) {
  Point m{0.0, 0.0};
  for (std::size_t i = 0; i < k.offsets.size(); ++i) {
    m[0] += k.weights[i] * k.offsets[i][0] * k.h;
    m[1] += k.weights[i] * k.offsets[i][1] * k.h;
  }
  return m;
}

GridFunction apply_kernel(const GridFunction& f, const DiscreteKernel& kernel, ConvolutionPath path) {
  if (kernel.dim != f.domain().dim()) throw InvalidArgument("apply_kernel: dimension mismatch");
  if (std::abs(kernel.h - f.domain().spacing()) > 1e-12 * kernel.h) {
    throw InvalidArgument("apply_kernel: kernel discretized for a different spacing");
  }
  const double trust = f.trusted_radius() - kernel.truncation_radius;
  if (path == ConvolutionPath::Auto) {
    path = kernel.offsets.size() > 64 ? ConvolutionPath::Spectral : ConvolutionPath::Direct;
  }
  return path == ConvolutionPath::Direct ? apply_direct(f, kernel, trust)
                                         : apply_spectral(f, kernel, trust);
}

double cumulative_reach(const KernelModel& model, double dt, int steps, double h) {
  if (steps <= 0) return 0.0;
  const double total_t = dt * steps;
  double reach = 0.0;
  for (const KernelComponent& c : model.components()) {
    if (const auto* d = std::get_if<DiracComponent>(&c)) {
      reach += steps * norm(Offset{snap(d->shift[0] * dt, h), snap(d->shift[1] * dt, h)}, h);
    } else if (const auto* g = std::get_if<GaussianComponent>(&c)) {
      Point r{0.0, 0.0};
      for (int a = 0; a < 2; ++a) {
        if (g->sigma2[a] == 0.0) {
          r[a] = steps * std::abs(snap(g->drift[a] * dt, h)) * h;
        } else {
          r[a] = std::abs(g->drift[a]) * total_t +
                 kGaussianWidth * std::sqrt(g->sigma2[a] * total_t) + h;
        }
      }
      reach += norm(r);
    } else {
      const auto& cp = std::get<CompoundPoissonComponent>(c);
      const auto pmf = poisson_head(cp.rate * total_t, model.tail_mass_tol());
      double longest = 0.0;
      for (const auto& [o, w] : jump_law(cp, h)) longest = std::max(longest, norm(o, h));
      reach += static_cast<double>(pmf.size() - 1) * longest;
    }
  }
  const double per_step = discretize(model, dt, h).truncation_radius;
  return std::min(reach, steps * per_step);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Point sample_increment(const KernelModel& model, double t, std::uint64_t seed) {
  auto rng = make_stream(seed, 0);
  return sample_increment(model, t, rng);
}

Point sample_increment(const KernelModel& model, double t, std::mt19937_64& rng) {
  if (!(t > 0.0)) throw InvalidArgument("sample_increment: t must be > 0");
  Point y{0.0, 0.0};
  for (const KernelComponent& c : model.components()) {
    if (const auto* d = std::get_if<DiracComponent>(&c)) {
      y[0] += d->shift[0] * t;
      y[1] += d->shift[1] * t;
    } else if (const auto* g = std::get_if<GaussianComponent>(&c)) {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int a = 0; a < model.dim(); ++a) {
        y[a] += g->drift[a] * t + std::sqrt(g->sigma2[a] * t) * normal(rng);
      }
    } else {
      const auto& cp = std::get<CompoundPoissonComponent>(c);
      if (cp.rate == 0.0) continue;
      std::poisson_distribution<long> count(cp.rate * t);
      std::vector<double> probs;
      for (const Jump& j : cp.jumps) probs.push_back(j.probability);
      std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
      const long n = count(rng);
      for (long i = 0; i < n; ++i) {
        const Jump& j = cp.jumps[pick(rng)];
        y[0] += j.displacement[0];
        y[1] += j.displacement[1];
      }
    }
  }
  return y;
}

void write_kernel_csv(const DiscreteKernel& kernel, std::ostream& os) {
  os << (kernel.dim == 1 ? "offset0,weight\n" : "offset0,offset1,weight\n");
  os.precision(17);
  for (std::size_t i = 0; i < kernel.offsets.size(); ++i) {
    os << kernel.offsets[i][0] * kernel.h;
    if (kernel.dim == 2) os << ',' << kernel.offsets[i][1] * kernel.h;
    os << ',' << kernel.weights[i] << '\n';
  }
}

}  // namespace hlx
