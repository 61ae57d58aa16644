#include "glhydro/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "glhydro/errors.hpp"

namespace glhydro {
namespace {

constexpr int kMaxNewton = 200;

void require_block(std::span<const double> block) {
  if (block.empty()) throw ValidationError("block field must contain at least one value");
  for (double a : block) {
    if (!std::isfinite(a)) throw ValidationError("block field values must be finite");
  }
}

double mean_shift(const WeightedShifts& s) {
  double acc = 0.0;
  for (std::size_t j = 0; j < s.a.size(); ++j) acc += s.w[j] * s.a[j];
  return acc;
}

}  // namespace

/// Constrained mode of exp(-sum psi(x_i) + a_i x_i) on {sum x_i = total}:
/// psi'(x_i) + a_i = lambda for every i.
std::vector<double> constrained_mode(const Potential& pot, std::span<const double> a, double total) {
  auto positions = [&](double lambda) {
    std::vector<double> x(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) x[i] = solve_psi_prime(pot, lambda - a[i]);
    return x;
  };
  auto excess = [&](double lambda) {
    double s = 0.0;
    for (double v : positions(lambda)) s += v;
    return s - total;
  };
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && excess(lo) > 0; ++i) lo = 2.0 * lo - 1.0;
  for (int i = 0; i < 200 && excess(hi) < 0; ++i) hi = 2.0 * hi + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0 ? hi : lo) = mid;
  }
  return positions(0.5 * (lo + hi));
}

WeightedShifts block_shifts(std::span<const double> block) {
  require_block(block);
  std::map<double, int> counts;
  for (double a : block) ++counts[a];
  WeightedShifts s;
  s.total = static_cast<int>(block.size());
  for (const auto& [value, c] : counts) {
    s.a.push_back(value);
    s.count.push_back(c);
    s.w.push_back(static_cast<double>(c) / s.total);
  }
  return s;
}

WeightedShifts law_shifts(const FieldSpec& spec) {
  spec.validate();
  WeightedShifts s;
  for (const Atom& atom : spec.expectation_nodes()) {
    if (atom.prob == 0.0) continue;
    s.a.push_back(atom.value);
    s.w.push_back(atom.prob);
  }
  return s;
}

TiltMoments log_partition_1d(const Potential& pot, double sigma, double tol) {
  return DiscreteTilt::build(pot, sigma, inner_tol(tol)).moments();
}

Eval3 conjugate_sum(const Potential& pot, const WeightedShifts& shifts, double sigma, double tol) {
  Eval3 out;
  for (std::size_t j = 0; j < shifts.a.size(); ++j) {
    const TiltMoments t = log_partition_1d(pot, sigma - shifts.a[j], tol);
    out.value += shifts.w[j] * t.log_z;
    out.d1 += shifts.w[j] * t.m;
    out.d2 += shifts.w[j] * t.s2;
  }
  return out;
}

double sigma_of_m(const Potential& pot, const WeightedShifts& shifts, double m, double tol) {
  if (!std::isfinite(m)) throw ValidationError("sigma_of_m needs a finite mean");
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  double sigma = pot.psi_c(0.0).d2 * m + mean_shift(shifts);
  double lo = -INFINITY, hi = INFINITY;
  for (int it = 0; it < kMaxNewton; ++it) {
    const Eval3 c = conjugate_sum(pot, shifts, sigma, tol);
    const double r = c.d1 - m;
    if (std::abs(r) <= tol) return sigma;
    if (r < 0) lo = std::max(lo, sigma); else hi = std::min(hi, sigma);
    double step = -r / c.d2;
    const double cap = 10.0 * (1.0 + std::abs(sigma));
    step = std::clamp(step, -cap, cap);
    double next = sigma + step;
    if (std::isfinite(lo) && std::isfinite(hi) && !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == sigma) return sigma;
    sigma = next;
  }
  throw ConvergenceError("sigma_of_m: Newton iteration did not converge for m = " + std::to_string(m));
}

double sigma_of_m(const Potential& pot, std::span<const double> block, double m, double tol) {
  return sigma_of_m(pot, block_shifts(block), m, tol);
}

Eval3 legendre(const Potential& pot, const WeightedShifts& shifts, double m, double tol) {
  const double sigma = sigma_of_m(pot, shifts, m, tol);
  const Eval3 c = conjugate_sum(pot, shifts, sigma, tol);
  return {sigma * m - c.value, sigma, 1.0 / c.d2};
}

Eval3 phi_K(const Potential& pot, std::span<const double> block, double m, double tol) {
  return legendre(pot, block_shifts(block), m, tol);
}

Eval3 phi_tilde(const Potential& pot, const FieldSpec& spec, double m, double tol) {
  return legendre(pot, law_shifts(spec), m, tol);
}

double g_density(const Potential& pot, std::span<const double> block, double m, double tol) {
  const WeightedShifts shifts = block_shifts(block);
  const double K = shifts.total;
  const double root_k = std::sqrt(K);
  const double sigma = sigma_of_m(pot, shifts, m, tol);
  const double qt = inner_tol(tol);
  const double cut = log_cutoff(qt);

  std::vector<DiscreteTilt> tilts;
  auto build = [&](double freq) {
    tilts.clear();
    for (double a : shifts.a) tilts.push_back(DiscreteTilt::build(pot, sigma - a, qt, freq));
  };
  double s2bar = 0.0;
  for (std::size_t j = 0; j < shifts.a.size(); ++j) {
    s2bar += shifts.w[j] * log_partition_1d(pot, sigma - shifts.a[j], tol).s2;
  }
  double xi_max = std::sqrt(2.0 * cut / s2bar);
  double freq = 1.5 * xi_max / root_k;
  build(freq);

  // log|prod h| and its phase, the product taken in log-modulus/phase form.
  auto log_mod_phase = [&](double xi, double& phase) {
    double lm = 0.0;
    phase = 0.0;
    for (std::size_t j = 0; j < tilts.size(); ++j) {
      const std::complex<double> h = tilts[j].centered_cf(xi / root_k);
      lm += shifts.count[j] * std::log(std::abs(h));
      phase += shifts.count[j] * std::arg(h);
    }
    return lm;
  };
  double phase = 0.0;
  for (int grow = 0; grow < 60 && log_mod_phase(xi_max, phase) > -cut; ++grow) {
    xi_max *= 1.25;
    if (xi_max / root_k > freq) {
      freq = 1.5 * xi_max / root_k;
      build(freq);
    }
  }

  int intervals = 64;
  double h = 2.0 * xi_max / intervals;
  std::vector<double> re(intervals + 1), im(intervals + 1);
  auto eval = [&](double xi, double& r, double& i) {
    double ph = 0.0;
    const double lm = log_mod_phase(xi, ph);
    const double mod = std::exp(lm);
    r = mod * std::cos(ph);
    i = mod * std::sin(ph);
  };
  for (int k = 0; k <= intervals; ++k) eval(-xi_max + k * h, re[k], im[k]);
  auto sum = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  double prev = sum(re) * h;
  double err = INFINITY;
  for (int level = 0; level < 14; ++level) {
    std::vector<double> nre(2 * intervals + 1), nim(2 * intervals + 1);
    for (int k = 0; k <= intervals; ++k) {
      nre[2 * k] = re[k];
      nim[2 * k] = im[k];
    }
    for (int k = 0; k < intervals; ++k) eval(-xi_max + (k + 0.5) * h, nre[2 * k + 1], nim[2 * k + 1]);
    re.swap(nre);
    im.swap(nim);
    intervals *= 2;
    h *= 0.5;
    const double cur = sum(re) * h;
    err = std::abs(cur - prev) / std::abs(cur);
    prev = cur;
    if (err <= qt) {
      const double g = cur / (2.0 * std::numbers::pi);
      const double imag = sum(im) * h / (2.0 * std::numbers::pi);
      if (std::abs(imag) > tol) {
        throw InconsistencyError("g_density: imaginary part " + std::to_string(imag) +
                                 " exceeds tolerance");
      }
      if (!(g > 0.0)) throw InconsistencyError("g_density: non-positive density");
      return g;
    }
  }
  throw QuadratureError("g_density: Fourier inversion did not converge", err);
}

double psi_K(const Potential& pot, std::span<const double> block, double m, double tol) {
  const double K = static_cast<double>(block.size());
  return phi_K(pot, block, m, tol).value - std::log(g_density(pot, block, m, tol)) / K;
}

double psi_K_direct(const Potential& pot, std::span<const double> block, double m, double tol) {
  require_block(block);
  const std::size_t K = block.size();
  if (K < 2 || K > 4) throw ValidationError("psi_K_direct supports 2 <= K <= 4");
  const double qt = inner_tol(tol);
  const double total = static_cast<double>(K) * m;

  std::vector<double> x(K);
  auto log_f = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < K; ++i) s -= pot.value(x[i]) + block[i] * x[i];
    return s;
  };
  // Coordinates x_1..x_{K-1} are integrated, x_K = K m - sum.
  std::function<double(std::size_t)> integrate = [&](std::size_t level) -> double {
    double fixed = 0.0;
    for (std::size_t i = 0; i < level; ++i) fixed += x[i];
    if (level == K - 1) {
      x[K - 1] = total - fixed;
      return log_f();
    }
    const auto mode = constrained_mode(pot, block.subspan(level), total - fixed);
    const double center = mode[0];
    const double scale = 0.5 / std::sqrt(std::max(pot.d2(center), 1e-6));
    return integrate_log_1d(
               [&](double v) {
                 x[level] = v;
                 return integrate(level + 1);
               },
               center, scale, qt)
        .log_value;
  };
  const double log_integral = integrate(0);
  return -(log_integral + 0.5 * std::log(static_cast<double>(K))) / static_cast<double>(K);
}

std::string free_energy_kind_name(FreeEnergyKind kind) {
  switch (kind) {
    case FreeEnergyKind::phi_K: return "phi_K";
    case FreeEnergyKind::psi_K: return "psi_K";
    case FreeEnergyKind::phi_tilde: return "phi_tilde";
  }
  return "?";
}

}  // namespace glhydro
