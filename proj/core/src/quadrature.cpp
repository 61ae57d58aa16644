#include "glhydro/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glhydro/errors.hpp"

namespace glhydro {
namespace {

constexpr int kInitialIntervals = 32;
constexpr int kMaxLevels = 14;
constexpr int kMaxWalk = 100000;

double log_sum_exp_shifted(std::span<const double> lw, double peak) {
  double s = 0.0;
  for (double v : lw) s += std::exp(v - peak);
  return s;
}

}  // namespace

double log_cutoff(double tol) { return -std::log(tol) + 18.5; }

double inner_tol(double tol) { return std::clamp(tol * 1e-2, 1e-14, 1e-6); }

double solve_psi_prime(const Potential& pot, double target) {
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && pot.d1(lo) > target; ++i) lo = 2.0 * lo - 1.0;
  for (int i = 0; i < 200 && pot.d1(hi) < target; ++i) hi = 2.0 * hi + 1.0;
  double x = std::clamp(target / std::max(pot.d2(0.0), 1e-3), lo, hi);
  for (int it = 0; it < 200; ++it) {
    const Eval3 e = pot.eval(x);
    const double r = e.d1 - target;
    if (r > 0) hi = x; else lo = x;
    if (std::abs(r) <= 1e-15 * (1.0 + std::abs(target)) || hi - lo <= 1e-15 * (1.0 + std::abs(x))) {
      return x;
    }
    double next = e.d2 > 0 ? x - r / e.d2 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

DiscreteTilt DiscreteTilt::build(const Potential& pot, double sigma, double tol,
                                 double max_frequency) {
  if (!(tol > 0.0)) throw ValidationError("quadrature tolerance must be positive");
  if (!std::isfinite(sigma)) throw ValidationError("tilt parameter must be finite");
  const double qtol = tol;
  auto log_w = [&](double x) { return sigma * x - pot.value(x); };

  const double mode = solve_psi_prime(pot, sigma);
  const double peak = log_w(mode);
  const double cut = log_cutoff(qtol);
  const double step = 0.5 / std::sqrt(std::max(pot.d2(mode), 1e-6));

  double lo = mode, hi = mode;
  int walk = 0;
  while (log_w(lo) > peak - cut && walk++ < kMaxWalk) lo -= step;
  while (log_w(hi) > peak - cut && walk++ < kMaxWalk) hi += step;
  if (walk >= kMaxWalk) throw QuadratureError("tilt truncation walk did not terminate", INFINITY);

  // Level 0 grid, then refinement by inserting midpoints.
  int intervals = kInitialIntervals;
  double h = (hi - lo) / intervals;
  std::vector<double> xs(intervals + 1), lw(intervals + 1);
  for (int i = 0; i <= intervals; ++i) {
    xs[i] = lo + i * h;
    lw[i] = log_w(xs[i]);
  }

  struct Stats {
    double z, m, s2;
  };
  auto stats = [&](double spacing) {
    const double s = log_sum_exp_shifted(lw, peak);
    double m = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) m += xs[i] * std::exp(lw[i] - peak);
    m /= s;
    double v = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = xs[i] - m;
      v += d * d * std::exp(lw[i] - peak);
    }
    return Stats{s * spacing, m, v / s};
  };

  Stats prev = stats(h);
  double err = INFINITY;
  bool converged = false;
  for (int level = 0; level < kMaxLevels; ++level) {
    std::vector<double> nx(2 * intervals + 1), nlw(2 * intervals + 1);
    for (int i = 0; i <= intervals; ++i) {
      nx[2 * i] = xs[i];
      nlw[2 * i] = lw[i];
    }
    for (int i = 0; i < intervals; ++i) {
      nx[2 * i + 1] = xs[i] + 0.5 * h;
      nlw[2 * i + 1] = log_w(nx[2 * i + 1]);
    }
    xs.swap(nx);
    lw.swap(nlw);
    intervals *= 2;
    h *= 0.5;
    const Stats cur = stats(h);
    err = std::max({std::abs(cur.z - prev.z) / cur.z, std::abs(cur.m - prev.m) / (1.0 + std::abs(cur.m)),
                    std::abs(cur.s2 - prev.s2) / cur.s2});
    prev = cur;
    const bool resolved = max_frequency <= 0.0 || h * max_frequency <= 1.0;
    if (err <= qtol && resolved) {
      converged = true;
      break;
    }
  }
  if (!converged) throw QuadratureError("tilt quadrature did not converge", err);

  DiscreteTilt t;
  t.spacing_ = h;
  t.error_ = err;
  t.nodes_ = std::move(xs);
  const double total = log_sum_exp_shifted(lw, peak);
  t.probs_.resize(lw.size());
  for (std::size_t i = 0; i < lw.size(); ++i) t.probs_[i] = std::exp(lw[i] - peak) / total;
  t.moments_.sigma = sigma;
  t.moments_.log_z = peak + std::log(total * h);
  double m = 0.0;
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) m += t.probs_[i] * t.nodes_[i];
  double v = 0.0, k3 = 0.0;
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    const double d = t.nodes_[i] - m;
    v += t.probs_[i] * d * d;
    k3 += t.probs_[i] * d * d * d;
  }
  t.moments_.m = m;
  t.moments_.s2 = v;
  t.third_ = k3;
  t.cdf_.resize(t.nodes_.size());
  double acc = 0.0;
  t.cdf_[0] = 0.0;
  for (std::size_t i = 1; i < t.nodes_.size(); ++i) {
    acc += 0.5 * (t.probs_[i - 1] + t.probs_[i]);
    t.cdf_[i] = acc;
  }
  for (double& c : t.cdf_) c /= acc;
  return t;
}

std::complex<double> DiscreteTilt::centered_cf(double xi) const {
  double re = 0.0, im = 0.0;
  const double m = moments_.m;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double phase = (nodes_[i] - m) * xi;
    re += probs_[i] * std::cos(phase);
    im += probs_[i] * std::sin(phase);
  }
  return {re, im};
}

double DiscreteTilt::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return nodes_.front();
  if (it == cdf_.end()) return nodes_.back();
  const std::size_t j = static_cast<std::size_t>(it - cdf_.begin());
  const std::size_t i = j - 1;
  // Density is linear from p0 to p1 across the cell; invert the quadratic CDF.
  const double p0 = probs_[i], p1 = probs_[j];
  const double target = (u - cdf_[i]) / (cdf_[j] - cdf_[i]);  // in [0,1]
  const double a = 0.5 * (p1 - p0), b = p0, c = -target * 0.5 * (p0 + p1);
  double s;
  if (std::abs(a) < 1e-14 * (std::abs(b) + 1e-300)) {
    s = -c / b;
  } else {
    s = (-b + std::sqrt(std::max(b * b - 4.0 * a * c, 0.0))) / (2.0 * a);
  }
  return nodes_[i] + std::clamp(s, 0.0, 1.0) * spacing_;
}

double DiscreteTilt::expect(const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) acc += probs_[i] * f(nodes_[i]);
  return acc;
}

LogIntegral integrate_log_1d(const std::function<double(double)>& log_f, double center,
                             double scale, double tol) {
  const double cut = log_cutoff(tol);
  double peak = log_f(center);
  if (!std::isfinite(peak)) throw QuadratureError("integrand not finite at center", INFINITY);
  // Climb to the local maximum along the walk so the cutoff is relative to it.
  double lo = center, hi = center;
  int walk = 0;
  for (;;) {
    const double v = log_f(lo - scale);
    if (!(v > peak - cut) || ++walk > kMaxWalk) break;
    lo -= scale;
    peak = std::max(peak, v);
  }
  for (;;) {
    const double v = log_f(hi + scale);
    if (!(v > peak - cut) || ++walk > kMaxWalk) break;
    hi += scale;
    peak = std::max(peak, v);
  }
  if (walk > kMaxWalk) throw QuadratureError("truncation walk did not terminate", INFINITY);
  lo -= scale;
  hi += scale;

  int intervals = 16;
  double h = (hi - lo) / intervals;
  std::vector<double> lv(intervals + 1);
  for (int i = 0; i <= intervals; ++i) lv[i] = log_f(lo + i * h);
  double ref = *std::max_element(lv.begin(), lv.end());
  auto total = [&](double spacing) {
    double s = 0.0;
    for (double v : lv) s += std::exp(v - ref);
    return s * spacing;
  };
  double prev = total(h);
  double err = INFINITY;
  for (int level = 0; level < kMaxLevels; ++level) {
    std::vector<double> next(2 * intervals + 1);
    for (int i = 0; i <= intervals; ++i) next[2 * i] = lv[i];
    for (int i = 0; i < intervals; ++i) next[2 * i + 1] = log_f(lo + (i + 0.5) * h);
    lv.swap(next);
    intervals *= 2;
    h *= 0.5;
    const double new_ref = *std::max_element(lv.begin(), lv.end());
    prev *= std::exp(ref - new_ref);
    ref = new_ref;
    const double cur = total(h);
    err = std::abs(cur - prev) / cur;
    prev = cur;
    if (err <= tol && level >= 1) return {ref + std::log(cur), err};
  }
  throw QuadratureError("nested trapezoid did not converge", err);
}

}  // namespace glhydro
