#include "glhydro/lattice.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>

#include <fftw3.h>

#include "glhydro/errors.hpp"
#include "glhydro/rng.hpp"

namespace glhydro {
namespace {

void check_mean_zero(std::span<const double> v, const char* who) {
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (std::abs(mean_of(v)) > 1e-9 * (scale + 1.0)) {
    throw ValidationError(std::string(who) + ": input must have zero mean");
  }
}

void check_divides(std::size_t n, int K) {
  if (K < 1 || n % static_cast<std::size_t>(K) != 0) {
    throw ValidationError("block size " + std::to_string(K) + " does not divide " +
                          std::to_string(n));
  }
}

/// FFTW plans keyed by N. Planning is not thread-safe in FFTW; execution with
/// the new-array interface is, so plans are created under a lock and then
/// shared. FFTW_UNALIGNED lets us pass arbitrary buffers.
struct FftPlans {
  fftw_plan forward;
  fftw_plan backward;
};

const FftPlans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, FftPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> re(n);
  std::vector<std::complex<double>> co(n / 2 + 1);
  auto* c = reinterpret_cast<fftw_complex*>(co.data());
  FftPlans p;
  p.forward = fftw_plan_dft_r2c_1d(n, re.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.backward = fftw_plan_dft_c2r_1d(n, c, re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  return cache.emplace(n, p).first->second;
}

}  // namespace

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void center(std::span<double> v) {
  const double m = mean_of(v);
  for (double& x : v) x -= m;
}

MicroState MicroState::from_values(std::vector<double> x) {
  MicroState s;
  s.mean = mean_of(x);
  s.x = std::move(x);
  return s;
}

void MicroState::validate() const {
  if (x.empty()) throw ValidationError("empty micro state");
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("micro state has a non-finite entry");
  }
  if (std::abs(mean_of(x) - mean) > 1e-9) throw ValidationError("micro state left its fiber");
}

MacroProfile MacroProfile::from_values(std::vector<double> y) {
  MacroProfile p;
  p.mean = mean_of(y);
  p.y = std::move(y);
  return p;
}

void MacroProfile::validate() const {
  if (y.empty()) throw ValidationError("empty macro profile");
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("macro profile has a non-finite entry");
  }
  if (std::abs(mean_of(y) - mean) > 1e-9) throw ValidationError("macro profile left its fiber");
}

std::vector<double> project_P(std::span<const double> x, int K) {
  check_divides(x.size(), K);
  const std::size_t m = x.size() / K;
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < K; ++j) s += x[i * K + j];
    y[i] = s / K;
  }
  return y;
}

MacroProfile project_P(const MicroState& x, int K) {
  MacroProfile p;
  p.y = project_P(x.x, K);
  p.mean = x.mean;
  return p;
}

std::vector<double> lift_Pt(std::span<const double> y, int K) {
  if (K < 1) throw ValidationError("block size must be positive");
  std::vector<double> x(y.size() * K);
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::fill_n(x.begin() + static_cast<std::ptrdiff_t>(i * K), K, y[i]);
  }
  return x;
}

MicroState lift_Pt(const MacroProfile& y, int K) {
  MicroState s;
  s.x = lift_Pt(y.y, K);
  s.mean = y.mean;
  return s;
}

std::vector<double> apply_A(std::span<const double> x) {
  const std::size_t n = x.size();
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = x[(i + n - 1) % n];
    const double right = x[(i + 1) % n];
    out[i] = n2 * (2.0 * x[i] - left - right);
  }
  return out;
}

std::vector<double> a_eigenvalues(int n) {
  std::vector<double> lam(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    const double s = std::sin(std::numbers::pi * k / n);
    lam[k] = 4.0 * n * static_cast<double>(n) * s * s;
  }
  return lam;
}

std::vector<double> solve_A(std::span<const double> b) {
  const std::size_t n = b.size();
  if (n == 0) return {};
  check_mean_zero(b, "solve_A");
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  // Differences d_i = x_{i+1} - x_i obey d_i = d_{i-1} - b_i / N^2; d_0 is fixed
  // by periodicity (the differences sum to zero).
  std::vector<double> d(n);
  d[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) d[i] = d[i - 1] - b[i] / n2;
  const double shift = mean_of(d);
  std::vector<double> x(n);
  x[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) x[i] = x[i - 1] + (d[i - 1] - shift);
  center(x);
  return x;
}

std::vector<double> spectral_multiply(std::span<const double> x, std::span<const double> mult) {
  const int n = static_cast<int>(x.size());
  if (mult.size() != static_cast<std::size_t>(n / 2 + 1)) {
    throw ValidationError("spectral multiplier needs N/2 + 1 entries");
  }
  const FftPlans& p = plans_for(n);
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> co(n / 2 + 1);
  fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(co.data()));
  for (int k = 0; k <= n / 2; ++k) co[k] *= mult[k] / n;
  std::vector<double> out(n);
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(co.data()), out.data());
  return out;
}

std::vector<double> sqrt2A_mul(std::span<const double> xi) {
  std::vector<double> mult = a_eigenvalues(static_cast<int>(xi.size()));
  for (double& l : mult) l = std::sqrt(2.0 * l);
  mult[0] = 0.0;
  return spectral_multiply(xi, mult);
}

AbarOperator::AbarOperator(int n, int m) : n_(n), m_(m) {
  if (m < 1 || n < 1 || n % m != 0) {
    throw ValidationError("A-bar needs M dividing N (got N=" + std::to_string(n) +
                          ", M=" + std::to_string(m) + ")");
  }
  const int K = n / m;
  abar_inv_.resize(m, m);
  std::vector<double> e(m);
  for (int j = 0; j < m; ++j) {
    std::fill(e.begin(), e.end(), -1.0 / m);
    e[j] += 1.0;
    const auto col = project_P(solve_A(lift_Pt(e, K)), K);
    for (int i = 0; i < m; ++i) abar_inv_(i, j) = col[i];
  }
  abar_inv_ = 0.5 * (abar_inv_ + abar_inv_.transpose()).eval();
  // Pseudo-inverse on the mean-zero subspace: the constant vector is the only
  // null direction of P A^{-1} N P^t restricted to mean-zero inputs.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(abar_inv_);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Eigen::MatrixXd& V = es.eigenvectors();
  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(double(m)));
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < m; ++k) {
    if (std::abs(V.col(k).dot(ones)) > 0.5) continue;
    if (!(ev[k] > 0.0)) throw InconsistencyError("A-bar inverse is not positive on mean-zero profiles");
    inv[k] = 1.0 / ev[k];
  }
  abar_ = V * inv.asDiagonal() * V.transpose();
}

void AbarOperator::check(std::span<const double> v) const {
  if (v.size() != static_cast<std::size_t>(m_)) throw ValidationError("A-bar size mismatch");
  check_mean_zero(v, "A-bar");
}

std::vector<double> AbarOperator::apply(std::span<const double> v) const {
  check(v);
  Eigen::Map<const Eigen::VectorXd> vv(v.data(), m_);
  Eigen::VectorXd r = abar_ * vv;
  return {r.data(), r.data() + m_};
}

std::vector<double> AbarOperator::apply_inverse(std::span<const double> w) const {
  check(w);
  Eigen::Map<const Eigen::VectorXd> ww(w.data(), m_);
  Eigen::VectorXd r = abar_inv_ * ww;
  return {r.data(), r.data() + m_};
}

std::shared_ptr<const AbarOperator> abar_operator(int n, int m) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const AbarOperator>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({n, m});
    if (it != cache.end()) return it->second;
  }
  auto op = std::make_shared<const AbarOperator>(n, m);
  std::lock_guard lock(mutex);
  return cache.emplace(std::make_pair(n, m), std::move(op)).first->second;
}

std::vector<double> abar_apply(int m, int n, std::span<const double> v) {
  return abar_operator(n, m)->apply(v);
}

double hminus1_sq_discrete(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  check_mean_zero(x, "hminus1_sq_discrete");
  std::vector<double> F(n);
  F[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) F[i] = F[i - 1] + x[i - 1] / n;
  center(F);
  double s = 0.0;
  for (double f : F) s += f * f;
  return s / n;
}

double hminus1_sq_step(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  check_mean_zero(values, "hminus1_sq_step");
  // Node values of the piecewise-linear primitive, then the exact integral of
  // its square minus the square of its mean.
  const double h = 1.0 / static_cast<double>(n);
  std::vector<double> w(n + 1);
  w[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) w[i + 1] = w[i] + values[i] * h;
  double sq = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sq += (w[i] * w[i] + w[i] * w[i + 1] + w[i + 1] * w[i + 1]) / 3.0;
    lin += 0.5 * (w[i] + w[i + 1]);
  }
  sq *= h;
  lin *= h;
  return std::max(0.0, sq - lin * lin);
}

std::vector<double> refine_step(std::span<const double> values, int factor) {
  return lift_Pt(values, factor);
}

double hminus1_sq_step_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t na = a.size(), nb = b.size();
  if (na == 0 || nb == 0) throw ValidationError("empty step function");
  std::vector<double> diff;
  if (na >= nb) {
    if (na % nb != 0) throw ValidationError("step grids must be nested");
    diff = refine_step(b, static_cast<int>(na / nb));
    for (std::size_t i = 0; i < na; ++i) diff[i] = a[i] - diff[i];
  } else {
    if (nb % na != 0) throw ValidationError("step grids must be nested");
    diff = refine_step(a, static_cast<int>(nb / na));
    for (std::size_t i = 0; i < nb; ++i) diff[i] -= b[i];
  }
  center(diff);
  return hminus1_sq_step(diff);
}

double theta_sample(std::span<const double> x, std::span<const double> eta, int K) {
  if (x.size() != eta.size() * static_cast<std::size_t>(K)) {
    throw ValidationError("theta: N must equal K * M");
  }
  std::vector<double> d(x.begin(), x.end());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= eta[i / K];
  // Rounding drift only: both x and NP^t eta carry the same mean.
  center(d);
  return 0.5 * hminus1_sq_discrete(d);
}

MeanEstimate theta(std::span<const MicroState> samples, const MacroProfile& eta, int K) {
  if (samples.empty()) throw ValidationError("theta needs at least one sample");
  const std::size_t n = samples.size();
  double sum = 0.0, sum2 = 0.0;
  for (const auto& s : samples) {
    const double v = theta_sample(s.x, eta.y, K);
    sum += v;
    sum2 += v * v;
  }
  MeanEstimate e;
  e.mean = sum / n;
  if (n > 1) {
    const double var = std::max(0.0, (sum2 - n * e.mean * e.mean) / (n - 1));
    e.std_error = std::sqrt(var / n);
  }
  return e;
}

std::vector<double> fluctuation(std::span<const double> x, int K) {
  const auto y = project_P(x, K);
  std::vector<double> q(x.begin(), x.end());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] -= y[i / K];
  return q;
}

double fluctuation_poincare_gamma(int n, int m, int max_iter, double rtol) {
  if (m < 1 || n % m != 0) throw ValidationError("gamma: M must divide N");
  const int K = n / m;
  CounterStream rng(0x9e3779b97f4a7c15ULL, static_cast<std::uint64_t>(n) * 131 + m);
  std::vector<double> v(n);
  rng.fill_normal(v);
  v = fluctuation(v, K);
  double rq = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    double norm = 0.0;
    for (double c : v) norm += c * c;
    norm = std::sqrt(norm);
    for (double& c : v) c /= norm;
    // v is already a fluctuation (block means zero), hence mean-zero.
    auto w = fluctuation(solve_A(v), K);
    double next = 0.0;
    for (int i = 0; i < n; ++i) next += v[i] * w[i];
    v = std::move(w);
    if (it > 10 && std::abs(next - rq) <= rtol * std::abs(next)) return next * m * double(m);
    rq = next;
  }
  return rq * m * double(m);
}

}  // namespace glhydro
