#include "glhydro/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "glhydro/errors.hpp"

namespace glhydro {
namespace {

constexpr double kOverflowGuard = 1e6;

void check_field(std::span<const double> field, std::size_t n) {
  if (field.size() != n) {
    throw ValidationError("field has " + std::to_string(field.size()) + " values, lattice has " +
                          std::to_string(n));
  }
}

}  // namespace

std::vector<double> grad_H(const Potential& pot, std::span<const double> field,
                           std::span<const double> x) {
  check_field(field, x.size());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = pot.d1(x[i]) + field[i];
  return g;
}

double hamiltonian(const Potential& pot, std::span<const double> field, std::span<const double> x) {
  check_field(field, x.size());
  double h = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) h += pot.value(x[i]) + field[i] * x[i];
  return h;
}

double stable_dt(const Potential& pot, std::span<const double> x, double guard) {
  double c = 0.0;
  for (double v : x) c = std::max(c, pot.d2(v));
  const double n = static_cast<double>(x.size());
  return guard / (4.0 * n * n * std::max(c, 1e-300));
}

void kawasaki_step(MicroState& state, const Potential& pot, std::span<const double> field,
                   double dt, CounterStream* noise, std::size_t step_index) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  const auto drift = apply_A(grad_H(pot, field, state.x));
  const std::size_t n = state.x.size();
  if (noise != nullptr) {
    std::vector<double> xi(n);
    noise->fill_normal(xi);
    const auto kick = sqrt2A_mul(xi);
    const double sdt = std::sqrt(dt);
    for (std::size_t i = 0; i < n; ++i) state.x[i] += -drift[i] * dt + sdt * kick[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) state.x[i] -= drift[i] * dt;
  }
  double shift = 0.0;
  for (double v : state.x) {
    if (!(std::abs(v) <= kOverflowGuard)) throw IntegrationError("Kawasaki state exploded", step_index);
    shift += v;
  }
  shift = state.mean - shift / static_cast<double>(n);
  for (double& v : state.x) v += shift;
}

OuPropagator::OuPropagator(const Potential& pot, std::span<const double> field, double mean,
                           double dt)
    : dt_(dt) {
  if (!pot.is_quadratic()) throw ValidationError("exact OU transition needs a quadratic potential");
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  const double c = pot.d2(0.0);
  const double abar = mean_of(field);
  fixed_point_.resize(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) fixed_point_[i] = mean - (field[i] - abar) / c;
  const auto lam = a_eigenvalues(static_cast<int>(field.size()));
  decay_.resize(lam.size());
  noise_scale_.resize(lam.size());
  for (std::size_t k = 0; k < lam.size(); ++k) {
    const double r = c * lam[k] * dt;
    decay_[k] = std::exp(-r);
    noise_scale_[k] = std::sqrt(-std::expm1(-2.0 * r) / c);
  }
  decay_[0] = 1.0;
  noise_scale_[0] = 0.0;
}

void OuPropagator::step(MicroState& state, CounterStream* noise) const {
  const std::size_t n = state.x.size();
  check_field(fixed_point_, n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = state.x[i] - fixed_point_[i];
  y = spectral_multiply(y, decay_);
  if (noise != nullptr) {
    std::vector<double> xi(n);
    noise->fill_normal(xi);
    const auto kick = spectral_multiply(xi, noise_scale_);
    for (std::size_t i = 0; i < n; ++i) y[i] += kick[i];
  }
  for (std::size_t i = 0; i < n; ++i) state.x[i] = fixed_point_[i] + y[i];
  const double shift = state.mean - mean_of(state.x);
  for (double& v : state.x) v += shift;
}

std::size_t advance(MicroState& state, const Potential& pot, std::span<const double> field,
                    double t0, double t1, const SdeConfig& cfg, CounterStream& noise) {
  if (t1 <= t0) return 0;
  if (pot.is_quadratic()) {
    OuPropagator(pot, field, state.mean, t1 - t0).step(state, &noise);
    return 1;
  }
  std::size_t steps = 0;
  double t = t0;
  double guard_dt = 0.0;
  while (t < t1) {
    if (steps % static_cast<std::size_t>(std::max(cfg.record_every, 1)) == 0) {
      guard_dt = stable_dt(pot, state.x, cfg.cfl_guard);
    }
    double h = std::min(cfg.dt, guard_dt);
    bool last = false;
    if (t + h >= t1 * (1.0 - 1e-14)) {
      h = t1 - t;
      last = true;
    }
    kawasaki_step(state, pot, field, h, &noise, steps);
    ++steps;
    t = last ? t1 : t + h;
  }
  return steps;
}

InitialSampler::InitialSampler(const Potential& pot, std::span<const double> field,
                               std::span<const double> eta0, double tol) {
  const std::size_t n = field.size();
  const std::size_t m = eta0.size();
  if (m == 0 || n % m != 0) throw ValidationError("initial profile size must divide the lattice size");
  K_ = static_cast<int>(n / m);
  mean_ = mean_of(eta0);
  sigma_.resize(m);
  sites_.resize(n);
  std::map<double, int> tilt_index;
  std::map<double, double> log_z;
  auto phi_star = [&](double s) {
    auto it = log_z.find(s);
    if (it != log_z.end()) return it->second;
    const double v = log_partition_1d(pot, s, tol).log_z;
    log_z.emplace(s, v);
    return v;
  };
  const bool gauss = pot.is_quadratic();
  const double c = pot.d2(0.0);
  entropy_ = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto block = field.subspan(i * K_, K_);
    sigma_[i] = sigma_of_m(pot, block, eta0[i], tol);
    for (int j = 0; j < K_; ++j) {
      const std::size_t site = i * K_ + j;
      const double s = sigma_[i] - field[site];
      Site& st = sites_[site];
      double mean_j;
      if (gauss) {
        st.loc = s / c;
        st.scale = 1.0 / std::sqrt(c);
        mean_j = st.loc;
      } else {
        auto it = tilt_index.find(s);
        if (it == tilt_index.end()) {
          tilts_.push_back(DiscreteTilt::build(pot, s, inner_tol(tol)));
          it = tilt_index.emplace(s, static_cast<int>(tilts_.size()) - 1).first;
        }
        st.tilt = it->second;
        mean_j = tilts_[st.tilt].moments().m;
      }
      entropy_ += sigma_[i] * mean_j - phi_star(s) + phi_star(-field[site]);
    }
  }
}

MicroState InitialSampler::sample(CounterStream& rng) const {
  MicroState s;
  s.mean = mean_;
  s.x.resize(sites_.size());
  for (std::size_t j = 0; j < sites_.size(); ++j) {
    const Site& st = sites_[j];
    s.x[j] = st.tilt < 0 ? st.loc + st.scale * rng.next_normal()
                         : tilts_[st.tilt].quantile(rng.next_uniform());
  }
  const double shift = mean_ - mean_of(s.x);
  for (double& v : s.x) v += shift;
  return s;
}

InitialSample sample_initial(const MacroProfile& eta0, const Potential& pot,
                             std::span<const double> field, CounterStream& rng, double tol) {
  InitialSampler sampler(pot, field, eta0.y, tol);
  return {sampler.sample(rng), sampler.entropy()};
}

MacroOde::MacroOde(int n, std::vector<FreeEnergyModel> blocks)
    : n_(n), blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw ValidationError("macro ODE needs at least one block");
  abar_ = abar_operator(n_, static_cast<int>(blocks_.size()));
}

std::vector<double> MacroOde::velocity(std::span<const double> eta) const {
  const std::size_t m = blocks_.size();
  if (eta.size() != m) throw ValidationError("macro profile size mismatch");
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = blocks_[i].derivative(eta[i]);
  center(g);
  auto v = abar_->apply(g);
  for (double& x : v) x = -x;
  return v;
}

double MacroOde::energy(std::span<const double> eta) const {
  double e = 0.0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) e += blocks_[i](eta[i]).value;
  return e / static_cast<double>(blocks_.size());
}

MacroProfile MacroOde::step(const MacroProfile& eta, double dt) const {
  const std::size_t m = blocks_.size();
  auto shifted = [&](const std::vector<double>& k, double h) {
    std::vector<double> y(eta.y);
    for (std::size_t i = 0; i < m; ++i) y[i] += h * k[i];
    return y;
  };
  const auto k1 = velocity(eta.y);
  const auto k2 = velocity(shifted(k1, 0.5 * dt));
  const auto k3 = velocity(shifted(k2, 0.5 * dt));
  const auto k4 = velocity(shifted(k3, dt));
  MacroProfile out;
  out.mean = eta.mean;
  out.y.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.y[i] = eta.y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  const double shift = eta.mean - mean_of(out.y);
  for (double& v : out.y) v += shift;
  return out;
}

MacroProfile macro_ode_step(const MacroProfile& eta, const MacroOde& ode, double dt) {
  return ode.step(eta, dt);
}

double PdeGrid::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double pde_max_dt(const PdeGrid& grid, const FreeEnergyModel& fe) {
  double c = 0.0;
  for (double v : grid.values) c = std::max(c, fe(v).d2);
  const double h = grid.dtheta();
  return h * h / (2.0 * std::max(c, 1e-300));
}

namespace {

void pde_update(const std::vector<double>& z, std::vector<double>& mu, std::vector<double>& out,
                const FreeEnergyModel& fe, double dt) {
  const std::size_t g = z.size();
  const double r = dt * static_cast<double>(g) * static_cast<double>(g);
  for (std::size_t j = 0; j < g; ++j) mu[j] = fe.derivative(z[j]);
  out[0] = z[0] + r * (mu[1] - 2.0 * mu[0] + mu[g - 1]);
  for (std::size_t j = 1; j + 1 < g; ++j) out[j] = z[j] + r * (mu[j + 1] - 2.0 * mu[j] + mu[j - 1]);
  out[g - 1] = z[g - 1] + r * (mu[0] - 2.0 * mu[g - 1] + mu[g - 2]);
}

}  // namespace

PdeGrid hydro_pde_step(const PdeGrid& grid, const FreeEnergyModel& fe, double dt) {
  if (grid.g() < 3) throw ValidationError("PDE grid needs at least 3 cells");
  const double limit = pde_max_dt(grid, fe);
  if (dt > limit * (1.0 + 1e-12)) throw CflError(dt, limit);
  PdeGrid out;
  out.values.resize(grid.values.size());
  std::vector<double> mu(grid.values.size());
  pde_update(grid.values, mu, out.values, fe, dt);
  return out;
}

void hydro_pde_advance(PdeGrid& grid, const FreeEnergyModel& fe, double t0, double t1,
                       double safety) {
  if (t1 <= t0) return;
  if (grid.g() < 3) throw ValidationError("PDE grid needs at least 3 cells");
  // The explicit scheme is monotone under the CFL restriction, so values stay in
  // their initial range and one bound on phi~'' over that range serves the
  // whole interval.
  const auto [lo_it, hi_it] = std::minmax_element(grid.values.begin(), grid.values.end());
  const double lo = *lo_it, hi = *hi_it;
  double c = std::max(fe(lo).d2, fe(hi).d2);
  const auto nodes = fe.grid();
  const auto d2 = fe.d2();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= lo && nodes[i] <= hi) c = std::max(c, d2[i]);
  }
  for (int s = 1; s < 256; ++s) c = std::max(c, fe(lo + (hi - lo) * s / 256.0).d2);
  const double h = grid.dtheta();
  const double dt_max = safety * h * h / (2.0 * c * 1.05);
  const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / dt_max));
  const double dt = (t1 - t0) / static_cast<double>(steps);
  std::vector<double> mu(grid.values.size()), next(grid.values.size());
  for (std::size_t k = 0; k < steps; ++k) {
    pde_update(grid.values, mu, next, fe, dt);
    grid.values.swap(next);
  }
}

double pde_energy(const PdeGrid& grid, const FreeEnergyModel& fe) {
  double e = 0.0;
  for (double v : grid.values) e += fe(v).value;
  return e * grid.dtheta();
}

LyapunovReport lyapunov_audit(std::span<const double> energies) {
  LyapunovReport r;
  if (energies.empty()) return r;
  r.initial = energies.front();
  r.tolerance = 1e-8 * (std::abs(r.initial) + 1.0);
  for (std::size_t k = 1; k < energies.size(); ++k) {
    r.max_increment = std::max(r.max_increment, energies[k] - energies[k - 1]);
  }
  r.pass = r.max_increment <= r.tolerance;
  return r;
}

}  // namespace glhydro
