#include "glhydro/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "glhydro/errors.hpp"
#include "glhydro/free_energy.hpp"
#include "glhydro/quadrature.hpp"
#include "glhydro/rng.hpp"

namespace glhydro {
namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

double log_fiber_density(const Potential& pot, std::span<const double> block,
                         std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += pot.value(x[i]) + block[i] * x[i];
  return -s;
}

void require_small_block(std::span<const double> block) {
  if (block.size() != 2 && block.size() != 3) {
    throw ValidationError("dense fiber computations support K = 2 or 3 only");
  }
}

/// Tensor grid on the (K-1) coordinates x_1..x_{K-1} (x_K eliminated) with
/// normalized weights of the fiber measure.
struct FiberGrid {
  int dim = 1;
  std::vector<double> center;
  double scale = 1.0;
  std::vector<std::vector<double>> u;  ///< coordinates per point
  std::vector<double> x_last;          ///< eliminated coordinate
  std::vector<double> w;               ///< normalized weights
};

FiberGrid make_fiber_grid(const Potential& pot, std::span<const double> block, double m, double tol,
                          int grid_size) {
  require_small_block(block);
  const int K = static_cast<int>(block.size());
  const double total = K * m;
  const auto mode = constrained_mode(pot, block, total);
  FiberGrid fg;
  fg.dim = K - 1;
  fg.center.assign(mode.begin(), mode.end() - 1);
  const double cut = log_cutoff(tol);
  std::vector<double> x(K);
  auto log_at = [&](std::span<const double> u) {
    double s = 0.0;
    for (int i = 0; i < K - 1; ++i) {
      x[i] = u[i];
      s += u[i];
    }
    x[K - 1] = total - s;
    return log_fiber_density(pot, block, x);
  };
  const double peak = log_at(fg.center);
  // Half-width: walk outward along every axis and diagonal until the density
  // drops below the cutoff.
  double width = 0.0;
  std::vector<std::vector<double>> dirs;
  if (K == 2) {
    dirs = {{1.0}, {-1.0}};
  } else {
    const double r = std::sqrt(0.5);
    dirs = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {r, r}, {-r, -r}, {r, -r}, {-r, r}};
  }
  const double step = 0.05 / std::sqrt(std::max(pot.d2(m), 1e-3));
  std::vector<double> u(K - 1);
  for (const auto& d : dirs) {
    double t = 0.0;
    for (int it = 0; it < 100000; ++it) {
      t += step;
      for (int i = 0; i < K - 1; ++i) u[i] = fg.center[i] + t * d[i];
      if (log_at(u) < peak - cut) break;
    }
    width = std::max(width, t);
  }
  fg.scale = width;
  const int n = grid_size > 0 ? grid_size : (K == 2 ? 4001 : 401);
  const double h = 2.0 * width / (n - 1);
  const std::size_t total_pts = K == 2 ? n : static_cast<std::size_t>(n) * n;
  fg.u.reserve(total_pts);
  std::vector<double> logw;
  logw.reserve(total_pts);
  for (std::size_t p = 0; p < total_pts; ++p) {
    std::vector<double> up(K - 1);
    up[0] = fg.center[0] - width + h * static_cast<double>(p % n);
    if (K == 3) up[1] = fg.center[1] - width + h * static_cast<double>(p / n);
    logw.push_back(log_at(up));
    fg.x_last.push_back(x[K - 1]);
    fg.u.push_back(std::move(up));
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  fg.w.resize(total_pts);
  double z = 0.0;
  for (std::size_t p = 0; p < total_pts; ++p) z += fg.w[p] = std::exp(logw[p] - mx);
  for (double& v : fg.w) v /= z;
  return fg;
}

std::vector<FiberFunction> make_family(const TestFunctionFamily& family, int dim,
                                       std::span<const double> center, double scale) {
  CounterStream rng(family.seed, static_cast<std::uint64_t>(family.kind) * 7919 + dim);
  std::vector<double> c(center.begin(), center.end());
  // Work in z = (u - center) / s with s a third of the box half-width.
  const double s = scale / 3.0;
  std::vector<FiberFunction> out;
  for (int idx = 0; idx < family.count; ++idx) {
    switch (family.kind) {
      case TestFunctionKind::fourier: {
        std::vector<std::vector<double>> k(3, std::vector<double>(dim));
        std::vector<double> amp(3), phase(3);
        for (int t = 0; t < 3; ++t) {
          for (int d = 0; d < dim; ++d) k[t][d] = std::floor(rng.next_uniform() * 7.0) - 3.0;
          amp[t] = 2.0 * rng.next_uniform() - 1.0;
          phase[t] = 2.0 * std::numbers::pi * rng.next_uniform();
        }
        auto arg = [=](std::span<const double> u, int t) {
          double a = phase[t];
          for (int d = 0; d < dim; ++d) a += k[t][d] * (u[d] - c[d]) / s;
          return a;
        };
        out.push_back({[=](std::span<const double> u) {
                         double r = 0.0;
                         for (int t = 0; t < 3; ++t) r += amp[t] * std::cos(arg(u, t));
                         return r;
                       },
                       [=](std::span<const double> u, std::span<double> g) {
                         for (int d = 0; d < dim; ++d) g[d] = 0.0;
                         for (int t = 0; t < 3; ++t) {
                           const double sn = -amp[t] * std::sin(arg(u, t));
                           for (int d = 0; d < dim; ++d) g[d] += sn * k[t][d] / s;
                         }
                       }});
        break;
      }
      case TestFunctionKind::gaussian_bump: {
        std::vector<double> mu(dim);
        for (int d = 0; d < dim; ++d) mu[d] = 2.0 * rng.next_uniform() - 1.0;
        const double width = 0.3 + 0.7 * rng.next_uniform();
        auto q = [=](std::span<const double> u, int d) { return ((u[d] - c[d]) / s - mu[d]) / width; };
        out.push_back({[=](std::span<const double> u) {
                         double e = 0.0;
                         for (int d = 0; d < dim; ++d) e += q(u, d) * q(u, d);
                         return std::exp(-0.5 * e);
                       },
                       [=](std::span<const double> u, std::span<double> g) {
                         double e = 0.0;
                         for (int d = 0; d < dim; ++d) e += q(u, d) * q(u, d);
                         const double v = std::exp(-0.5 * e);
                         for (int d = 0; d < dim; ++d) g[d] = -v * q(u, d) / (width * s);
                       }});
        break;
      }
      case TestFunctionKind::hermite: {
        std::vector<int> deg(dim);
        for (int d = 0; d < dim; ++d) deg[d] = static_cast<int>(rng.next_uniform() * 5.0);
        if (std::all_of(deg.begin(), deg.end(), [](int v) { return v == 0; })) deg[0] = 1 + idx % 4;
        // Probabilists' Hermite polynomial and derivative He_n' = n He_{n-1}.
        auto he = [](int n, double z) {
          double p0 = 1.0, p1 = z;
          if (n == 0) return p0;
          for (int j = 1; j < n; ++j) {
            const double p2 = z * p1 - j * p0;
            p0 = p1;
            p1 = p2;
          }
          return p1;
        };
        out.push_back({[=](std::span<const double> u) {
                         double r = 1.0;
                         for (int d = 0; d < dim; ++d) r *= he(deg[d], (u[d] - c[d]) / s);
                         return r;
                       },
                       [=](std::span<const double> u, std::span<double> g) {
                         for (int d = 0; d < dim; ++d) {
                           double r = deg[d] * he(deg[d] - 1, (u[d] - c[d]) / s) / s;
                           for (int e = 0; e < dim; ++e) {
                             if (e != d) r *= he(deg[e], (u[e] - c[e]) / s);
                           }
                           g[d] = deg[d] == 0 ? 0.0 : r;
                         }
                       }});
        break;
      }
    }
  }
  return out;
}

CovarianceRow ratio_on_grid(const Potential& pot, const FiberGrid& fg, const FiberFunction& fn,
                            double& mass_error) {
  const std::size_t np = fg.w.size();
  const int dim = fg.dim;
  const int K = dim + 1;
  std::vector<double> r(np), obs(np);
  std::vector<double> grad(static_cast<std::size_t>(dim) * np);
  double rmin = INFINITY, rmax = -INFINITY;
  for (std::size_t p = 0; p < np; ++p) {
    r[p] = fn.f(fg.u[p]);
    fn.grad(fg.u[p], std::span<double>(grad).subspan(p * dim, dim));
    rmin = std::min(rmin, r[p]);
    rmax = std::max(rmax, r[p]);
    double o = pot.d1(fg.x_last[p]);
    for (int d = 0; d < dim; ++d) o += pot.d1(fg.u[p][d]);
    obs[p] = o / K;
  }
  CovarianceRow row;
  const double range = rmax - rmin;
  if (!(range > 0.0)) return row;  // constant f: both sides vanish
  double mass = 0.0;
  for (std::size_t p = 0; p < np; ++p) mass += fg.w[p] * (r[p] - rmin + 0.5 * range);
  double ef = 0.0, eo = 0.0, efo = 0.0, fisher = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    const double f = (r[p] - rmin + 0.5 * range) / mass;
    if (!(f > 0.0)) throw ValidationError("test function not positive on the fiber");
    ef += fg.w[p] * f;
    eo += fg.w[p] * obs[p];
    efo += fg.w[p] * f * obs[p];
    double g2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double gd = grad[p * dim + d] / mass;
      g2 += gd * gd;
    }
    fisher += fg.w[p] * g2 / f;
  }
  mass_error = std::max(mass_error, std::abs(ef - 1.0));
  row.lhs = std::abs(efo - ef * eo);
  row.rhs = fisher;
  row.ratio = fisher > 0.0 ? row.lhs * row.lhs / (K * fisher) : 0.0;
  return row;
}

}  // namespace

CramerReport check_cramer(const Potential& pot, const FieldSpec& field, std::span<const int> k_list,
                          std::span<const double> m_grid, double tol, int threads) {
  CramerReport rep;
  std::vector<double> lx, ly;
  for (int K : k_list) {
    if (K < 2 || K > 16) throw ValidationError("check_cramer needs 2 <= K <= 16");
    const auto block = realize_field(field, static_cast<std::size_t>(K)).values;
    const auto psi = tabulate(pot, block, FreeEnergyKind::psi_K, m_grid, tol, threads);
    const auto phi = tabulate(pot, block, FreeEnergyKind::phi_K, m_grid, tol, threads);
    CramerRow row;
    row.K = K;
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
      const double d = std::abs(psi.values()[i] - phi.values()[i]);
      if (d > row.sup_diff) {
        row.sup_diff = d;
        row.argsup = m_grid[i];
      }
    }
    row.min_psi_d2 = psi.min_d2();
    row.min_phi_d2 = phi.min_d2();
    rep.rows.push_back(row);
    if (row.sup_diff > 0.0) {
      lx.push_back(std::log(static_cast<double>(K)));
      ly.push_back(std::log(row.sup_diff));
    }
  }
  rep.slope = fit_slope(lx, ly);
  return rep;
}

CaputoReport check_caputo(const Potential& pot, std::span<const double> sigma_grid, double tol) {
  CaputoReport rep;
  for (double s : sigma_grid) {
    const auto t = log_partition_1d(pot, s, tol);
    const double r = t.s2 * pot.psi_c(t.m).d2;
    rep.sigma.push_back(s);
    rep.ratio.push_back(r);
    rep.C = std::max({rep.C, r, 1.0 / r});
  }
  return rep;
}

AsymBlReport check_asym_bl(const Potential& pot, const Smooth1d& f, const Smooth1d& g, double tol) {
  const auto tilt = DiscreteTilt::build(pot, 0.0, inner_tol(tol));
  const auto x = tilt.nodes();
  const auto p = tilt.probs();
  double ef = 0, eg = 0, efg = 0, l1 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fv = f.f(x[i]), gv = g.f(x[i]);
    ef += p[i] * fv;
    eg += p[i] * gv;
    efg += p[i] * fv * gv;
    l1 += p[i] * std::abs(f.df(x[i]));
  }
  AsymBlReport rep;
  rep.lhs = std::abs(efg - ef * eg);
  double sup = 0.0;
  auto probe = [&](double v) { sup = std::max(sup, std::abs(g.df(v) / pot.psi_c(v).d2)); };
  for (double v : x) probe(v);
  for (int i = -40000; i <= 40000; ++i) probe(i * 5e-4);
  rep.sup_ratio = sup;
  rep.l1_df = l1;
  rep.factor_plus = std::exp(3.0 * pot.delta_osc());
  rep.factor_minus = std::exp(-3.0 * pot.delta_osc());
  rep.rhs = rep.factor_plus * sup * l1;
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

TestFunctionKind test_function_kind_from_name(const std::string& name) {
  if (name == "fourier") return TestFunctionKind::fourier;
  if (name == "gaussian_bump") return TestFunctionKind::gaussian_bump;
  if (name == "hermite") return TestFunctionKind::hermite;
  throw ValidationError("unknown test function family '" + name + "'");
}

CovarianceReport check_covariance_estimate(const Potential& pot, std::span<const double> block,
                                           double m, const TestFunctionFamily& family, double tol,
                                           int grid_size) {
  const auto fg = make_fiber_grid(pot, block, m, tol, grid_size);
  const auto fns = make_family(family, fg.dim, fg.center, fg.scale);
  CovarianceReport rep;
  rep.K = static_cast<int>(block.size());
  rep.m = m;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    auto row = ratio_on_grid(pot, fg, fns[i], rep.mass_error);
    row.index = static_cast<int>(i);
    rep.worst_ratio = std::max(rep.worst_ratio, row.ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

CovarianceRow covariance_ratio(const Potential& pot, std::span<const double> block, double m,
                               const FiberFunction& fn, double tol, int grid_size) {
  const auto fg = make_fiber_grid(pot, block, m, tol, grid_size);
  double mass_error = 0.0;
  return ratio_on_grid(pot, fg, fn, mass_error);
}

namespace {

/// Finite-volume gap on a fixed box in orthonormal fiber coordinates.
double gap_on_box(const Potential& pot, std::span<const double> block, std::span<const double> mode,
                  const Eigen::MatrixXd& Q, double half_width, double h) {
  const int K = static_cast<int>(block.size());
  const int dim = K - 1;
  const int n = 2 * static_cast<int>(std::lround(half_width / h)) + 1;
  const double w = h * (n - 1) / 2.0;
  const std::size_t np = dim == 1 ? n : static_cast<std::size_t>(n) * n;
  std::vector<double> x(K);
  auto log_rho = [&](double v0, double v1) {
    for (int i = 0; i < K; ++i) {
      x[i] = mode[i] + Q(i, 0) * v0 + (dim == 2 ? Q(i, 1) * v1 : 0.0);
    }
    return log_fiber_density(pot, block, x);
  };
  auto coord = [&](int j) { return -w + h * j; };
  std::vector<double> lr(np);
  for (std::size_t p = 0; p < np; ++p) {
    const int j0 = static_cast<int>(p % n);
    const int j1 = static_cast<int>(p / n);
    lr[p] = log_rho(coord(j0), dim == 2 ? coord(j1) : 0.0);
  }
  // Symmetrized generator S = D^{-1/2} L D^{-1/2}: off-diagonal -rho_mid /
  // sqrt(rho_p rho_q) / h^2, diagonal sum of rho_mid / rho_p / h^2.
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> diag(np, 0.0);
  const double ih2 = 1.0 / (h * h);
  auto add_edge = [&](std::size_t p, std::size_t q, double lmid) {
    const double off = std::exp(std::min(lmid - 0.5 * (lr[p] + lr[q]), 700.0)) * ih2;
    trip.emplace_back(p, q, -off);
    trip.emplace_back(q, p, -off);
    diag[p] += std::exp(std::min(lmid - lr[p], 700.0)) * ih2;
    diag[q] += std::exp(std::min(lmid - lr[q], 700.0)) * ih2;
  };
  for (std::size_t p = 0; p < np; ++p) {
    const int j0 = static_cast<int>(p % n);
    const int j1 = static_cast<int>(p / n);
    if (j0 + 1 < n) {
      const double v1 = dim == 2 ? coord(j1) : 0.0;
      add_edge(p, p + 1, log_rho(coord(j0) + 0.5 * h, v1));
    }
    if (dim == 2 && j1 + 1 < n) add_edge(p, p + n, log_rho(coord(j0), coord(j1) + 0.5 * h));
  }
  const double shift = 1e-6;
  for (std::size_t p = 0; p < np; ++p) trip.emplace_back(p, p, diag[p] + shift);
  Eigen::SparseMatrix<double> S(np, np);
  S.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(S);
  if (solver.info() != Eigen::Success) throw ConvergenceError("gap: factorization failed");

  // Null vector sqrt(rho), normalized.
  const double lmax = *std::max_element(lr.begin(), lr.end());
  Eigen::VectorXd q(np);
  for (std::size_t p = 0; p < np; ++p) q[p] = std::exp(0.5 * (lr[p] - lmax));
  q.normalize();
  CounterStream rng(0x51ab, np);
  Eigen::VectorXd v(np);
  for (std::size_t p = 0; p < np; ++p) v[p] = rng.next_normal() * q[p] + 1e-3 * q[p] * (p % 7);
  double rq_prev = 0.0;
  for (int it = 0; it < 5000; ++it) {
    v -= q.dot(v) * q;
    v.normalize();
    Eigen::VectorXd sv = S * v;
    const double rq = v.dot(sv) - shift;
    if (it > 5 && std::abs(rq - rq_prev) <= 1e-13 * std::abs(rq)) return rq;
    rq_prev = rq;
    v = solver.solve(v);
    if (solver.info() != Eigen::Success) throw ConvergenceError("gap: solve failed");
  }
  throw ConvergenceError("gap: inverse iteration did not converge");
}

}  // namespace

GapResult spectral_gap_canonical(const Potential& pot, std::span<const double> block, double m,
                                 int grid_size) {
  require_small_block(block);
  if (grid_size < 5 || grid_size % 2 == 0) throw ValidationError("gap grid size must be odd and >= 5");
  const int K = static_cast<int>(block.size());
  const auto mode = constrained_mode(pot, block, K * m);
  Eigen::MatrixXd Q(K, K - 1);
  if (K == 2) {
    Q << std::sqrt(0.5), -std::sqrt(0.5);
  } else {
    Q << std::sqrt(0.5), 1 / std::sqrt(6.0), -std::sqrt(0.5), 1 / std::sqrt(6.0), 0.0,
        -2 / std::sqrt(6.0);
  }
  // Initial half-width: largest distance along the coordinate axes at which the
  // log density falls 12 below its peak.
  std::vector<double> x(K);
  auto drop_at = [&](double t, int axis) {
    for (int i = 0; i < K; ++i) x[i] = mode[i] + Q(i, axis) * t;
    return log_fiber_density(pot, block, mode) - log_fiber_density(pot, block, x);
  };
  double w0 = 0.0;
  for (int axis = 0; axis < K - 1; ++axis) {
    for (double sgn : {-1.0, 1.0}) {
      double t = 0.0;
      while (drop_at(sgn * t, axis) < 12.0 && t < 1e3) t += 0.01;
      w0 = std::max(w0, t);
    }
  }
  const double h = 2.0 * w0 / (grid_size - 1);
  GapResult res;
  double w = w0;
  double gap = gap_on_box(pot, block, mode, Q, w, h);
  for (int it = 1; it <= 12; ++it) {
    const double w_next = 1.25 * w;
    const double next = gap_on_box(pot, block, mode, Q, w_next, h);
    res.box_iterations = it;
    const double change = std::abs(next - gap) / std::abs(next);
    w = w_next;
    gap = next;
    if (change < 0.01) break;
  }
  res.gap = gap;
  res.half_width = w;
  res.nodes_per_axis = 2 * static_cast<int>(std::lround(w / h)) + 1;
  return res;
}

}  // namespace glhydro
