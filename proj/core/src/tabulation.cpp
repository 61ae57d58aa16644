#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "glhydro/errors.hpp"
#include "glhydro/free_energy.hpp"
#include "glhydro/parallel.hpp"

namespace glhydro {
namespace {

/// Fornberg's finite-difference weights for derivatives 0..2 at x0.
std::array<std::vector<double>, 3> fd_weights(double x0, std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::vector<std::vector<double>>> c(
      n, std::vector<std::vector<double>>(n, std::vector<double>(3, 0.0)));
  c[0][0][0] = 1.0;
  double c1 = 1.0;
  double c4 = x[0] - x0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 2);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[i][i][k] = c1 * (k * c[i - 1][i - 1][k - 1] - c5 * c[i - 1][i - 1][k]) / c2;
        }
        c[i][i][0] = -c1 * c5 * c[i - 1][i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[i][j][k] = (c4 * c[i - 1][j][k] - k * c[i - 1][j][k - 1]) / c3;
      }
      c[i][j][0] = c4 * c[i - 1][j][0] / c3;
    }
    c1 = c2;
  }
  std::array<std::vector<double>, 3> w;
  for (int k = 0; k < 3; ++k) {
    w[k].resize(n);
    for (std::size_t j = 0; j < n; ++j) w[k][j] = c[n - 1][j][k];
  }
  return w;
}

/// Finite-difference first and second derivatives of tabulated f on a grid:
/// three-point stencils in the interior, four-point one-sided at the ends.
void differentiate(std::span<const double> grid, std::span<const double> f, std::vector<double>& d1,
                   std::vector<double>& d2) {
  const std::size_t n = grid.size();
  d1.assign(n, 0.0);
  d2.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo;
    std::size_t width;
    if (i == 0 || i == n - 1) {
      width = 4;
      lo = i == 0 ? 0 : n - 4;
    } else {
      width = 3;
      lo = i - 1;
    }
    const auto w = fd_weights(grid[i], grid.subspan(lo, width));
    for (std::size_t j = 0; j < width; ++j) {
      d1[i] += w[1][j] * f[lo + j];
      d2[i] += w[2][j] * f[lo + j];
    }
  }
}

void check_grid(std::span<const double> grid) {
  if (grid.size() < 4) throw ValidationError("tabulation grid needs at least 4 nodes");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ValidationError("tabulation grid must be strictly increasing");
  }
}

[[noreturn]] void node_failure(std::size_t i, double m, const std::exception& e) {
  throw Error("tabulation failed at node " + std::to_string(i) + " (m = " + std::to_string(m) +
              "): " + e.what());
}

}  // namespace

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw ValidationError("uniform_grid needs n >= 2 and hi > lo");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  g.back() = hi;
  return g;
}

FreeEnergyModel::FreeEnergyModel(FreeEnergyKind kind, std::vector<double> block,
                                 std::vector<double> grid, std::vector<double> values,
                                 std::vector<double> d1, std::vector<double> d2)
    : kind_(kind), block_(std::move(block)), grid_(std::move(grid)), values_(std::move(values)),
      d1_(std::move(d1)), d2_(std::move(d2)) {
  check_grid(grid_);
  const std::size_t n = grid_.size();
  if (values_.size() != n || d1_.size() != n || d2_.size() != n) {
    throw ValidationError("tabulation arrays must match the grid size");
  }
  const double h0 = (grid_.back() - grid_.front()) / static_cast<double>(n - 1);
  uniform_ = true;
  for (std::size_t i = 0; i + 1 < n && uniform_; ++i) {
    uniform_ = std::abs(grid_[i + 1] - grid_[i] - h0) <= 1e-9 * h0;
  }
  inv_h_ = 1.0 / h0;
  slope_ = d2_;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid_[i + 1] - grid_[i];
    const double delta = (d1_[i + 1] - d1_[i]) / h;
    if (delta == 0.0) {
      slope_[i] = slope_[i + 1] = 0.0;
      continue;
    }
    double alpha = slope_[i] / delta;
    double beta = slope_[i + 1] / delta;
    if (alpha < 0.0) slope_[i] = alpha = 0.0;
    if (beta < 0.0) slope_[i + 1] = beta = 0.0;
    const double r = alpha * alpha + beta * beta;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      slope_[i] = tau * alpha * delta;
      slope_[i + 1] = tau * beta * delta;
    }
  }
}

std::size_t FreeEnergyModel::locate(double m) const {
  if (!covers(m)) {
    throw DomainError("m = " + std::to_string(m) + " outside tabulated range [" +
                      std::to_string(grid_.front()) + ", " + std::to_string(grid_.back()) + "]");
  }
  std::size_t i;
  if (uniform_) {
    i = static_cast<std::size_t>((m - grid_.front()) * inv_h_);
    i = std::min(i, grid_.size() - 2);
    if (m < grid_[i] && i > 0) --i;
    if (m > grid_[i + 1] && i + 2 < grid_.size()) ++i;
    return i;
  }
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), m);
  i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  return std::min(i, grid_.size() - 2);
}

Eval3 FreeEnergyModel::operator()(double m) const {
  const std::size_t i = locate(m);
  const double h = grid_[i + 1] - grid_[i];
  const double t = (m - grid_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double dh00 = (6 * t2 - 6 * t) / h, dh10 = 3 * t2 - 4 * t + 1;
  const double dh01 = (-6 * t2 + 6 * t) / h, dh11 = 3 * t2 - 2 * t;
  Eval3 out;
  out.value = h00 * values_[i] + h10 * h * d1_[i] + h01 * values_[i + 1] + h11 * h * d1_[i + 1];
  out.d1 = h00 * d1_[i] + h10 * h * slope_[i] + h01 * d1_[i + 1] + h11 * h * slope_[i + 1];
  out.d2 = dh00 * d1_[i] + dh10 * slope_[i] + dh01 * d1_[i + 1] + dh11 * slope_[i + 1];
  return out;
}

double FreeEnergyModel::derivative(double m) const {
  const std::size_t i = locate(m);
  const double h = grid_[i + 1] - grid_[i];
  const double t = (m - grid_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * d1_[i] + (t3 - 2 * t2 + t) * h * slope_[i] +
         (-2 * t3 + 3 * t2) * d1_[i + 1] + (t3 - t2) * h * slope_[i + 1];
}

double FreeEnergyModel::min_d2() const { return *std::min_element(d2_.begin(), d2_.end()); }
double FreeEnergyModel::max_d2() const { return *std::max_element(d2_.begin(), d2_.end()); }

void FreeEnergyModel::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  out << "m,value,d1,d2\n";
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    out << grid_[i] << ',' << values_[i] << ',' << d1_[i] << ',' << d2_[i] << '\n';
  }
}

FreeEnergyModel tabulate(const Potential& pot, std::span<const double> block, FreeEnergyKind kind,
                         std::span<const double> grid, double tol, int threads) {
  check_grid(grid);
  if (kind == FreeEnergyKind::phi_tilde) {
    throw ValidationError("use tabulate_phi_tilde for the hydrodynamic free energy");
  }
  const std::size_t n = grid.size();
  const double K = static_cast<double>(block.size());
  std::vector<Eval3> phi(n);
  std::vector<double> log_g(kind == FreeEnergyKind::psi_K ? n : 0);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      phi[i] = phi_K(pot, block, grid[i], tol);
      if (kind == FreeEnergyKind::psi_K) log_g[i] = std::log(g_density(pot, block, grid[i], tol));
    } catch (const std::exception& e) {
      node_failure(i, grid[i], e);
    }
  });
  std::vector<double> values(n), d1(n), d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = phi[i].value;
    d1[i] = phi[i].d1;
    d2[i] = phi[i].d2;
  }
  if (kind == FreeEnergyKind::psi_K) {
    // psi_K = phi_K - (1/K) log g: exact Legendre derivatives for phi_K and
    // finite differences on the tabulation grid for the smooth correction.
    std::vector<double> g1, g2;
    differentiate(grid, log_g, g1, g2);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] -= log_g[i] / K;
      d1[i] -= g1[i] / K;
      d2[i] -= g2[i] / K;
    }
  }
  return FreeEnergyModel(kind, std::vector<double>(block.begin(), block.end()),
                         std::vector<double>(grid.begin(), grid.end()), std::move(values),
                         std::move(d1), std::move(d2));
}

FreeEnergyModel tabulate_phi_tilde(const Potential& pot, const FieldSpec& spec,
                                   std::span<const double> grid, double tol, int threads) {
  check_grid(grid);
  const WeightedShifts shifts = law_shifts(spec);
  const std::size_t n = grid.size();
  std::vector<Eval3> phi(n);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      phi[i] = legendre(pot, shifts, grid[i], tol);
    } catch (const std::exception& e) {
      node_failure(i, grid[i], e);
    }
  });
  std::vector<double> values(n), d1(n), d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = phi[i].value;
    d1[i] = phi[i].d1;
    d2[i] = phi[i].d2;
  }
  return FreeEnergyModel(FreeEnergyKind::phi_tilde, {}, std::vector<double>(grid.begin(), grid.end()),
                         std::move(values), std::move(d1), std::move(d2));
}

}  // namespace glhydro
