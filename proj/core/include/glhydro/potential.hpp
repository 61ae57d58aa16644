#pragma once

#include <string>
#include <string_view>
#include <utility>

namespace glhydro {

/// Value and first two derivatives of a scalar function at one point.
struct Eval3 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

enum class PotentialKind { gaussian, quartic, perturbed_quartic };

/// Single-site potential psi = psi_c + delta_psi, with psi_c uniformly convex and
/// delta_psi bounded together with its derivative.
///
/// The built-in family:
///   gaussian           psi_c = x^2/2,             delta_psi = 0
///   quartic            psi_c = x^4/4 + x^2/2,     delta_psi = 0
///   perturbed_quartic  psi_c = x^4/4 + x^2/2,     delta_psi = b cos x
///
/// Growth metadata (lambda_min, p, c1, c2) describes the sandwich
/// c1 (1 + |x|^{p-2}) <= psi_c''(x) <= c2 (1 + |x|^{p-2}).
class Potential {
 public:
  static Potential gaussian();
  static Potential quartic();
  static Potential perturbed_quartic(double amplitude = 0.1);
  /// Parses "gaussian" | "quartic" | "perturbed_quartic".
  static Potential from_name(std::string_view kind, double perturb_amp = 0.1);

  PotentialKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double perturb_amp() const noexcept { return amp_; }
  double lambda_min() const noexcept { return lambda_min_; }
  double growth_exponent() const noexcept { return p_; }
  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }
  /// (sup|delta_psi|, sup|delta_psi'|).
  std::pair<double, double> delta_bounds() const noexcept { return {abs_amp(), abs_amp()}; }
  /// Oscillation sup(delta_psi) - inf(delta_psi).
  double delta_osc() const noexcept { return 2.0 * abs_amp(); }
  /// True when psi'' is a constant; enables closed-form Gaussian paths.
  bool is_quadratic() const noexcept { return kind_ == PotentialKind::gaussian; }

  Eval3 psi_c(double x) const noexcept {
    if (kind_ == PotentialKind::gaussian) return {0.5 * x * x, x, 1.0};
    const double x2 = x * x;
    return {0.25 * x2 * x2 + 0.5 * x2, x2 * x + x, 3.0 * x2 + 1.0};
  }

  Eval3 delta_psi(double x) const noexcept;

  Eval3 eval(double x) const noexcept {
    Eval3 c = psi_c(x);
    if (amp_ != 0.0) {
      const Eval3 d = delta_psi(x);
      c.value += d.value;
      c.d1 += d.d1;
      c.d2 += d.d2;
    }
    return c;
  }

  double value(double x) const noexcept { return eval(x).value; }
  double d1(double x) const noexcept;
  double d2(double x) const noexcept { return eval(x).d2; }

 private:
  double abs_amp() const noexcept { return amp_ < 0.0 ? -amp_ : amp_; }

  Potential(PotentialKind kind, std::string name, double amp, double lambda_min, double p,
            double c1, double c2)
      : kind_(kind), name_(std::move(name)), amp_(amp), lambda_min_(lambda_min), p_(p),
        c1_(c1), c2_(c2) {}

  PotentialKind kind_;
  std::string name_;
  double amp_;
  double lambda_min_;
  double p_;
  double c1_;
  double c2_;
};

/// eval_potential: (psi, psi', psi'') with analytic derivatives.
inline Eval3 eval_potential(const Potential& pot, double x) { return pot.eval(x); }

}  // namespace glhydro
