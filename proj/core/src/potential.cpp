#include "glhydro/potential.hpp"

#include <cmath>

#include "glhydro/errors.hpp"

namespace glhydro {

Potential Potential::gaussian() {
  return Potential(PotentialKind::gaussian, "gaussian", 0.0, 1.0, 2.0, 0.5, 0.5);
}

Potential Potential::quartic() {
  return Potential(PotentialKind::quartic, "quartic", 0.0, 1.0, 4.0, 1.0, 3.0);
}

Potential Potential::perturbed_quartic(double amplitude) {
  if (!std::isfinite(amplitude)) throw ValidationError("perturbation amplitude must be finite");
  return Potential(PotentialKind::perturbed_quartic, "perturbed_quartic", amplitude,
                   1.0, 4.0, 1.0, 3.0);
}

Potential Potential::from_name(std::string_view kind, double perturb_amp) {
  if (kind == "gaussian") return gaussian();
  if (kind == "quartic") return quartic();
  if (kind == "perturbed_quartic") return perturbed_quartic(perturb_amp);
  throw ValidationError("unknown potential kind '" + std::string(kind) + "'");
}

Eval3 Potential::delta_psi(double x) const noexcept {
  if (amp_ == 0.0) return {};
  const double c = std::cos(x);
  return {amp_ * c, -amp_ * std::sin(x), -amp_ * c};
}

double Potential::d1(double x) const noexcept {
  double v = kind_ == PotentialKind::gaussian ? x : x * x * x + x;
  if (amp_ != 0.0) v -= amp_ * std::sin(x);
  return v;
}

}  // namespace glhydro
