#include "glhydro/field.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "glhydro/errors.hpp"
#include "glhydro/rng.hpp"

namespace glhydro {

FieldKind field_kind_from_name(std::string_view name) {
  if (name == "zero") return FieldKind::zero;
  if (name == "two_point") return FieldKind::two_point;
  if (name == "uniform") return FieldKind::uniform;
  if (name == "custom_discrete") return FieldKind::custom_discrete;
  throw ValidationError("unknown field kind '" + std::string(name) + "'");
}

std::string_view field_kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::zero: return "zero";
    case FieldKind::two_point: return "two_point";
    case FieldKind::uniform: return "uniform";
    case FieldKind::custom_discrete: return "custom_discrete";
  }
  return "?";
}

FieldSpec FieldSpec::zero() { return {}; }

FieldSpec FieldSpec::two_point(double L, std::uint64_t seed) {
  FieldSpec s;
  s.kind = FieldKind::two_point;
  s.L = L;
  s.master_seed = seed;
  return s;
}

FieldSpec FieldSpec::uniform(double L, std::uint64_t seed) {
  FieldSpec s = two_point(L, seed);
  s.kind = FieldKind::uniform;
  return s;
}

FieldSpec FieldSpec::custom(std::vector<Atom> atoms, double L, std::uint64_t seed) {
  FieldSpec s;
  s.kind = FieldKind::custom_discrete;
  s.L = L;
  s.atoms = std::move(atoms);
  s.master_seed = seed;
  return s;
}

void FieldSpec::validate() const {
  if (!(L >= 0.0) || !std::isfinite(L)) throw ValidationError("field bound L must be >= 0");
  if (kind != FieldKind::custom_discrete) return;
  if (atoms.empty()) throw ValidationError("custom_discrete field needs at least one atom");
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (std::abs(a.value) > L) {
      throw ValidationError("field atom " + std::to_string(a.value) + " outside [-L, L]");
    }
    if (!(a.prob >= 0.0)) throw ValidationError("field atom probabilities must be >= 0");
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("field atom probabilities must sum to 1");
}

std::vector<Atom> FieldSpec::discrete_atoms() const {
  switch (kind) {
    case FieldKind::zero: return {{0.0, 1.0}};
    case FieldKind::two_point: return {{-L, 0.5}, {L, 0.5}};
    case FieldKind::uniform: return {};
    case FieldKind::custom_discrete: return atoms;
  }
  return {};
}

std::vector<Atom> FieldSpec::expectation_nodes(int gauss_order) const {
  if (kind != FieldKind::uniform) return discrete_atoms();
  if (L == 0.0) return {{0.0, 1.0}};
  std::vector<Atom> nodes;
  auto push = [&](double x, double w) { nodes.push_back({L * x, 0.5 * w}); };
  // Boost tabulates the non-negative abscissae only.
  auto fill = [&](const auto& abscissa, const auto& weights) {
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      if (abscissa[i] == 0.0) {
        push(0.0, weights[i]);
      } else {
        push(-abscissa[i], weights[i]);
        push(abscissa[i], weights[i]);
      }
    }
  };
  if (gauss_order <= 16) {
    using G = boost::math::quadrature::gauss<double, 16>;
    fill(G::abscissa(), G::weights());
  } else {
    using G = boost::math::quadrature::gauss<double, 32>;
    fill(G::abscissa(), G::weights());
  }
  return nodes;
}

double FieldSpec::quantile(double u) const {
  switch (kind) {
    case FieldKind::zero: return 0.0;
    case FieldKind::two_point: return u < 0.5 ? -L : L;
    case FieldKind::uniform: return -L + 2.0 * L * u;
    case FieldKind::custom_discrete: {
      if (atoms.empty()) throw ValidationError("custom_discrete field needs at least one atom");
      double acc = 0.0;
      for (const Atom& a : atoms) {
        acc += a.prob;
        if (u < acc) return a.value;
      }
      return atoms.back().value;
    }
  }
  return 0.0;
}

FieldSpec FieldSpec::with_seed(std::uint64_t seed) const {
  FieldSpec s = *this;
  s.master_seed = seed;
  return s;
}

double field_value_at(const FieldSpec& spec, std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw ValidationError("field index denominator must be positive");
  const std::uint64_t g = std::gcd(num, den);
  return spec.quantile(keyed_uniform(spec.master_seed, num / g, den / g));
}

FieldRealization realize_field(const FieldSpec& spec, std::size_t n) {
  if (n == 0) throw ValidationError("realize_field needs N >= 1");
  spec.validate();
  FieldRealization r{spec, n, std::vector<double>(n)};
  for (std::size_t i = 1; i <= n; ++i) r.values[i - 1] = field_value_at(spec, i, n);
  return r;
}

}  // namespace glhydro
