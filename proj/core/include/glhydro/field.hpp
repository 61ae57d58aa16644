#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace glhydro {

enum class FieldKind { zero, two_point, uniform, custom_discrete };

FieldKind field_kind_from_name(std::string_view name);
std::string_view field_kind_name(FieldKind kind);

struct Atom {
  double value = 0.0;
  double prob = 0.0;
};

/// Law of the bounded iid random chemical potential a_q, |a_q| <= L.
struct FieldSpec {
  FieldKind kind = FieldKind::zero;
  double L = 0.0;
  /// Only used by custom_discrete.
  std::vector<Atom> atoms;
  std::uint64_t master_seed = 0;

  static FieldSpec zero();
  static FieldSpec two_point(double L, std::uint64_t seed);
  static FieldSpec uniform(double L, std::uint64_t seed);
  static FieldSpec custom(std::vector<Atom> atoms, double L, std::uint64_t seed);

  /// Throws ValidationError when atoms leave [-L, L] or probabilities do not sum to 1.
  void validate() const;

  /// The discrete support of the law; empty for uniform.
  std::vector<Atom> discrete_atoms() const;

  /// Weighted nodes representing E^a[.]: the atoms themselves for discrete laws,
  /// fixed-order Gauss-Legendre nodes on [-L, L] for the uniform law.
  std::vector<Atom> expectation_nodes(int gauss_order = 32) const;

  /// Inverse CDF of the law evaluated at u in (0,1).
  double quantile(double u) const;

  /// Same law, different realization.
  FieldSpec with_seed(std::uint64_t seed) const;
};

/// One realization a_{1,N} .. a_{N,N} with a_{i,N} = a_{i/N}.
struct FieldRealization {
  FieldSpec spec;
  std::size_t n = 0;
  std::vector<double> values;
};

/// Value of the field at the rational q = num/den (not necessarily reduced).
double field_value_at(const FieldSpec& spec, std::uint64_t num, std::uint64_t den);

/// realize_field: values[i-1] = a_{i/N}, a keyed pseudo-random function of the
/// reduced fraction i/N, so refinements of the lattice agree where they overlap.
FieldRealization realize_field(const FieldSpec& spec, std::size_t n);

}  // namespace glhydro
