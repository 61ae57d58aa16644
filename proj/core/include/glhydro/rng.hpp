#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace glhydro {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure: the output depends
/// only on (counter, key), which is what makes every stream reproducible
/// regardless of how work is scheduled.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Maps the top 53 bits of a 64-bit word to a double strictly inside (0, 1).
double to_unit_open(std::uint64_t bits);

/// Keyed uniform in (0,1) addressed by two 64-bit words; used for field values
/// indexed by reduced fractions.
double keyed_uniform(std::uint64_t key, std::uint64_t word0, std::uint64_t word1);

/// Derives a child seed from (seed, index) without correlation between siblings.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Counter-based stream identified by (seed, stream id). Draw n of the stream is
/// a pure function of (seed, stream, n).
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double next_uniform();
  /// Standard normal via Box-Muller on two uniforms; caches the second variate.
  double next_normal();
  void fill_normal(std::span<double> out);

  std::uint64_t position() const noexcept { return block_ * 2 + lane_; }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace glhydro
