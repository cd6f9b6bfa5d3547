#pragma once

#include <cstdint>
#include <random>

namespace teamsim {

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the conversions to doubles and normals
// below are written out here so draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller (one draw per call, two uniforms consumed).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Seed for an independent child stream; deterministic in (seed, stream).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace teamsim
