#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "narrownet/model.hpp"

namespace narrownet {

/// Root of all randomness for a run.
struct Seed {
  std::uint64_t value = 0;
  bool operator==(const Seed&) const = default;
};

/// Derives an independent child seed from a parent and a stream index with
/// the splitmix64 finalizer.
Seed derive_seed(Seed parent, std::uint64_t stream);

/// Deterministic random stream: std::mt19937_64 for uniform bits, uniforms
/// built from the top 53 bits, and Gaussians by the Box-Muller transform
/// (both outputs of each pair are used, cosine branch first). Every step is
/// fixed by the C++ standard, so the stream is identical on every platform.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed.value) {}

  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// w ~ N(0, 1/d), v ~ N(0, 1/m), all independent.
Params lecun_init(std::size_t d, std::size_t m, Head head, Seed seed);

/// First m/2 hidden columns drawn as in lecun_init and copied to the second
/// half. The plain head gets v_{j+m/2} = -v_j; the paired head stores m/2
/// outer weights drawn from N(0, 1/m). Output is identically zero.
Params mirrored_lecun_init(std::size_t d, std::size_t m, Head head, Seed seed);

}  // namespace narrownet
