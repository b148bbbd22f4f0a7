#include "narrownet/init.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "narrownet/error.hpp"

namespace narrownet {

Seed derive_seed(Seed parent, std::uint64_t stream) {
  std::uint64_t z = parent.value + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return Seed{z ^ (z >> 31)};
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u lies in (0, 1], so the logarithm is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

namespace {

void check_sizes(std::size_t d, std::size_t m, Head head) {
  if (d == 0 || m == 0) {
    throw PreconditionError("initialization needs d >= 1 and m >= 1, got d = " +
                            std::to_string(d) + ", m = " + std::to_string(m));
  }
  require_even_width(head, m);
}

}  // namespace

Params lecun_init(std::size_t d, std::size_t m, Head head, Seed seed) {
  check_sizes(d, m, head);
  Rng rng(seed);
  const double w_std = 1.0 / std::sqrt(static_cast<double>(d));
  const double v_std = 1.0 / std::sqrt(static_cast<double>(m));
  DenseMatrix w(d, m);
  for (double& x : w.data()) x = rng.normal(0.0, w_std);
  DenseVector v(outer_length(head, m));
  for (double& x : v) x = rng.normal(0.0, v_std);
  return Params(std::move(w), std::move(v), head);
}

Params mirrored_lecun_init(std::size_t d, std::size_t m, Head head, Seed seed) {
  check_sizes(d, m, head);
  if (m % 2 != 0) {
    throw PreconditionError("mirrored initialization requires that its width m is an even "
                            "number, got m = " + std::to_string(m));
  }
  Rng rng(seed);
  const std::size_t half = m / 2;
  const double w_std = 1.0 / std::sqrt(static_cast<double>(d));
  const double v_std = 1.0 / std::sqrt(static_cast<double>(m));
  DenseMatrix w(d, m);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = 0; j < half; ++j) {
      const double x = rng.normal(0.0, w_std);
      w(k, j) = x;
      w(k, j + half) = x;
    }
  }
  DenseVector v(outer_length(head, m));
  for (std::size_t j = 0; j < half; ++j) v[j] = rng.normal(0.0, v_std);
  if (head == Head::plain) {
    for (std::size_t j = 0; j < half; ++j) v[j + half] = -v[j];
  }
  return Params(std::move(w), std::move(v), head);
}

}  // namespace narrownet
