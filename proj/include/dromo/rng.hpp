#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace dromo {

// Seeded generator used by every sampling routine. Draws are built from the
// raw 64-bit engine output so results do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform on {0, ..., n - 1}.
  int below(int n);
  double exponential();
  // Standard normal via Box-Muller (one draw per call).
  double normal();
  // Index drawn from a nonnegative weight vector (need not be normalized).
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& weights);
  // Symmetric Dirichlet(1) sample of length k.
  Eigen::VectorXd dirichlet(int k);

 private:
  std::mt19937_64 engine_;
};

// Deterministic seed derivation for independent streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace dromo
