#include "dromo/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dromo {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int Rng::below(int n) {
  if (n <= 0) throw std::invalid_argument("Rng::below: n must be positive");
  int k = static_cast<int>(uniform() * n);
  return k < n ? k : n - 1;
}

double Rng::exponential() { return -std::log1p(-uniform()); }

double Rng::normal() {
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int Rng::categorical(const Eigen::Ref<const Eigen::VectorXd>& weights) {
  double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("Rng::categorical: zero total weight");
  double u = uniform() * total;
  double acc = 0.0;
  int last_positive = -1;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += weights[i];
    if (u < acc) return last_positive;
  }
  return last_positive;
}

Eigen::VectorXd Rng::dirichlet(int k) {
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v[i] = exponential();
  return v / v.sum();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace dromo
