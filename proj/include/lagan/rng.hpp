#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace lagan {

// Substreams derived from one run seed. Each consumer owns its own stream so
// that, e.g., changing the batch size leaves initialization untouched.
enum class Stream : std::uint64_t { data = 1, latent = 2, init = 3, transform = 4, eval = 5, oracle = 6 };

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, Stream stream);

  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();
  std::size_t index(std::size_t n);
  // Index drawn with the given (normalized) probabilities.
  std::size_t categorical(std::span<const double> probs);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace lagan
