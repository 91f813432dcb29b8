#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lagan {

// Explicit probability vector over the points {0, ..., N-1} of a finite space.
class FiniteDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  FiniteDistribution() = default;
  // Throws std::invalid_argument unless entries are >= 0 and sum to 1.
  explicit FiniteDistribution(std::vector<double> probs);

  static FiniteDistribution uniform(std::size_t n);
  static FiniteDistribution point_mass(std::size_t n, std::size_t at);
  // Scales non-negative weights to sum to one.
  static FiniteDistribution normalized(std::vector<double> weights);
  // exp(logits) normalized, computed stably.
  static FiniteDistribution softmax(std::span<const double> logits);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  double total() const;

  bool operator==(const FiniteDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

}  // namespace lagan
