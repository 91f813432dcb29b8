#include "lagan/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lagan {

FiniteDistribution::FiniteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("FiniteDistribution: empty support");
  for (std::size_t i = 0; i < probs_.size(); ++i)
    if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i]))
      throw std::invalid_argument("FiniteDistribution: entry " + std::to_string(i) +
                                  " is negative or not finite");
  if (std::abs(total() - 1.0) > kSumTolerance)
    throw std::invalid_argument("FiniteDistribution: entries sum to " + std::to_string(total()));
}

FiniteDistribution FiniteDistribution::uniform(std::size_t n) {
  return FiniteDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

FiniteDistribution FiniteDistribution::point_mass(std::size_t n, std::size_t at) {
  std::vector<double> p(n, 0.0);
  p.at(at) = 1.0;
  return FiniteDistribution(std::move(p));
}

FiniteDistribution FiniteDistribution::normalized(std::vector<double> weights) {
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("FiniteDistribution::normalized: negative weight");
    s += w;
  }
  if (!(s > 0.0)) throw std::invalid_argument("FiniteDistribution::normalized: zero total weight");
  for (double& w : weights) w /= s;
  return FiniteDistribution(std::move(weights));
}

FiniteDistribution FiniteDistribution::softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("FiniteDistribution::softmax: no logits");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logits[i] - mx);
  return normalized(std::move(p));
}

double FiniteDistribution::total() const {
  double s = 0.0;
  for (double p : probs_) s += p;
  return s;
}

}  // namespace lagan
