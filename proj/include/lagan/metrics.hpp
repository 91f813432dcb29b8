#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lagan/distribution.hpp"
#include "lagan/transform.hpp"

namespace lagan::metrics {

// Row-major point cloud: n points of dimension dim.
struct Samples {
  std::size_t dim = 1;
  std::vector<double> values;

  Samples() = default;
  Samples(std::size_t d, std::vector<double> v);
  std::size_t size() const { return dim ? values.size() / dim : 0; }
  std::span<const double> point(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

// Gaussian kernel exp(-|x-y|^2 / (2 h^2)); an empty bandwidth asks for the
// median heuristic.
struct Kernel {
  std::optional<double> bandwidth;

  static Kernel median_heuristic() { return Kernel{}; }
  static Kernel fixed(double h);
};

double silverman_bandwidth(std::span<const double> samples);

// Gaussian KDE evaluated on a grid. bandwidth <= 0 or empty selects
// Silverman's rule.
std::vector<double> kde(std::span<const double> samples, std::span<const double> grid,
                        std::optional<double> bandwidth = std::nullopt);

// Median of pairwise distances over the pooled points (deterministic
// subsample of at most max_points when the pool is larger).
double median_pairwise_distance(const Samples& pooled, std::size_t max_points = 2000);

// Square root of the unbiased U-statistic estimate of MMD^2, clamped at 0.
double mmd(const Samples& a, const Samples& b, const Kernel& kernel = Kernel::median_heuristic());
// Bandwidth that mmd() would use for this pair.
double mmd_bandwidth(const Samples& a, const Samples& b, const Kernel& kernel);

double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q);

class LeakPreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Fraction of generated 2-D points whose nearest reference copy T_j(mode_i)
// comes from a non-identity transform. radius is the assignment radius used
// to validate that the reference copies are unambiguous.
double leaked_mass(const Samples& generated, const std::vector<std::vector<double>>& modes,
                   const TransformationSet& group, double radius);

}  // namespace lagan::metrics
