#pragma once

// Random composite graphs over the full op set, for gradient checking.

#include <cstdint>
#include <span>
#include <vector>

#include "lagan/autodiff.hpp"

namespace testsupport {

struct GraphCheck {
  std::size_t params = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool ok = true;
  // Closest relu input to its kink; instances too close are resampled.
  double kink_margin = 0.0;
};

// One graph per seed: three leaves (n x m, m x n, n x m) with entries in
// [-2, 2] and a chain of up to `depth` random ops reduced to a scalar.
class RandomGraph {
 public:
  RandomGraph(std::uint64_t seed, std::size_t depth = 4);

  std::vector<double> initial_values() const { return init_; }
  // Rebuilds the same graph on the given flattened leaf values.
  lagan::ad::Tensor build(const std::vector<lagan::ad::Tensor>& leaves, double* kink_margin = nullptr) const;
  std::vector<lagan::ad::Tensor> make_leaves(std::span<const double> flat) const;

  // backward() against central differences with step h; passes when every
  // coordinate is within rel_tol relative error or abs_floor absolute error.
  GraphCheck check(double h = 1e-5, double rel_tol = 1e-5, double abs_floor = 1e-8) const;

 private:
  std::uint64_t seed_;
  std::size_t depth_;
  std::size_t n_, m_;
  std::vector<double> init_;
};

}  // namespace testsupport
