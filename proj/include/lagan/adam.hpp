#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lagan/autodiff.hpp"

namespace lagan {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig hp;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  AdamState() = default;
  AdamState(std::size_t n, AdamConfig config) : hp(config), m(n, 0.0), v(n, 0.0) {}
};

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(std::size_t index);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// Bias-corrected Adam update in place. Nothing is modified when a gradient
// entry is not finite.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

// Adam over a list of parameter tensors, one state per tensor.
class Adam {
 public:
  Adam(std::vector<ad::Tensor> params, AdamConfig config);

  void step();
  void zero_grad();
  const std::vector<ad::Tensor>& params() const { return params_; }
  const std::vector<AdamState>& states() const { return states_; }

 private:
  std::vector<ad::Tensor> params_;
  std::vector<AdamState> states_;
};

}  // namespace lagan
