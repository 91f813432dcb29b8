#include "lagan/adam.hpp"

#include <cmath>
#include <string>

namespace lagan {

NonFiniteGradient::NonFiniteGradient(std::size_t index)
    : std::runtime_error("adam: non-finite gradient at parameter index " + std::to_string(index)),
      index_(index) {}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
    throw std::invalid_argument("adam: parameter, gradient and moment lengths differ");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i])) throw NonFiniteGradient(i);

  const auto& hp = state.hp;
  state.t += 1;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    const double denom = std::sqrt(v_hat) + hp.eps;
    if (denom > 0.0) params[i] -= hp.lr * m_hat / denom;
  }
}

Adam::Adam(std::vector<ad::Tensor> params, AdamConfig config) : params_(std::move(params)) {
  states_.reserve(params_.size());
  for (const auto& p : params_) states_.emplace_back(p.numel(), config);
}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i)
    adam_step(params_[i].mutable_values(), params_[i].grad(), states_[i]);
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace lagan
