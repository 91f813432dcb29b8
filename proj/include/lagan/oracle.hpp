#pragma once

// Exact oracles on finite sample spaces. Every density is an explicit
// probability vector and every transform a permutation, so optimal
// discriminators and generator objectives can be evaluated by summation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lagan/distribution.hpp"
#include "lagan/method.hpp"
#include "lagan/transform.hpp"

namespace lagan::oracle {

// Dense rows x cols matrix of reals.
struct Table {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Table() = default;
  Table(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double row_sum(std::size_t r) const;
};

// Conditional class probabilities per point of the transformed space. Rows
// whose normalizer is zero carry no mass under any distribution involved;
// they are flagged undefined and hold NaN.
class ClassifierTable {
 public:
  ClassifierTable() = default;
  ClassifierTable(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return probs_.rows; }
  std::size_t cols() const { return probs_.cols; }
  double operator()(std::size_t r, std::size_t c) const { return probs_(r, c); }
  double& operator()(std::size_t r, std::size_t c) { return probs_(r, c); }
  bool defined(std::size_t r) const { return defined_[r]; }
  void set_undefined(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  // Largest |row sum - 1| over defined rows.
  double max_normalization_error() const;

  // Normalizes each row of a non-negative weight table.
  static ClassifierTable from_weights(const Table& weights);

 private:
  Table probs_;
  std::vector<bool> defined_;
};

// Column layouts.
//   binary tables:     0 = fake, 1 = real
//   K+1 tables:        0 = fake class, k + 1 = transform k
//   label-augmented:   k = (transform k, real), K + k = (transform k, fake)
inline constexpr std::size_t kFakeCol = 0;
inline constexpr std::size_t kRealCol = 1;
inline std::size_t la_col(std::size_t k, bool real, std::size_t K) { return real ? k : K + k; }

// p^{T_k} for every k.
std::vector<FiniteDistribution> transformed_components(const FiniteDistribution& p,
                                                       const TransformationSet& set);
// p^T = sum_k p(T_k) p^{T_k}.
FiniteDistribution mixture_transformed(const FiniteDistribution& p, const TransformationSet& set);

// Closed-form optimal heads. With non-uniform p(T_k) the transform weights
// enter the numerators; under uniform sampling they cancel.
ClassifierTable optimal_classifier_ssgan(const FiniteDistribution& pd, const TransformationSet& set);
ClassifierTable optimal_classifier_ms(const FiniteDistribution& pd, const FiniteDistribution& pg,
                                      const TransformationSet& set);
ClassifierTable optimal_dla(const FiniteDistribution& pd, const FiniteDistribution& pg,
                            const TransformationSet& set);
ClassifierTable optimal_binary_dagan(const FiniteDistribution& pd, const FiniteDistribution& pg,
                                     const TransformationSet& set);

// KL(p || q) with 0 log 0 = 0; +inf when p puts mass where q has none.
double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q);

// sum_k p(T_k) E_{pg^{T_k}} log C*(k | x~); -inf if pg reaches a zero of C*.
double generator_value_ssgan(const FiniteDistribution& pg, const FiniteDistribution& pd,
                             const TransformationSet& set);
// KL(pg^T || pd^T) - generator_value_ssgan; the quantity the SSGAN-MS
// generator minimizes under its optimal classifier.
double generator_value_ms(const FiniteDistribution& pg, const FiniteDistribution& pd,
                          const TransformationSet& set);
// sum_k p(T_k) KL(pg^{T_k} || pd^{T_k}).
double generator_value_la(const FiniteDistribution& pg, const FiniteDistribution& pd,
                          const TransformationSet& set);

// Generator terms written as expectations over x ~ pg and T_k ~ p(T), i.e.
// enumerating (x, k) and evaluating the supplied table at T_k(x).
//   E[log C(k | T_k x)]
double ssgan_generator_ss_term(const FiniteDistribution& pg, const TransformationSet& set,
                               const ClassifierTable& classifier);
//   E[log C+(k | T_k x)] - E[log C+(0 | T_k x)]
double ms_generator_ss_term(const FiniteDistribution& pg, const TransformationSet& set,
                            const ClassifierTable& cplus);
//   E[log D_LA(k,1 | T_k x)] - E[log D_LA(k,0 | T_k x)]
double la_generator_objective(const FiniteDistribution& pg, const TransformationSet& set,
                              const ClassifierTable& dla);

// Per-row weights w(x~, c) such that the discriminator (or classifier)
// objective equals sum_{x~, c} w(x~, c) log Q(c | x~). Built from the
// sample-side definition by enumerating (x, k).
Table ssgan_classifier_weights(const FiniteDistribution& pd, const TransformationSet& set);
Table ms_classifier_weights(const FiniteDistribution& pd, const FiniteDistribution& pg,
                            const TransformationSet& set);
Table dla_weights(const FiniteDistribution& pd, const FiniteDistribution& pg,
                  const TransformationSet& set);

double log_objective(const Table& weights, const ClassifierTable& table);

// Numerically maximizes sum_c w_c log q_c over the probability simplex
// (Newton's method on softmax logits with backtracking). Classes with zero
// weight get probability zero.
std::vector<double> maximize_row_log_objective(std::span<const double> w);
// Row-wise numeric maximizer; rows with zero total weight are undefined.
ClassifierTable numeric_maximizer(const Table& weights);

// The three ways of writing E[log f(T_k(x))]: over (x, k), over x~ ~ p^T with
// the posterior on k, and over k then x~ ~ p^{T_k}.
std::array<double, 3> verify_prop_base(const FiniteDistribution& p, const TransformationSet& set,
                                       std::span<const double> f);

class MixtureWeights {
 public:
  explicit MixtureWeights(std::vector<double> pi);
  static MixtureWeights unit(std::size_t k, std::size_t at);
  std::size_t size() const { return pi_.size(); }
  double operator[](std::size_t j) const { return pi_[j]; }
  std::span<const double> values() const { return pi_; }

 private:
  std::vector<double> pi_;
};

class GroupHypothesisError : public std::invalid_argument {
 public:
  GroupHypothesisError(const std::string& what,
                       std::optional<std::pair<std::size_t, std::size_t>> witness);
  const std::optional<std::pair<std::size_t, std::size_t>>& witness() const { return witness_; }

 private:
  std::optional<std::pair<std::size_t, std::size_t>> witness_;
};

struct Theorem4Result {
  FiniteDistribution p_pi;
  // max_x |p_pi^T(x) - pd^T(x)|
  double mixture_gap = 0.0;
};

// p_pi = sum_j pi_j pd^{T_j}. Requires a group with uniform sampling.
Theorem4Result theorem4_family(const FiniteDistribution& pd, const TransformationSet& set,
                               const MixtureWeights& pi);

// ---------------------------------------------------------------------------
// Exact-gradient training of a tractable generator (softmax over N logits).

enum class DiscMode { best_response, gradient_ascent };

struct DescentOptions {
  std::size_t steps = 2000;
  double lr = 1.0;
  DiscMode disc_mode = DiscMode::best_response;
  std::size_t n_dis = 1;
  double disc_lr = 5.0;
  double lambda_d = 1.0;
  double lambda_g = 1.0;
  // Identity weight used when the method is dagan_plus.
  double identity_weight = 0.5;
  std::optional<FiniteDistribution> init;
  double init_scale = 1.0;
  std::uint64_t seed = 0;
};

struct DescentStep {
  std::size_t step = 0;
  double tv = 0.0;
  double tv_mixture = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
};

struct DescentResult {
  std::vector<DescentStep> trajectory;
  FiniteDistribution final_pg;
};

class DescentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Discriminator heads of a method as weight tables: the discriminator side
// maximizes sum over heads of sum w log Q. lambda_d only rescales a head and
// is irrelevant to its maximizer.
std::vector<Table> disc_weights(Method method, const FiniteDistribution& pd,
                                const FiniteDistribution& pg, const TransformationSet& set);

// s(x) such that the generator loss for fixed heads is sum_x pg(x) s(x).
std::vector<double> generator_scores(Method method, const TransformationSet& set,
                                     const std::vector<ClassifierTable>& heads, double lambda_g);

// The transform set a method actually trains with (dagan_plus re-weights the
// identity; gan uses the identity alone).
TransformationSet effective_set(Method method, const TransformationSet& set,
                                double identity_weight);

DescentResult exact_descent(Method method, const FiniteDistribution& pd,
                            const TransformationSet& set, const DescentOptions& options);

}  // namespace lagan::oracle
