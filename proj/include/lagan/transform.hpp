#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lagan/autodiff.hpp"
#include "lagan/distribution.hpp"
#include "lagan/rng.hpp"

namespace lagan {

class TransformError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TransformKind { identity, shift1d, rotation2d, permutation };

// A deterministic map on data space: a 1-D shift, a quarter-turn rotation of
// the plane, or a permutation of a finite space.
class Transformation {
 public:
  Transformation() = default;

  static Transformation identity();
  static Transformation shift(double offset);
  static Transformation rotation(int quarter_turns);
  // sigma[i] is the image of point i; must be a bijection.
  static Transformation permutation(std::vector<std::size_t> sigma);
  // i -> (i + step) mod n
  static Transformation cyclic_shift(std::size_t n, std::size_t step);

  TransformKind kind() const { return kind_; }
  double offset() const { return offset_; }
  int quarter_turns() const { return quarter_turns_; }
  const std::vector<std::size_t>& sigma() const { return sigma_; }

  // True for anything that acts as the identity map (shift 0, rotation 0, the
  // identity permutation).
  bool is_identity() const;
  // Whether two transforms act on the same kind of space.
  bool comparable(const Transformation& other) const;
  bool same_map(const Transformation& other) const;

  // (*this) o inner: apply inner first.
  Transformation compose(const Transformation& inner) const;
  Transformation inverse() const;

  // Data dimension the map acts on; 0 for identity (any), N for permutations
  // (the size of the finite space).
  std::size_t dim() const;
  std::string describe() const;

 private:
  TransformKind kind_ = TransformKind::identity;
  double offset_ = 0.0;
  int quarter_turns_ = 0;
  std::vector<std::size_t> sigma_;
};

// Differentiable application to a sample batch of shape (n x d).
ad::Tensor apply(const Transformation& t, const ad::Tensor& x);
// Application to one point given by its coordinates.
std::vector<double> apply_point(const Transformation& t, std::span<const double> x);
// Image of a point of a finite space.
std::size_t apply_index(const Transformation& t, std::size_t i);

// Law of T(x) for x ~ p. Exact; only defined for permutation kinds.
FiniteDistribution pushforward(const Transformation& t, const FiniteDistribution& p);

// Transforms T_1..T_K with sampling probabilities p(T_k). Index 0 is treated
// as the identity when it is one.
class TransformationSet {
 public:
  static constexpr double kProbTolerance = 1e-12;

  TransformationSet() = default;
  TransformationSet(std::vector<Transformation> transforms, std::vector<double> probs);

  static TransformationSet uniform(std::vector<Transformation> transforms);
  // probs = (w, (1-w)/(K-1), ...); the first transform must be the identity.
  static TransformationSet identity_upweighted(std::vector<Transformation> transforms,
                                               double identity_weight = 0.5);

  // T_k(x) = x + 2k, k = 0..K-1.
  static std::vector<Transformation> shifts1d(std::size_t k);
  // The first K quarter turns.
  static std::vector<Transformation> rotations(std::size_t k = 4);
  // Subgroup of Z_n of order K (K must divide n): shifts by multiples of n/K.
  static std::vector<Transformation> cyclic_group(std::size_t n, std::size_t k);

  std::size_t size() const { return transforms_.size(); }
  const Transformation& operator[](std::size_t k) const { return transforms_[k]; }
  const std::vector<Transformation>& transforms() const { return transforms_; }
  std::span<const double> probs() const { return probs_; }
  double prob(std::size_t k) const { return probs_[k]; }
  bool is_uniform(double tol = 1e-12) const;
  bool all_permutations() const;
  // Index of the given map in the set, if present.
  std::optional<std::size_t> find(const Transformation& t) const;

 private:
  std::vector<Transformation> transforms_;
  std::vector<double> probs_;
};

struct GroupCheck {
  bool is_group = false;
  // (i, j) with T_i o T_j outside the set, when closure is what failed.
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  std::string reason;
};

GroupCheck is_group(const TransformationSet& set);

// k with probability probs[k].
std::size_t sample_transform(const TransformationSet& set, Rng& rng);

}  // namespace lagan
