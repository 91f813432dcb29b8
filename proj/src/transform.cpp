#include "lagan/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lagan {

namespace {

constexpr double kOffsetTolerance = 1e-12;

bool is_bijection(const std::vector<std::size_t>& sigma) {
  std::vector<bool> hit(sigma.size(), false);
  for (auto s : sigma) {
    if (s >= sigma.size() || hit[s]) return false;
    hit[s] = true;
  }
  return true;
}

// Rotation by q quarter turns, counter-clockwise, as a right-multiplied
// matrix for row-vector samples: [x y] * M.
std::vector<double> rotation_matrix(int q) {
  static constexpr int c[4] = {1, 0, -1, 0};
  static constexpr int s[4] = {0, 1, 0, -1};
  return {static_cast<double>(c[q]), static_cast<double>(s[q]), static_cast<double>(-s[q]),
          static_cast<double>(c[q])};
}

}  // namespace

Transformation Transformation::identity() { return Transformation{}; }

Transformation Transformation::shift(double offset) {
  if (!std::isfinite(offset)) throw TransformError("shift1d: offset must be finite");
  Transformation t;
  t.kind_ = TransformKind::shift1d;
  t.offset_ = offset;
  return t;
}

Transformation Transformation::rotation(int quarter_turns) {
  if (quarter_turns < 0 || quarter_turns > 3)
    throw TransformError("rotation2d: quarter_turns must be in {0,1,2,3}, got " +
                         std::to_string(quarter_turns));
  Transformation t;
  t.kind_ = TransformKind::rotation2d;
  t.quarter_turns_ = quarter_turns;
  return t;
}

Transformation Transformation::permutation(std::vector<std::size_t> sigma) {
  if (sigma.empty() || !is_bijection(sigma))
    throw TransformError("permutation: sigma is not a bijection");
  Transformation t;
  t.kind_ = TransformKind::permutation;
  t.sigma_ = std::move(sigma);
  return t;
}

Transformation Transformation::cyclic_shift(std::size_t n, std::size_t step) {
  std::vector<std::size_t> sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = (i + step) % n;
  return permutation(std::move(sigma));
}

bool Transformation::is_identity() const {
  switch (kind_) {
    case TransformKind::identity:
      return true;
    case TransformKind::shift1d:
      return std::abs(offset_) <= kOffsetTolerance;
    case TransformKind::rotation2d:
      return quarter_turns_ == 0;
    case TransformKind::permutation:
      for (std::size_t i = 0; i < sigma_.size(); ++i)
        if (sigma_[i] != i) return false;
      return true;
  }
  return false;
}

bool Transformation::comparable(const Transformation& other) const {
  if (kind_ == TransformKind::identity || other.kind_ == TransformKind::identity) return true;
  if (kind_ != other.kind_) return false;
  if (kind_ == TransformKind::permutation) return sigma_.size() == other.sigma_.size();
  return true;
}

bool Transformation::same_map(const Transformation& other) const {
  if (!comparable(other))
    throw TransformError("cannot compare " + describe() + " with " + other.describe());
  if (is_identity() || other.is_identity()) return is_identity() && other.is_identity();
  switch (kind_) {
    case TransformKind::shift1d:
      return std::abs(offset_ - other.offset_) <= kOffsetTolerance;
    case TransformKind::rotation2d:
      return quarter_turns_ == other.quarter_turns_;
    case TransformKind::permutation:
      return sigma_ == other.sigma_;
    case TransformKind::identity:
      break;
  }
  return false;
}

Transformation Transformation::compose(const Transformation& inner) const {
  if (!comparable(inner))
    throw TransformError("cannot compose " + describe() + " with " + inner.describe());
  if (kind_ == TransformKind::identity) return inner;
  if (inner.kind_ == TransformKind::identity) return *this;
  switch (kind_) {
    case TransformKind::shift1d:
      return shift(offset_ + inner.offset_);
    case TransformKind::rotation2d:
      return rotation((quarter_turns_ + inner.quarter_turns_) % 4);
    case TransformKind::permutation: {
      std::vector<std::size_t> out(sigma_.size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigma_[inner.sigma_[i]];
      return permutation(std::move(out));
    }
    case TransformKind::identity:
      break;
  }
  return *this;
}

Transformation Transformation::inverse() const {
  switch (kind_) {
    case TransformKind::identity:
      return *this;
    case TransformKind::shift1d:
      return shift(-offset_);
    case TransformKind::rotation2d:
      return rotation((4 - quarter_turns_) % 4);
    case TransformKind::permutation: {
      std::vector<std::size_t> inv(sigma_.size());
      for (std::size_t i = 0; i < sigma_.size(); ++i) inv[sigma_[i]] = i;
      return permutation(std::move(inv));
    }
  }
  return *this;
}

std::size_t Transformation::dim() const {
  switch (kind_) {
    case TransformKind::identity:
      return 0;
    case TransformKind::shift1d:
      return 1;
    case TransformKind::rotation2d:
      return 2;
    case TransformKind::permutation:
      return sigma_.size();
  }
  return 0;
}

std::string Transformation::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case TransformKind::identity:
      os << "identity";
      break;
    case TransformKind::shift1d:
      os << "shift1d(" << offset_ << ")";
      break;
    case TransformKind::rotation2d:
      os << "rotation2d(" << 90 * quarter_turns_ << "deg)";
      break;
    case TransformKind::permutation:
      os << "permutation(";
      for (std::size_t i = 0; i < sigma_.size(); ++i) os << (i ? " " : "") << sigma_[i];
      os << ")";
      break;
  }
  return os.str();
}

ad::Tensor apply(const Transformation& t, const ad::Tensor& x) {
  if (t.kind() == TransformKind::identity) return x;
  if (t.kind() == TransformKind::permutation)
    throw TransformError("apply: permutations act on finite spaces, not on sample batches");
  if (x.rank() != 2 || x.cols() != t.dim())
    throw TransformError("apply: " + t.describe() + " needs samples of dimension " +
                         std::to_string(t.dim()) + ", got batch " + ad::shape_str(x.shape()));
  if (t.kind() == TransformKind::shift1d) return ad::affine(x, 1.0, t.offset());
  return ad::matmul(x, ad::Tensor::constant({2, 2}, rotation_matrix(t.quarter_turns())));
}

std::vector<double> apply_point(const Transformation& t, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  switch (t.kind()) {
    case TransformKind::identity:
      break;
    case TransformKind::shift1d:
      if (x.size() != 1) throw TransformError("apply_point: shift1d needs a 1-D point");
      out[0] += t.offset();
      break;
    case TransformKind::rotation2d: {
      if (x.size() != 2) throw TransformError("apply_point: rotation2d needs a 2-D point");
      const auto m = rotation_matrix(t.quarter_turns());
      out[0] = x[0] * m[0] + x[1] * m[2];
      out[1] = x[0] * m[1] + x[1] * m[3];
      break;
    }
    case TransformKind::permutation:
      throw TransformError("apply_point: permutations act on indices");
  }
  return out;
}

std::size_t apply_index(const Transformation& t, std::size_t i) {
  if (t.kind() == TransformKind::identity) return i;
  if (t.kind() != TransformKind::permutation)
    throw TransformError("apply_index: " + t.describe() + " does not act on a finite space");
  return t.sigma().at(i);
}

FiniteDistribution pushforward(const Transformation& t, const FiniteDistribution& p) {
  if (t.kind() == TransformKind::identity) return p;
  if (t.kind() != TransformKind::permutation)
    throw TransformError("pushforward: " + t.describe() + " has no finite pushforward");
  if (t.sigma().size() != p.size())
    throw TransformError("pushforward: permutation of size " + std::to_string(t.sigma().size()) +
                         " applied to a distribution of size " + std::to_string(p.size()));
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) out[t.sigma()[i]] = p[i];
  return FiniteDistribution(std::move(out));
}

// ---------------------------------------------------------------------------

TransformationSet::TransformationSet(std::vector<Transformation> transforms,
                                     std::vector<double> probs)
    : transforms_(std::move(transforms)), probs_(std::move(probs)) {
  if (transforms_.empty()) throw TransformError("TransformationSet: needs at least one transform");
  if (probs_.size() != transforms_.size())
    throw TransformError("TransformationSet: " + std::to_string(transforms_.size()) +
                         " transforms but " + std::to_string(probs_.size()) + " probabilities");
  double s = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw TransformError("TransformationSet: negative probability");
    s += p;
  }
  if (std::abs(s - 1.0) > kProbTolerance)
    throw TransformError("TransformationSet: probabilities sum to " + std::to_string(s));
}

TransformationSet TransformationSet::uniform(std::vector<Transformation> transforms) {
  const auto k = transforms.size();
  return TransformationSet(std::move(transforms),
                           std::vector<double>(k, k ? 1.0 / static_cast<double>(k) : 0.0));
}

TransformationSet TransformationSet::identity_upweighted(std::vector<Transformation> transforms,
                                                         double identity_weight) {
  if (transforms.empty() || !transforms[0].is_identity())
    throw TransformError("identity_upweighted: the first transform must be the identity");
  if (!(identity_weight > 0.0 && identity_weight <= 1.0))
    throw TransformError("identity_upweighted: identity weight must be in (0, 1]");
  const auto k = transforms.size();
  if (k == 1) return TransformationSet(std::move(transforms), {1.0});
  std::vector<double> probs(k, (1.0 - identity_weight) / static_cast<double>(k - 1));
  probs[0] = identity_weight;
  return TransformationSet(std::move(transforms), std::move(probs));
}

std::vector<Transformation> TransformationSet::shifts1d(std::size_t k) {
  std::vector<Transformation> out;
  for (std::size_t i = 0; i < k; ++i)
    out.push_back(i == 0 ? Transformation::identity()
                         : Transformation::shift(2.0 * static_cast<double>(i)));
  return out;
}

std::vector<Transformation> TransformationSet::rotations(std::size_t k) {
  if (k < 1 || k > 4) throw TransformError("rotations: K must be in 1..4");
  std::vector<Transformation> out;
  for (std::size_t i = 0; i < k; ++i)
    out.push_back(i == 0 ? Transformation::identity()
                         : Transformation::rotation(static_cast<int>(i)));
  return out;
}

std::vector<Transformation> TransformationSet::cyclic_group(std::size_t n, std::size_t k) {
  if (k == 0 || n % k != 0)
    throw TransformError("cyclic_group: order " + std::to_string(k) + " does not divide " +
                         std::to_string(n));
  std::vector<Transformation> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(Transformation::cyclic_shift(n, i * (n / k)));
  return out;
}

bool TransformationSet::is_uniform(double tol) const {
  const double u = 1.0 / static_cast<double>(size());
  return std::all_of(probs_.begin(), probs_.end(), [&](double p) { return std::abs(p - u) <= tol; });
}

bool TransformationSet::all_permutations() const {
  return std::all_of(transforms_.begin(), transforms_.end(), [](const Transformation& t) {
    return t.kind() == TransformKind::permutation || t.kind() == TransformKind::identity;
  });
}

std::optional<std::size_t> TransformationSet::find(const Transformation& t) const {
  for (std::size_t k = 0; k < transforms_.size(); ++k)
    if (transforms_[k].same_map(t)) return k;
  return std::nullopt;
}

GroupCheck is_group(const TransformationSet& set) {
  const auto& ts = set.transforms();
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < ts.size(); ++j)
      if (!ts[i].comparable(ts[j]))
        throw TransformError("is_group: incomparable kinds " + ts[i].describe() + " and " +
                             ts[j].describe());

  GroupCheck out;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const auto c = ts[i].compose(ts[j]);
      if (!set.find(c)) {
        out.witness = std::make_pair(i, j);
        out.reason = "not closed: " + ts[i].describe() + " o " + ts[j].describe() + " = " +
                     c.describe() + " is missing";
        return out;
      }
    }
  if (!set.find(Transformation::identity())) {
    out.reason = "identity is missing";
    return out;
  }
  for (const auto& t : ts)
    if (!set.find(t.inverse())) {
      out.reason = "inverse of " + t.describe() + " is missing";
      return out;
    }
  out.is_group = true;
  return out;
}

std::size_t sample_transform(const TransformationSet& set, Rng& rng) {
  if (set.size() == 1) return 0;
  return rng.categorical(set.probs());
}

}  // namespace lagan
