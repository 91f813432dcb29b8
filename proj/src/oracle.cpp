#include "lagan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lagan/metrics.hpp"
#include "lagan/rng.hpp"

namespace lagan::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_permutation_set(const char* op, const TransformationSet& set, std::size_t n) {
  for (const auto& t : set.transforms()) {
    if (t.kind() == TransformKind::identity) continue;
    if (t.kind() != TransformKind::permutation)
      throw TransformError(std::string(op) + ": " + t.describe() + " is not a permutation");
    if (t.sigma().size() != n)
      throw TransformError(std::string(op) + ": permutation size " +
                           std::to_string(t.sigma().size()) + " does not match space size " +
                           std::to_string(n));
  }
}

void require_same_space(const char* op, const FiniteDistribution& a, const FiniteDistribution& b) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(op) + ": distributions live on spaces of size " +
                                std::to_string(a.size()) + " and " + std::to_string(b.size()));
}

// log of a table entry that must be usable; zero or undefined give -inf.
double log_entry(const ClassifierTable& t, std::size_t r, std::size_t c) {
  if (!t.defined(r)) return -kInf;
  return std::log(t(r, c));
}

Table binary_gan_weights(const FiniteDistribution& pd, const FiniteDistribution& pg) {
  Table w(pd.size(), 2);
  for (std::size_t x = 0; x < pd.size(); ++x) {
    w(x, kRealCol) = pd[x];
    w(x, kFakeCol) = pg[x];
  }
  return w;
}

}  // namespace

double Table::row_sum(std::size_t r) const {
  double s = 0.0;
  for (std::size_t c = 0; c < cols; ++c) s += (*this)(r, c);
  return s;
}

// ---------------------------------------------------------------------------
// ClassifierTable

ClassifierTable::ClassifierTable(std::size_t rows, std::size_t cols)
    : probs_(rows, cols), defined_(rows, true) {}

void ClassifierTable::set_undefined(std::size_t r) {
  defined_[r] = false;
  for (std::size_t c = 0; c < cols(); ++c) probs_(r, c) = kNaN;
}

std::span<const double> ClassifierTable::row(std::size_t r) const {
  return {probs_.values.data() + r * cols(), cols()};
}

double ClassifierTable::max_normalization_error() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows(); ++r)
    if (defined_[r]) worst = std::max(worst, std::abs(probs_.row_sum(r) - 1.0));
  return worst;
}

ClassifierTable ClassifierTable::from_weights(const Table& weights) {
  ClassifierTable out(weights.rows, weights.cols);
  for (std::size_t r = 0; r < weights.rows; ++r) {
    const double s = weights.row_sum(r);
    if (!(s > 0.0)) {
      out.set_undefined(r);
      continue;
    }
    for (std::size_t c = 0; c < weights.cols; ++c) out(r, c) = weights(r, c) / s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transformed distributions

std::vector<FiniteDistribution> transformed_components(const FiniteDistribution& p,
                                                       const TransformationSet& set) {
  require_permutation_set("transformed_components", set, p.size());
  std::vector<FiniteDistribution> out;
  out.reserve(set.size());
  for (const auto& t : set.transforms()) out.push_back(pushforward(t, p));
  return out;
}

FiniteDistribution mixture_transformed(const FiniteDistribution& p, const TransformationSet& set) {
  const auto comps = transformed_components(p, set);
  std::vector<double> mix(p.size(), 0.0);
  for (std::size_t k = 0; k < comps.size(); ++k)
    for (std::size_t x = 0; x < p.size(); ++x) mix[x] += set.prob(k) * comps[k][x];
  return FiniteDistribution::normalized(std::move(mix));
}

// ---------------------------------------------------------------------------
// Closed-form optimal heads

ClassifierTable optimal_classifier_ssgan(const FiniteDistribution& pd, const TransformationSet& set) {
  const auto pdk = transformed_components(pd, set);
  const std::size_t n = pd.size(), K = set.size();
  ClassifierTable c(n, K);
  for (std::size_t x = 0; x < n; ++x) {
    double denom = 0.0;
    for (std::size_t k = 0; k < K; ++k) denom += set.prob(k) * pdk[k][x];
    if (!(denom > 0.0)) {
      c.set_undefined(x);
      continue;
    }
    for (std::size_t k = 0; k < K; ++k) c(x, k) = set.prob(k) * pdk[k][x] / denom;
  }
  return c;
}

ClassifierTable optimal_classifier_ms(const FiniteDistribution& pd, const FiniteDistribution& pg,
                                      const TransformationSet& set) {
  require_same_space("optimal_classifier_ms", pd, pg);
  const auto pdk = transformed_components(pd, set);
  const auto pdT = mixture_transformed(pd, set);
  const auto pgT = mixture_transformed(pg, set);
  const std::size_t n = pd.size(), K = set.size();
  ClassifierTable c(n, K + 1);
  for (std::size_t x = 0; x < n; ++x) {
    const double total = pdT[x] + pgT[x];
    if (!(total > 0.0)) {
      c.set_undefined(x);
      continue;
    }
    const double fake = pgT[x] / total;
    c(x, 0) = fake;
    // C+(k) = (pd^T / pg^T) * C*(k) * C+(0), written without the ratio so
    // that rows with pg^T = 0 stay finite.
    double pd_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) pd_sum += set.prob(k) * pdk[k][x];
    for (std::size_t k = 0; k < K; ++k)
      c(x, k + 1) = pd_sum > 0.0 ? (pdT[x] / total) * (set.prob(k) * pdk[k][x] / pd_sum) : 0.0;
  }
  return c;
}

ClassifierTable optimal_dla(const FiniteDistribution& pd, const FiniteDistribution& pg,
                            const TransformationSet& set) {
  require_same_space("optimal_dla", pd, pg);
  const auto pdk = transformed_components(pd, set);
  const auto pgk = transformed_components(pg, set);
  const std::size_t n = pd.size(), K = set.size();
  ClassifierTable d(n, 2 * K);
  for (std::size_t x = 0; x < n; ++x) {
    double denom = 0.0;
    for (std::size_t k = 0; k < K; ++k) denom += set.prob(k) * (pdk[k][x] + pgk[k][x]);
    if (!(denom > 0.0)) {
      d.set_undefined(x);
      continue;
    }
    for (std::size_t k = 0; k < K; ++k) {
      d(x, la_col(k, true, K)) = set.prob(k) * pdk[k][x] / denom;
      d(x, la_col(k, false, K)) = set.prob(k) * pgk[k][x] / denom;
    }
  }
  return d;
}

ClassifierTable optimal_binary_dagan(const FiniteDistribution& pd, const FiniteDistribution& pg,
                                     const TransformationSet& set) {
  require_same_space("optimal_binary_dagan", pd, pg);
  const auto pdT = mixture_transformed(pd, set);
  const auto pgT = mixture_transformed(pg, set);
  ClassifierTable d(pd.size(), 2);
  for (std::size_t x = 0; x < pd.size(); ++x) {
    const double total = pdT[x] + pgT[x];
    if (!(total > 0.0)) {
      d.set_undefined(x);
      continue;
    }
    d(x, kRealCol) = pdT[x] / total;
    d(x, kFakeCol) = pgT[x] / total;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Generator objectives

double kl_divergence(const FiniteDistribution& p, const FiniteDistribution& q) {
  require_same_space("kl_divergence", p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

double generator_value_ssgan(const FiniteDistribution& pg, const FiniteDistribution& pd,
                             const TransformationSet& set) {
  require_same_space("generator_value_ssgan", pd, pg);
  const auto c = optimal_classifier_ssgan(pd, set);
  const auto pgk = transformed_components(pg, set);
  double v = 0.0;
  for (std::size_t k = 0; k < set.size(); ++k)
    for (std::size_t x = 0; x < pg.size(); ++x) {
      if (pgk[k][x] == 0.0) continue;
      if (!c.defined(x) || c(x, k) == 0.0) return -kInf;
      v += set.prob(k) * pgk[k][x] * std::log(c(x, k));
    }
  return v;
}

double generator_value_ms(const FiniteDistribution& pg, const FiniteDistribution& pd,
                          const TransformationSet& set) {
  const double kl = kl_divergence(mixture_transformed(pg, set), mixture_transformed(pd, set));
  const double ss = generator_value_ssgan(pg, pd, set);
  if (std::isinf(kl) || std::isinf(ss)) return kInf;
  return kl - ss;
}

double generator_value_la(const FiniteDistribution& pg, const FiniteDistribution& pd,
                          const TransformationSet& set) {
  require_same_space("generator_value_la", pd, pg);
  const auto pgk = transformed_components(pg, set);
  const auto pdk = transformed_components(pd, set);
  double v = 0.0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const double kl = kl_divergence(pgk[k], pdk[k]);
    if (std::isinf(kl)) return kInf;
    v += set.prob(k) * kl;
  }
  return v;
}

double ssgan_generator_ss_term(const FiniteDistribution& pg, const TransformationSet& set,
                               const ClassifierTable& classifier) {
  require_permutation_set("ssgan_generator_ss_term", set, pg.size());
  double v = 0.0;
  for (std::size_t x = 0; x < pg.size(); ++x) {
    if (pg[x] == 0.0) continue;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const double w = pg[x] * set.prob(k);
      if (w == 0.0) continue;
      v += w * log_entry(classifier, apply_index(set[k], x), k);
    }
  }
  return v;
}

double ms_generator_ss_term(const FiniteDistribution& pg, const TransformationSet& set,
                            const ClassifierTable& cplus) {
  require_permutation_set("ms_generator_ss_term", set, pg.size());
  double v = 0.0;
  for (std::size_t x = 0; x < pg.size(); ++x) {
    if (pg[x] == 0.0) continue;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const double w = pg[x] * set.prob(k);
      if (w == 0.0) continue;
      const auto xt = apply_index(set[k], x);
      v += w * (log_entry(cplus, xt, k + 1) - log_entry(cplus, xt, 0));
    }
  }
  return v;
}

double la_generator_objective(const FiniteDistribution& pg, const TransformationSet& set,
                              const ClassifierTable& dla) {
  require_permutation_set("la_generator_objective", set, pg.size());
  const auto K = set.size();
  double v = 0.0;
  for (std::size_t x = 0; x < pg.size(); ++x) {
    if (pg[x] == 0.0) continue;
    for (std::size_t k = 0; k < K; ++k) {
      const double w = pg[x] * set.prob(k);
      if (w == 0.0) continue;
      const auto xt = apply_index(set[k], x);
      v += w * (log_entry(dla, xt, la_col(k, true, K)) - log_entry(dla, xt, la_col(k, false, K)));
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Objective weights and the numeric maximizer

Table ssgan_classifier_weights(const FiniteDistribution& pd, const TransformationSet& set) {
  require_permutation_set("ssgan_classifier_weights", set, pd.size());
  Table w(pd.size(), set.size());
  for (std::size_t x = 0; x < pd.size(); ++x)
    for (std::size_t k = 0; k < set.size(); ++k)
      w(apply_index(set[k], x), k) += pd[x] * set.prob(k);
  return w;
}

Table ms_classifier_weights(const FiniteDistribution& pd, const FiniteDistribution& pg,
                            const TransformationSet& set) {
  require_same_space("ms_classifier_weights", pd, pg);
  require_permutation_set("ms_classifier_weights", set, pd.size());
  Table w(pd.size(), set.size() + 1);
  for (std::size_t x = 0; x < pd.size(); ++x)
    for (std::size_t k = 0; k < set.size(); ++k) {
      const auto xt = apply_index(set[k], x);
      w(xt, k + 1) += pd[x] * set.prob(k);
      w(xt, 0) += pg[x] * set.prob(k);
    }
  return w;
}

Table dla_weights(const FiniteDistribution& pd, const FiniteDistribution& pg,
                  const TransformationSet& set) {
  require_same_space("dla_weights", pd, pg);
  require_permutation_set("dla_weights", set, pd.size());
  const auto K = set.size();
  Table w(pd.size(), 2 * K);
  for (std::size_t x = 0; x < pd.size(); ++x)
    for (std::size_t k = 0; k < K; ++k) {
      const auto xt = apply_index(set[k], x);
      w(xt, la_col(k, true, K)) += pd[x] * set.prob(k);
      w(xt, la_col(k, false, K)) += pg[x] * set.prob(k);
    }
  return w;
}

double log_objective(const Table& weights, const ClassifierTable& table) {
  double v = 0.0;
  for (std::size_t r = 0; r < weights.rows; ++r)
    for (std::size_t c = 0; c < weights.cols; ++c)
      if (weights(r, c) != 0.0) v += weights(r, c) * log_entry(table, r, c);
  return v;
}

namespace {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    const double d = a[col * n + col];
    if (d == 0.0) throw std::runtime_error("solve_dense: singular system");
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return x;
}

std::vector<double> softmax_of(const std::vector<double>& l) {
  const double mx = *std::max_element(l.begin(), l.end());
  std::vector<double> q(l.size());
  double s = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) s += (q[i] = std::exp(l[i] - mx));
  for (double& v : q) v /= s;
  return q;
}

double row_objective(std::span<const double> w, const std::vector<double>& q) {
  double v = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) v += w[i] * std::log(q[i]);
  return v;
}

}  // namespace

std::vector<double> maximize_row_log_objective(std::span<const double> w) {
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] < 0.0) throw std::invalid_argument("maximize_row_log_objective: negative weight");
    if (w[c] > 0.0) active.push_back(c);
  }
  if (active.empty()) throw std::invalid_argument("maximize_row_log_objective: all weights zero");
  std::vector<double> out(w.size(), 0.0);
  if (active.size() == 1) {
    out[active[0]] = 1.0;
    return out;
  }

  const std::size_t m = active.size();
  std::vector<double> wa(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) total += (wa[i] = w[active[i]]);

  // Logits of the active classes; the last one is pinned at 0.
  std::vector<double> l(m, 0.0);
  std::vector<double> q = softmax_of(l);
  double f = row_objective(wa, q);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> g(m - 1);
    double gmax = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      g[i] = wa[i] - total * q[i];
      gmax = std::max(gmax, std::abs(g[i]));
    }
    if (gmax <= 1e-16 * total) break;
    // Negative Hessian of the objective in the reduced logits.
    std::vector<double> h((m - 1) * (m - 1));
    for (std::size_t i = 0; i + 1 < m; ++i)
      for (std::size_t j = 0; j + 1 < m; ++j)
        h[i * (m - 1) + j] = total * ((i == j ? q[i] : 0.0) - q[i] * q[j]);
    const auto step = solve_dense(std::move(h), g);

    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      std::vector<double> trial = l;
      for (std::size_t i = 0; i + 1 < m; ++i) trial[i] += t * step[i];
      auto qt = softmax_of(trial);
      const double ft = row_objective(wa, qt);
      if (ft >= f) {
        moved = ft > f || trial != l;
        l = std::move(trial);
        q = std::move(qt);
        f = ft;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  for (std::size_t i = 0; i < m; ++i) out[active[i]] = q[i];
  return out;
}

ClassifierTable numeric_maximizer(const Table& weights) {
  ClassifierTable out(weights.rows, weights.cols);
  for (std::size_t r = 0; r < weights.rows; ++r) {
    std::span<const double> row(weights.values.data() + r * weights.cols, weights.cols);
    if (!(weights.row_sum(r) > 0.0)) {
      out.set_undefined(r);
      continue;
    }
    const auto q = maximize_row_log_objective(row);
    for (std::size_t c = 0; c < weights.cols; ++c) out(r, c) = q[c];
  }
  return out;
}

// ---------------------------------------------------------------------------

std::array<double, 3> verify_prop_base(const FiniteDistribution& p, const TransformationSet& set,
                                       std::span<const double> f) {
  if (f.size() != p.size())
    throw std::invalid_argument("verify_prop_base: f must have one value per point");
  require_permutation_set("verify_prop_base", set, p.size());
  const auto pk = transformed_components(p, set);
  const auto pT = mixture_transformed(p, set);
  const std::size_t n = p.size(), K = set.size();

  double over_x = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t k = 0; k < K; ++k)
      if (p[x] * set.prob(k) != 0.0)
        over_x += p[x] * set.prob(k) * std::log(f[apply_index(set[k], x)]);

  double over_mixture = 0.0;
  for (std::size_t xt = 0; xt < n; ++xt) {
    if (pT[xt] == 0.0) continue;
    double posterior_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double post = set.prob(k) * pk[k][xt] / pT[xt];
      posterior_sum += post * std::log(f[xt]);
    }
    over_mixture += pT[xt] * posterior_sum;
  }

  double over_k = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double inner = 0.0;
    for (std::size_t xt = 0; xt < n; ++xt)
      if (pk[k][xt] != 0.0) inner += pk[k][xt] * std::log(f[xt]);
    over_k += set.prob(k) * inner;
  }
  return {over_x, over_mixture, over_k};
}

// ---------------------------------------------------------------------------
// Mixture family over a transformation group

MixtureWeights::MixtureWeights(std::vector<double> pi) : pi_(std::move(pi)) {
  if (pi_.empty()) throw std::invalid_argument("MixtureWeights: empty");
  double s = 0.0;
  for (double v : pi_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("MixtureWeights: entry outside [0,1]");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw std::invalid_argument("MixtureWeights: entries sum to " + std::to_string(s));
}

MixtureWeights MixtureWeights::unit(std::size_t k, std::size_t at) {
  std::vector<double> pi(k, 0.0);
  pi.at(at) = 1.0;
  return MixtureWeights(std::move(pi));
}

GroupHypothesisError::GroupHypothesisError(
    const std::string& what, std::optional<std::pair<std::size_t, std::size_t>> witness)
    : std::invalid_argument(what), witness_(witness) {}

Theorem4Result theorem4_family(const FiniteDistribution& pd, const TransformationSet& set,
                               const MixtureWeights& pi) {
  const auto check = is_group(set);
  if (!check.is_group) {
    std::ostringstream os;
    os << "theorem4_family: transform set is not a group (" << check.reason << ")";
    if (check.witness) os << ", witness (" << check.witness->first << ", " << check.witness->second << ")";
    throw GroupHypothesisError(os.str(), check.witness);
  }
  if (!set.is_uniform())
    throw GroupHypothesisError("theorem4_family: transforms are not sampled uniformly", std::nullopt);
  if (pi.size() != set.size())
    throw std::invalid_argument("theorem4_family: need one mixture weight per transform");

  const auto comps = transformed_components(pd, set);
  std::vector<double> mix(pd.size(), 0.0);
  for (std::size_t j = 0; j < set.size(); ++j)
    for (std::size_t x = 0; x < pd.size(); ++x) mix[x] += pi[j] * comps[j][x];
  Theorem4Result out{FiniteDistribution::normalized(std::move(mix)), 0.0};

  const auto a = mixture_transformed(out.p_pi, set);
  const auto b = mixture_transformed(pd, set);
  for (std::size_t x = 0; x < pd.size(); ++x)
    out.mixture_gap = std::max(out.mixture_gap, std::abs(a[x] - b[x]));
  return out;
}

// ---------------------------------------------------------------------------
// Exact descent

TransformationSet effective_set(Method method, const TransformationSet& set,
                                double identity_weight) {
  switch (method) {
    case Method::gan:
      return TransformationSet({Transformation::identity()}, {1.0});
    case Method::dagan_plus:
      return TransformationSet::identity_upweighted(set.transforms(), identity_weight);
    default:
      return set;
  }
}

std::vector<Table> disc_weights(Method method, const FiniteDistribution& pd,
                                const FiniteDistribution& pg, const TransformationSet& set) {
  require_same_space("disc_weights", pd, pg);
  require_permutation_set("disc_weights", set, pd.size());
  const std::size_t n = pd.size(), K = set.size();
  switch (method) {
    case Method::gan:
      return {binary_gan_weights(pd, pg)};
    case Method::ssgan:
      return {binary_gan_weights(pd, pg), ssgan_classifier_weights(pd, set)};
    case Method::ssgan_ms:
      return {binary_gan_weights(pd, pg), ms_classifier_weights(pd, pg, set)};
    case Method::dagan:
    case Method::dagan_plus: {
      Table w(n, 2);
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t k = 0; k < K; ++k) {
          const auto xt = apply_index(set[k], x);
          w(xt, kRealCol) += set.prob(k) * pd[x];
          w(xt, kFakeCol) += set.prob(k) * pg[x];
        }
      return {w};
    }
    case Method::dagan_md: {
      std::vector<Table> heads(K, Table(n, 2));
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t k = 0; k < K; ++k) {
          const auto xt = apply_index(set[k], x);
          heads[k](xt, kRealCol) += set.prob(k) * pd[x];
          heads[k](xt, kFakeCol) += set.prob(k) * pg[x];
        }
      return heads;
    }
    case Method::ssgan_la:
      return {dla_weights(pd, pg, set)};
    case Method::ssgan_la_plus:
      break;
  }
  throw std::invalid_argument("disc_weights: no exact form for method " +
                              std::string(to_string(method)));
}

std::vector<double> generator_scores(Method method, const TransformationSet& set,
                                     const std::vector<ClassifierTable>& heads, double lambda_g) {
  if (heads.empty()) throw std::invalid_argument("generator_scores: no heads");
  const std::size_t n = heads[0].rows(), K = set.size();
  std::vector<double> s(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    switch (method) {
      case Method::gan:
        s[x] = log_entry(heads[0], x, kFakeCol);
        break;
      case Method::ssgan: {
        double ss = 0.0;
        for (std::size_t k = 0; k < K; ++k)
          ss += set.prob(k) * log_entry(heads[1], apply_index(set[k], x), k);
        s[x] = log_entry(heads[0], x, kFakeCol) - lambda_g * ss;
        break;
      }
      case Method::ssgan_ms: {
        double ss = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          const auto xt = apply_index(set[k], x);
          ss += set.prob(k) * (log_entry(heads[1], xt, k + 1) - log_entry(heads[1], xt, 0));
        }
        s[x] = log_entry(heads[0], x, kFakeCol) - lambda_g * ss;
        break;
      }
      case Method::dagan:
      case Method::dagan_plus:
        for (std::size_t k = 0; k < K; ++k)
          s[x] += set.prob(k) * log_entry(heads[0], apply_index(set[k], x), kFakeCol);
        break;
      case Method::dagan_md:
        for (std::size_t k = 0; k < K; ++k)
          s[x] += set.prob(k) * log_entry(heads[k], apply_index(set[k], x), kFakeCol);
        break;
      case Method::ssgan_la:
        for (std::size_t k = 0; k < K; ++k) {
          const auto xt = apply_index(set[k], x);
          s[x] -= set.prob(k) * (log_entry(heads[0], xt, la_col(k, true, K)) -
                                 log_entry(heads[0], xt, la_col(k, false, K)));
        }
        break;
      case Method::ssgan_la_plus:
        throw std::invalid_argument("generator_scores: no exact form for ssgan_la_plus");
    }
  }
  return s;
}

DescentResult exact_descent(Method method, const FiniteDistribution& pd,
                            const TransformationSet& set, const DescentOptions& options) {
  if (method == Method::ssgan_la_plus)
    throw std::invalid_argument("exact_descent: ssgan_la_plus has no exact form");
  const std::size_t n = pd.size();
  require_permutation_set("exact_descent", set, n);
  const auto eff = effective_set(method, set, options.identity_weight);
  const auto pdT = mixture_transformed(pd, eff);

  std::vector<double> logits(n, 0.0);
  if (options.init) {
    if (options.init->size() != n)
      throw std::invalid_argument("exact_descent: initial distribution has the wrong size");
    for (std::size_t x = 0; x < n; ++x) {
      if (!((*options.init)[x] > 0.0))
        throw std::invalid_argument("exact_descent: softmax generator needs a full-support init");
      logits[x] = std::log((*options.init)[x]);
    }
  } else {
    Rng rng(options.seed, Stream::init);
    for (double& l : logits) l = options.init_scale * rng.normal();
  }

  // Logit tables for the gradient-ascent discriminator.
  std::vector<Table> disc_logits;

  DescentResult result;
  result.trajectory.reserve(options.steps + 1);
  for (std::size_t t = 0; t <= options.steps; ++t) {
    const auto pg = FiniteDistribution::softmax(logits);
    std::vector<ClassifierTable> heads;
    if (options.disc_mode == DiscMode::best_response) {
      for (const auto& w : disc_weights(method, pd, pg, eff))
        heads.push_back(ClassifierTable::from_weights(w));
    } else {
      for (std::size_t inner = 0; inner < std::max<std::size_t>(1, options.n_dis); ++inner) {
        const auto weights = disc_weights(method, pd, pg, eff);
        if (disc_logits.empty())
          for (const auto& w : weights) disc_logits.emplace_back(w.rows, w.cols);
        for (std::size_t h = 0; h < weights.size(); ++h) {
          auto& L = disc_logits[h];
          const auto& W = weights[h];
          for (std::size_t r = 0; r < W.rows; ++r) {
            std::vector<double> row(L.values.begin() + r * L.cols,
                                    L.values.begin() + (r + 1) * L.cols);
            const auto q = softmax_of(row);
            const double total = W.row_sum(r);
            for (std::size_t c = 0; c < W.cols; ++c)
              L(r, c) += options.disc_lr * (W(r, c) - total * q[c]);
          }
        }
      }
      for (const auto& L : disc_logits) {
        ClassifierTable tab(L.rows, L.cols);
        for (std::size_t r = 0; r < L.rows; ++r) {
          std::vector<double> row(L.values.begin() + r * L.cols, L.values.begin() + (r + 1) * L.cols);
          const auto q = softmax_of(row);
          for (std::size_t c = 0; c < L.cols; ++c) tab(r, c) = q[c];
        }
        heads.push_back(std::move(tab));
      }
    }

    const auto s = generator_scores(method, eff, heads, options.lambda_g);
    double objective = 0.0;
    for (std::size_t x = 0; x < n; ++x) objective += pg[x] * s[x];
    if (!std::isfinite(objective)) {
      std::ostringstream os;
      os << "exact_descent(" << to_string(method) << "): non-finite objective at step " << t
         << "; p_g =";
      for (double v : pg.probs()) os << ' ' << v;
      throw DescentError(os.str());
    }

    std::vector<double> grad(n);
    double norm2 = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      grad[x] = pg[x] * (s[x] - objective);
      norm2 += grad[x] * grad[x];
    }

    DescentStep rec;
    rec.step = t;
    rec.tv = metrics::tv_distance(pg, pd);
    rec.tv_mixture = metrics::tv_distance(mixture_transformed(pg, eff), pdT);
    rec.objective = objective;
    rec.grad_norm = std::sqrt(norm2);
    result.trajectory.push_back(rec);

    if (t == options.steps) {
      result.final_pg = pg;
      break;
    }
    for (std::size_t x = 0; x < n; ++x) logits[x] -= options.lr * grad[x];
  }
  return result;
}

}  // namespace lagan::oracle
