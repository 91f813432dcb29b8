#include <doctest.h>

#include <cmath>
#include <limits>

#include "lagan/metrics.hpp"
#include "lagan/oracle.hpp"
#include "lagan/verify.hpp"

using namespace lagan;
using namespace lagan::oracle;

namespace {

TransformationSet swap_set() {
  return TransformationSet::uniform({Transformation::identity(), Transformation::permutation({1, 0})});
}
TransformationSet identity_only() { return TransformationSet::uniform({Transformation::identity()}); }
TransformationSet z4() { return TransformationSet::uniform(TransformationSet::cyclic_group(4, 4)); }

std::vector<double> vals(const FiniteDistribution& p) { return {p.probs().begin(), p.probs().end()}; }

double max_gap(const ClassifierTable& a, const ClassifierTable& b) {
  double g = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (!a.defined(r)) continue;
    for (std::size_t c = 0; c < a.cols(); ++c) g = std::max(g, std::abs(a(r, c) - b(r, c)));
  }
  return g;
}

const FiniteDistribution pd73({0.7, 0.3});
const FiniteDistribution pg46({0.4, 0.6});

}  // namespace

TEST_CASE("mixture_transformed") {
  CHECK(vals(mixture_transformed(pd73, identity_only())) == vals(pd73));
  CHECK(vals(mixture_transformed(FiniteDistribution({1.0, 0.0}), swap_set())) == std::vector<double>{0.5, 0.5});
  const auto m = mixture_transformed(pd73, swap_set());
  CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(mixture_transformed(pd73, TransformationSet::uniform(TransformationSet::rotations(2))),
                  TransformError);
}

TEST_CASE("optimal SSGAN classifier") {
  const auto three_ids = TransformationSet::uniform(
      {Transformation::identity(), Transformation::identity(), Transformation::identity()});
  const auto u = optimal_classifier_ssgan(FiniteDistribution::uniform(3), three_ids);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(u(r, c) == doctest::Approx(1.0 / 3.0));

  const auto c = optimal_classifier_ssgan(pd73, swap_set());
  CHECK(c(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(c(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
  const auto numeric = numeric_maximizer(ssgan_classifier_weights(pd73, swap_set()));
  CHECK(max_gap(c, numeric) <= 1e-9);

  const auto edge = optimal_classifier_ssgan(FiniteDistribution({1.0, 0.0}), swap_set());
  CHECK(edge(1, 0) == 0.0);
  CHECK(edge(1, 1) == 1.0);
}

TEST_CASE("optimal SSGAN-MS classifier") {
  const auto same = optimal_classifier_ms(pd73, pd73, swap_set());
  for (std::size_t r = 0; r < 2; ++r) CHECK(same(r, 0) == doctest::Approx(0.5));

  const auto c = optimal_classifier_ms(pd73, pg46, swap_set());
  CHECK(c(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c(0, 1) == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(c(0, 2) == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(max_gap(c, numeric_maximizer(ms_classifier_weights(pd73, pg46, swap_set()))) <= 1e-9);

  const auto disjoint = optimal_classifier_ms(FiniteDistribution({1.0, 0.0}), FiniteDistribution({0.0, 1.0}),
                                              identity_only());
  CHECK(disjoint(1, 0) == 1.0);
  CHECK(disjoint(0, 0) == 0.0);
  CHECK(disjoint.max_normalization_error() <= 1e-12);
}

TEST_CASE("optimal label-augmented discriminator") {
  const auto u = optimal_dla(FiniteDistribution::uniform(2), FiniteDistribution::uniform(2), swap_set());
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 4; ++c) CHECK(u(r, c) == doctest::Approx(0.25).epsilon(1e-15));

  const auto d = optimal_dla(pd73, pg46, swap_set());
  CHECK(d(0, la_col(0, true, 2)) == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(d(0, la_col(1, true, 2)) == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(d(0, la_col(0, false, 2)) == doctest::Approx(0.20).epsilon(1e-14));
  CHECK(d(0, la_col(1, false, 2)) == doctest::Approx(0.30).epsilon(1e-14));
  CHECK(max_gap(d, numeric_maximizer(dla_weights(pd73, pg46, swap_set()))) <= 1e-9);

  // One transform: the real column is the classic p_d / (p_d + p_g).
  Rng rng(4);
  const auto pd = random_distribution(6, rng), pg = random_distribution(6, rng);
  const auto k1 = optimal_dla(pd, pg, identity_only());
  for (std::size_t x = 0; x < 6; ++x) CHECK(std::abs(k1(x, 0) - pd[x] / (pd[x] + pg[x])) <= 1e-15);
}

TEST_CASE("undefined rows are flagged, not thrown") {
  const FiniteDistribution pd({0.5, 0.5, 0.0}), pg({0.2, 0.8, 0.0});
  const auto d = optimal_dla(pd, pg, identity_only());
  CHECK_FALSE(d.defined(2));
  CHECK(d.defined(0));
  CHECK(d.max_normalization_error() <= 1e-12);
  const auto c = optimal_classifier_ssgan(pd, identity_only());
  CHECK_FALSE(c.defined(2));
}

TEST_CASE("optimal DAGAN discriminator") {
  const auto same = optimal_binary_dagan(pd73, pd73, swap_set());
  CHECK(same(0, kRealCol) == doctest::Approx(0.5));
  const auto sep = optimal_binary_dagan(FiniteDistribution({1.0, 0.0}), FiniteDistribution({0.0, 1.0}),
                                        identity_only());
  CHECK(sep(0, kRealCol) == 1.0);
  CHECK(sep(1, kRealCol) == 0.0);
  const auto mixed = optimal_binary_dagan(pd73, pg46, swap_set());
  CHECK(mixed(0, kRealCol) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mixed(1, kRealCol) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("KL with zeros") {
  CHECK(kl_divergence(FiniteDistribution({1.0, 0.0}), FiniteDistribution({0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)));
  CHECK(std::isinf(kl_divergence(FiniteDistribution({0.5, 0.5}), FiniteDistribution({1.0, 0.0}))));
  CHECK(kl_divergence(pd73, pd73) == 0.0);
}

TEST_CASE("generator values") {
  const FiniteDistribution half({0.5, 0.5});
  CHECK(generator_value_ssgan(half, half, swap_set()) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(generator_value_ssgan(FiniteDistribution({1.0, 0.0}), pd73, swap_set()) ==
        doctest::Approx(std::log(0.7)).epsilon(1e-15));

  // MS: KL between mixtures minus the SSGAN term.
  CHECK(generator_value_ms(pd73, pd73, swap_set()) ==
        doctest::Approx(-generator_value_ssgan(pd73, pd73, swap_set())).epsilon(1e-15));
  CHECK(generator_value_ms(pg46, pd73, swap_set()) ==
        doctest::Approx(-generator_value_ssgan(pg46, pd73, swap_set())).epsilon(1e-14));
  CHECK(generator_value_ms(pg46, pd73, identity_only()) ==
        doctest::Approx(kl_divergence(pg46, pd73)).epsilon(1e-15));

  CHECK(generator_value_la(pd73, pd73, swap_set()) == 0.0);
  const double want = 0.4 * std::log(4.0 / 7.0) + 0.6 * std::log(2.0);
  CHECK(generator_value_la(pg46, pd73, swap_set()) == doctest::Approx(want).epsilon(1e-14));
  CHECK(std::abs(want - 0.1921) < 1e-4);
  CHECK(std::isinf(generator_value_la(half, FiniteDistribution({1.0, 0.0}), identity_only())));
}

TEST_CASE("the SSGAN generator target is biased away from p_d") {
  // Grid search over the 2-point simplex.
  double best = -std::numeric_limits<double>::infinity(), best_a = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double a = i / 1000.0;
    const double v = generator_value_ssgan(FiniteDistribution({a, 1.0 - a}), pd73, swap_set());
    if (v > best) {
      best = v;
      best_a = a;
    }
  }
  const double tv = metrics::tv_distance(FiniteDistribution({best_a, 1.0 - best_a}), pd73);
  CHECK(tv >= 0.05);
}

TEST_CASE("three expectation forms") {
  Rng rng(9);
  const auto p = random_distribution(4, rng);
  const auto s4 = TransformationSet::uniform({Transformation::identity(), Transformation::permutation({1, 0, 3, 2})});
  auto forms = verify_prop_base(p, s4, std::vector<double>(4, 2.5));
  for (double v : forms) CHECK(v == doctest::Approx(std::log(2.5)).epsilon(1e-14));

  std::vector<double> f{0.3, 1.7, 0.9, 2.2};
  double direct = 0.0;
  for (std::size_t x = 0; x < 4; ++x) direct += p[x] * std::log(f[x]);
  for (double v : verify_prop_base(p, identity_only(), f)) CHECK(std::abs(v - direct) <= 1e-15);

  for (int t = 0; t < 50; ++t) {
    const auto q = random_distribution(4, rng);
    for (double& v : f) v = rng.uniform(0.05, 3.0);
    forms = verify_prop_base(q, s4, f);
    CHECK(std::abs(forms[0] - forms[1]) <= 1e-12);
    CHECK(std::abs(forms[1] - forms[2]) <= 1e-12);
  }
}

TEST_CASE("identities on random instances") {
  Rng rng(21);
  for (std::size_t n : {4, 8}) {
    const auto set = TransformationSet::uniform(TransformationSet::cyclic_group(n, 4));
    for (int t = 0; t < 30; ++t) {
      const auto pd = random_distribution(n, rng), pg = random_distribution(n, rng);
      const auto dla = optimal_dla(pd, pg, set);
      CHECK(dla.max_normalization_error() <= 1e-12);
      CHECK(max_gap(dla, numeric_maximizer(dla_weights(pd, pg, set))) <= 1e-6);
      CHECK(std::abs(la_generator_objective(pg, set, dla) + generator_value_la(pg, pd, set)) <= 1e-9);

      const auto c = optimal_classifier_ssgan(pd, set);
      CHECK(std::abs(ssgan_generator_ss_term(pg, set, c) - generator_value_ssgan(pg, pd, set)) <= 1e-9);
      const auto cp = optimal_classifier_ms(pd, pg, set);
      CHECK(std::abs(ms_generator_ss_term(pg, set, cp) + generator_value_ms(pg, pd, set)) <= 1e-9);

      const double kl = kl_divergence(pg, pd);
      for (const auto& tk : set.transforms())
        CHECK(std::abs(kl_divergence(pushforward(tk, pg), pushforward(tk, pd)) - kl) <= 1e-14);
    }
  }
}

TEST_CASE("non-uniform transform weights enter the closed forms") {
  Rng rng(8);
  const auto set = TransformationSet(TransformationSet::cyclic_group(6, 3), {0.5, 0.3, 0.2});
  for (int t = 0; t < 10; ++t) {
    const auto pd = random_distribution(6, rng), pg = random_distribution(6, rng);
    CHECK(max_gap(optimal_dla(pd, pg, set), numeric_maximizer(dla_weights(pd, pg, set))) <= 1e-6);
    CHECK(max_gap(optimal_classifier_ssgan(pd, set), numeric_maximizer(ssgan_classifier_weights(pd, set))) <=
          1e-6);
    CHECK(max_gap(optimal_classifier_ms(pd, pg, set), numeric_maximizer(ms_classifier_weights(pd, pg, set))) <=
          1e-6);
  }
}

TEST_CASE("group mixture family") {
  Rng rng(17);
  const auto pd = random_distribution(4, rng);
  const auto e1 = theorem4_family(pd, z4(), MixtureWeights::unit(4, 0));
  CHECK(vals(e1.p_pi) == vals(pd));
  CHECK(e1.mixture_gap == 0.0);

  for (int t = 0; t < 20; ++t) {
    std::vector<double> w(4);
    for (double& v : w) v = rng.uniform();
    double s = 0.0;
    for (double v : w) s += v;
    for (double& v : w) v /= s;
    const auto res = theorem4_family(pd, z4(), MixtureWeights(w));
    CHECK(res.mixture_gap <= 1e-12);
    CHECK(metrics::tv_distance(res.p_pi, pd) > 0.0);
  }

  const auto broken = TransformationSet::uniform(
      {Transformation::identity(), Transformation::cyclic_shift(4, 1), Transformation::cyclic_shift(4, 3)});
  try {
    theorem4_family(pd, broken, MixtureWeights({0.2, 0.3, 0.5}));
    FAIL("expected GroupHypothesisError");
  } catch (const GroupHypothesisError& e) {
    REQUIRE(e.witness());
    const auto [i, j] = *e.witness();
    CHECK_FALSE(broken.find(broken[i].compose(broken[j])));
  }
  CHECK_THROWS_AS(theorem4_family(pd, TransformationSet(TransformationSet::cyclic_group(4, 2), {0.9, 0.1}),
                                  MixtureWeights({0.5, 0.5})),
                  GroupHypothesisError);
}

TEST_CASE("exact best responses match the closed forms") {
  Rng rng(30);
  const auto set = TransformationSet::uniform(TransformationSet::cyclic_group(8, 4));
  const auto pd = random_distribution(8, rng), pg = random_distribution(8, rng);
  const auto dagan = ClassifierTable::from_weights(disc_weights(Method::dagan, pd, pg, set)[0]);
  CHECK(max_gap(dagan, optimal_binary_dagan(pd, pg, set)) <= 1e-15);

  const auto heads = disc_weights(Method::dagan_md, pd, pg, set);
  REQUIRE(heads.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto h = ClassifierTable::from_weights(heads[k]);
    const auto pdk = pushforward(set[k], pd), pgk = pushforward(set[k], pg);
    for (std::size_t x = 0; x < 8; ++x) CHECK(std::abs(h(x, kRealCol) - pdk[x] / (pdk[x] + pgk[x])) <= 1e-15);
  }
}

TEST_CASE("exact descent") {
  Rng rng(2);
  const auto pd = random_distribution(4, rng);
  const auto rotated = pushforward(z4()[1], pd);
  DescentOptions o;
  o.steps = 3000;

  SUBCASE("label-augmented descent converges from random inits") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      o.seed = seed;
      const auto r = exact_descent(Method::ssgan_la, pd, z4(), o);
      CHECK(r.trajectory.back().tv <= 1e-3);
    }
  }
  SUBCASE("plain GAN converges") {
    const auto r = exact_descent(Method::gan, pd, z4(), o);
    CHECK(r.trajectory.back().tv <= 1e-3);
  }
  SUBCASE("DAGAN is stuck at a rotated copy") {
    o.init = rotated;
    const auto r = exact_descent(Method::dagan, pd, z4(), o);
    CHECK(r.trajectory.front().grad_norm <= 1e-9);
    const double start = metrics::tv_distance(rotated, pd);
    for (const auto& s : r.trajectory) {
      CHECK(s.tv >= start - 1e-3);
      CHECK(s.tv_mixture <= 1e-6);
    }
  }
  SUBCASE("label-augmented descent escapes the rotated copy") {
    o.init = rotated;
    const auto r = exact_descent(Method::ssgan_la, pd, z4(), o);
    CHECK(r.trajectory.front().objective == doctest::Approx(generator_value_la(rotated, pd, z4())).epsilon(1e-9));
    CHECK(r.trajectory.front().objective > 0.0);
    CHECK(r.trajectory.front().grad_norm >= 1e-3);
    CHECK(r.trajectory.back().tv <= 1e-3);
  }
  SUBCASE("gradient-ascent discriminator mode also converges") {
    o.disc_mode = DiscMode::gradient_ascent;
    o.n_dis = 5;
    o.steps = 5000;
    const auto r = exact_descent(Method::ssgan_la, pd, z4(), o);
    CHECK(r.trajectory.back().tv <= 1e-2);
  }
  SUBCASE("deterministic given seed") {
    o.seed = 7;
    o.steps = 200;
    const auto a = exact_descent(Method::ssgan_ms, pd, z4(), o);
    const auto b = exact_descent(Method::ssgan_ms, pd, z4(), o);
    CHECK(vals(a.final_pg) == vals(b.final_pg));
  }
  SUBCASE("non-finite objective aborts") {
    CHECK_THROWS_AS(exact_descent(Method::ssgan_la, FiniteDistribution::point_mass(4, 0), z4(), o), DescentError);
  }
}
