#include <doctest.h>

#include <cmath>
#include <algorithm>

#include "lagan/transform.hpp"

using namespace lagan;
using ad::Tensor;

namespace {

std::vector<double> vals(const Tensor& t) { return {t.values().begin(), t.values().end()}; }
std::vector<double> vals(const FiniteDistribution& p) { return {p.probs().begin(), p.probs().end()}; }

}  // namespace

TEST_CASE("apply: shifts, identity, rotations") {
  const auto shifts = TransformationSet::shifts1d(4);
  // Third transform of the shift family: offset 2 * 2.
  CHECK(vals(apply(shifts[2], Tensor::constant({1, 1}, {0.0}))) == std::vector<double>{4.0});
  CHECK(shifts[0].is_identity());

  const auto x = Tensor::constant({2, 2}, {0.3, -1.2, 5.0, 7.0});
  CHECK(vals(apply(Transformation::identity(), x)) == vals(x));

  const auto r = apply(Transformation::rotation(1), Tensor::constant({1, 2}, {1.0, 0.0}));
  CHECK(r.at(0, 0) == doctest::Approx(0.0));
  CHECK(r.at(0, 1) == 1.0);
}

TEST_CASE("apply: kind and dimension mismatches throw") {
  CHECK_THROWS_AS(apply(Transformation::rotation(1), Tensor::zeros({3, 1})), TransformError);
  CHECK_THROWS_AS(apply(Transformation::shift(1.0), Tensor::zeros({3, 2})), TransformError);
  CHECK_THROWS_AS(apply(Transformation::cyclic_shift(4, 1), Tensor::zeros({3, 1})), TransformError);
  CHECK_THROWS_AS(Transformation::rotation(4), TransformError);
  CHECK_THROWS_AS(Transformation::permutation({0, 0, 1}), TransformError);
}

TEST_CASE("apply is differentiable for shifts and rotations") {
  auto x = Tensor::parameter({1, 2}, {0.4, -0.7});
  ad::backward(ad::sum(ad::mul(apply(Transformation::rotation(1), x),
                               Tensor::constant({1, 2}, {2.0, 3.0}))));
  // (x, y) -> (-y, x), so d/dx = 3, d/dy = -2.
  CHECK(x.grad()[0] == doctest::Approx(3.0));
  CHECK(x.grad()[1] == doctest::Approx(-2.0));

  auto s = Tensor::parameter({2, 1}, {1.0, 2.0});
  ad::backward(ad::sum(apply(Transformation::shift(6.0), s)));
  CHECK(vals(Tensor::constant({2, 1}, {s.grad()[0], s.grad()[1]})) == std::vector<double>{1.0, 1.0});
}

TEST_CASE("inverse undoes apply") {
  const auto x = Tensor::constant({3, 2}, {0.1, 0.2, -3.0, 4.5, 1e3, -2e-3});
  for (int q = 0; q < 4; ++q) {
    const auto t = Transformation::rotation(q);
    CHECK(vals(apply(t.inverse(), apply(t, x))) == vals(x));
  }
  const auto y = Tensor::constant({3, 1}, {0.1, -7.3, 123.456});
  for (const auto& t : TransformationSet::shifts1d(4)) {
    const auto back = vals(apply(t.inverse(), apply(t, y)));
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(std::abs(back[i] - y.values()[i]) <= 1e-12);
  }
}

TEST_CASE("pushforward on hand examples") {
  const FiniteDistribution p({0.7, 0.3});
  CHECK(vals(pushforward(Transformation::identity(), p)) == vals(p));
  CHECK(vals(pushforward(Transformation::permutation({1, 0}), p)) == std::vector<double>{0.3, 0.7});
  const FiniteDistribution q({0.1, 0.2, 0.3, 0.4});
  CHECK(vals(pushforward(Transformation::cyclic_shift(4, 1), q)) ==
        std::vector<double>{0.4, 0.1, 0.2, 0.3});
  CHECK_THROWS_AS(pushforward(Transformation::rotation(1), p), TransformError);
  CHECK_THROWS_AS(pushforward(Transformation::shift(2.0), p), TransformError);
}

TEST_CASE("pushforward preserves mass") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(9);
    for (double& v : w) v = rng.uniform();
    const auto p = FiniteDistribution::normalized(w);
    std::vector<std::size_t> sigma(9);
    for (std::size_t i = 0; i < 9; ++i) sigma[i] = i;
    std::shuffle(sigma.begin(), sigma.end(), rng.engine());
    const auto out = pushforward(Transformation::permutation(sigma), p);
    CHECK(std::abs(out.total() - p.total()) <= 1e-15);
  }
}

TEST_CASE("is_group") {
  CHECK(is_group(TransformationSet::uniform(TransformationSet::rotations(4))).is_group);

  const auto half = is_group(TransformationSet::uniform({Transformation::identity(), Transformation::rotation(1)}));
  CHECK_FALSE(half.is_group);
  REQUIRE(half.witness);
  CHECK(*half.witness == std::make_pair<std::size_t, std::size_t>(1, 1));

  // Offsets 0,2,4,6: 6 + 2 = 8 is missing and nothing has an inverse.
  const auto shifts = is_group(TransformationSet::uniform(TransformationSet::shifts1d(4)));
  CHECK_FALSE(shifts.is_group);
  REQUIRE(shifts.witness);
  const auto [i, j] = *shifts.witness;
  CHECK(2.0 * i + 2.0 * j > 6.0);

  const auto z4 = TransformationSet::uniform(
      {Transformation::identity(), Transformation::cyclic_shift(4, 1), Transformation::cyclic_shift(4, 3)});
  CHECK_FALSE(is_group(z4).is_group);
  CHECK(is_group(TransformationSet::uniform(TransformationSet::cyclic_group(8, 4))).is_group);

  CHECK_THROWS_AS(is_group(TransformationSet::uniform({Transformation::shift(1), Transformation::rotation(1)})),
                  TransformError);
}

TEST_CASE("group cancellation: {T_j o T_i} is the whole set for every j") {
  for (const auto& set : {TransformationSet::uniform(TransformationSet::rotations(4)),
                          TransformationSet::uniform(TransformationSet::cyclic_group(12, 6))}) {
    REQUIRE(is_group(set).is_group);
    for (const auto& tj : set.transforms()) {
      std::vector<int> hits(set.size(), 0);
      for (const auto& ti : set.transforms()) ++hits[*set.find(tj.compose(ti))];
      for (int h : hits) CHECK(h == 1);
    }
  }
}

TEST_CASE("sample_transform frequencies") {
  {
    Rng rng(1);
    const auto one = TransformationSet::uniform({Transformation::identity()});
    for (int i = 0; i < 100; ++i) CHECK(sample_transform(one, rng) == 0);
  }
  {
    Rng rng(2);
    const auto set = TransformationSet::uniform(TransformationSet::rotations(4));
    std::vector<double> freq(4, 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) freq[sample_transform(set, rng)] += 1.0 / n;
    for (double f : freq) CHECK(std::abs(f - 0.25) <= 0.01);
  }
  {
    Rng rng(3);
    const auto set = TransformationSet::identity_upweighted(TransformationSet::rotations(4), 0.5);
    CHECK(set.prob(0) == 0.5);
    CHECK(set.prob(1) == doctest::Approx(1.0 / 6.0));
    double id = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) id += sample_transform(set, rng) == 0 ? 1.0 / n : 0.0;
    CHECK(std::abs(id - 0.5) <= 0.01);
  }
  Rng a(99), b(99);
  const auto set = TransformationSet::uniform(TransformationSet::rotations(4));
  for (int i = 0; i < 100; ++i) CHECK(sample_transform(set, a) == sample_transform(set, b));
}

TEST_CASE("set validation") {
  CHECK_THROWS_AS(TransformationSet({Transformation::identity()}, {0.5}), TransformError);
  CHECK_THROWS_AS(TransformationSet({Transformation::identity(), Transformation::rotation(1)}, {1.2, -0.2}),
                  TransformError);
  CHECK_THROWS_AS(TransformationSet::identity_upweighted({Transformation::rotation(1), Transformation::identity()}),
                  TransformError);
  CHECK_THROWS_AS(TransformationSet::cyclic_group(8, 3), TransformError);
}
