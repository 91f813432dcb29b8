#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lagan/adam.hpp"
#include "lagan/autodiff.hpp"
#include "lagan/rng.hpp"
#include "random_graph.hpp"

using namespace lagan;
using ad::Tensor;

TEST_CASE("forward ops on hand examples") {
  const Tensor z = Tensor::zeros({2, 3});
  const auto tz = ad::tanh(z);
  for (double v : tz.values()) CHECK(v == 0.0);

  const auto ls = ad::log_softmax(Tensor::constant({1, 2}, {0.0, 0.0}));
  CHECK(ls.values()[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(ls.values()[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));

  const auto mm = ad::matmul(Tensor::constant({1, 2}, {1, 2}), Tensor::constant({2, 1}, {3, 4}));
  CHECK(mm.item() == 11.0);

  const auto g = ad::gather(Tensor::constant({2, 2}, {1, 2, 3, 4}), {3, 0, 0}, {3, 1});
  CHECK(std::vector<double>(g.values().begin(), g.values().end()) == std::vector<double>{4, 1, 1});
  const auto s = ad::slice_cols(Tensor::constant({2, 3}, {1, 2, 3, 4, 5, 6}), 1, 3);
  CHECK(std::vector<double>(s.values().begin(), s.values().end()) == std::vector<double>{2, 3, 5, 6});
}

TEST_CASE("shape errors name the op and both shapes") {
  const Tensor a = Tensor::zeros({2, 3}), b = Tensor::zeros({2, 3});
  try {
    ad::matmul(a, b);
    FAIL("expected a shape error");
  } catch (const ad::ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("[2x3]") != std::string::npos);
  }
  CHECK_THROWS_AS(ad::add(a, Tensor::zeros({3, 2})), ad::ShapeError);
  CHECK_THROWS_AS(ad::mul(a, Tensor::zeros({3, 2})), ad::ShapeError);
  CHECK_THROWS_AS(ad::gather(a, {6}, {1}), ad::ShapeError);
}

TEST_CASE("log of a non-positive value is a domain error") {
  CHECK_THROWS_AS(ad::log(Tensor::constant({1, 2}, {1.0, 0.0})), ad::DomainError);
  CHECK_THROWS_AS(ad::log(Tensor::constant({1, 1}, {-3.0})), ad::DomainError);
}

TEST_CASE("backward on hand examples") {
  auto x = Tensor::parameter({2, 2}, {0.3, -1.0, 2.0, 0.5});
  ad::backward(ad::sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);

  auto y = Tensor::parameter({1, 5}, std::vector<double>(5, 0.0));
  ad::backward(ad::mean(ad::tanh(y)));
  for (double g : y.grad()) CHECK(g == doctest::Approx(0.2).epsilon(1e-15));

  CHECK_THROWS_AS(ad::backward(ad::tanh(y)), ad::ShapeError);
}

TEST_CASE("zero_grad resets and repeated backward accumulates exactly") {
  Rng rng(3);
  std::vector<double> v(6);
  for (double& e : v) e = rng.uniform(-2, 2);
  auto x = Tensor::parameter({2, 3}, v);
  auto w = Tensor::parameter({3, 2}, std::vector<double>(v.rbegin(), v.rend()));
  const auto loss = ad::mean(ad::log_softmax(ad::matmul(ad::tanh(x), w)));
  ad::backward(loss);
  const std::vector<double> once(x.grad().begin(), x.grad().end());
  ad::backward(loss);
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(x.grad()[i] == 2.0 * once[i]);
  x.zero_grad();
  for (double g : x.grad()) CHECK(g == 0.0);
}

TEST_CASE("frozen leaves receive no gradient") {
  auto x = Tensor::parameter({1, 2}, {1.0, 2.0});
  auto w = Tensor::parameter({1, 2}, {3.0, 4.0});
  w.set_requires_grad(false);
  ad::backward(ad::sum(ad::mul(x, w)));
  CHECK(x.grad()[0] == 3.0);
  CHECK(w.grad()[0] == 0.0);
}

TEST_CASE("log_softmax rows exponentiate to one") {
  Rng rng(11);
  std::vector<double> v(40);
  for (double& e : v) e = rng.uniform(-30, 30);
  const auto ls = ad::log_softmax(Tensor::constant({5, 8}, v));
  for (std::size_t r = 0; r < 5; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 8; ++c) s += std::exp(ls.at(r, c));
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("finite_diff_grad on hand examples") {
  const auto g1 = ad::finite_diff_grad([](std::span<const double> p) { return p[0] * p[0]; },
                                       std::vector<double>{3.0}, 1e-5);
  CHECK(std::abs(g1[0] - 6.0) <= 1e-8);
  const auto g2 = ad::finite_diff_grad(
      [](std::span<const double> p) { return p[0] * p[0] + p[1] * p[1]; }, std::vector<double>{1.0, 2.0},
      1e-5);
  CHECK(std::abs(g2[0] - 2.0) <= 1e-7);
  CHECK(std::abs(g2[1] - 4.0) <= 1e-7);
  CHECK_THROWS(ad::finite_diff_grad([](std::span<const double>) { return 0.0; },
                                    std::vector<double>{1.0}, 0.0));
}

TEST_CASE("two-layer tanh MLP gradients match central differences") {
  Rng rng(5);
  auto draw = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& e : v) e = rng.uniform(-1, 1);
    return v;
  };
  const auto x = Tensor::constant({4, 3}, draw(12));
  std::vector<double> flat = draw(3 * 5 + 5 + 5 * 2 + 2);
  auto forward = [&](std::span<const double> p, std::vector<Tensor>* keep) {
    std::size_t o = 0;
    auto take = [&](ad::Shape s) {
      const auto n = ad::shape_numel(s);
      auto t = Tensor::parameter(s, std::vector<double>(p.begin() + o, p.begin() + o + n));
      o += n;
      if (keep) keep->push_back(t);
      return t;
    };
    const auto w1 = take({3, 5}), b1 = take({1, 5}), w2 = take({5, 2}), b2 = take({1, 2});
    const auto ones = Tensor::constant({4, 1}, std::vector<double>(4, 1.0));
    const auto h = ad::tanh(ad::add(ad::matmul(x, w1), ad::matmul(ones, b1)));
    const auto out = ad::add(ad::matmul(h, w2), ad::matmul(ones, b2));
    return ad::mean(ad::log_softmax(out));
  };
  std::vector<Tensor> leaves;
  ad::backward(forward(flat, &leaves));
  std::vector<double> analytic;
  for (const auto& l : leaves) analytic.insert(analytic.end(), l.grad().begin(), l.grad().end());
  const auto numeric = ad::finite_diff_grad(
      [&](std::span<const double> p) { return forward(p, nullptr).item(); }, flat, 1e-5);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
    CHECK((std::abs(analytic[i] - numeric[i]) <= 1e-8 ||
           std::abs(analytic[i] - numeric[i]) / scale <= 1e-5));
  }
}

TEST_CASE("random composite graphs: backward matches central differences") {
  std::size_t checked = 0, skipped = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; checked < 200; ++seed) {
    const testsupport::RandomGraph g(seed);
    const auto res = g.check();
    // A relu input within a few steps of its kink makes the difference
    // quotient straddle the corner; such instances say nothing about backward.
    if (res.kink_margin < 1e-3) {
      ++skipped;
      continue;
    }
    ++checked;
    worst = std::max(worst, res.max_rel_error);
    INFO("seed " << seed << " rel " << res.max_rel_error << " abs " << res.max_abs_error);
    CHECK(res.ok);
  }
  MESSAGE("200 graphs, worst relative error " << worst << ", " << skipped << " resampled near a relu kink");
}

// ---------------------------------------------------------------------------
// Adam

TEST_CASE("adam: zero gradient leaves parameters, increments t") {
  std::vector<double> p{1.0, -2.0};
  AdamState st(2, {});
  adam_step(p, std::vector<double>{0.0, 0.0}, st);
  CHECK(p == std::vector<double>{1.0, -2.0});
  CHECK(st.t == 1);
  adam_step(p, std::vector<double>{0.0, 0.0}, st);
  CHECK(st.t == 2);
}

TEST_CASE("adam: first step with beta=0 and eps=0 moves by lr * sign(g)") {
  std::vector<double> p{1.0, 1.0, 1.0};
  AdamState st(3, {0.1, 0.0, 0.0, 0.0});
  adam_step(p, std::vector<double>{3.0, -0.25, 1e-3}, st);
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("adam: non-finite gradient names its index and changes nothing") {
  std::vector<double> p{1.0, 2.0, 3.0};
  AdamState st(3, {});
  try {
    adam_step(p, std::vector<double>{0.1, NAN, 0.2}, st);
    FAIL("expected NonFiniteGradient");
  } catch (const NonFiniteGradient& e) {
    CHECK(e.index() == 1);
  }
  CHECK(p == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(st.t == 0);
  CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0}, st), std::invalid_argument);
}

TEST_CASE("adam: identical runs give bit-identical trajectories") {
  auto run = [] {
    auto w = Tensor::parameter({2, 2}, {0.5, -0.3, 0.8, 0.1});
    Adam opt({w}, {});
    std::vector<double> trace;
    for (int i = 0; i < 50; ++i) {
      opt.zero_grad();
      ad::backward(ad::sum(ad::tanh(ad::matmul(w, w))));
      opt.step();
      trace.insert(trace.end(), w.values().begin(), w.values().end());
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("adam: minimizes a quadratic") {
  auto w = Tensor::parameter({1, 3}, {2.0, -1.0, 0.5});
  Adam opt({w}, {0.05, 0.9, 0.999, 1e-8});
  for (int i = 0; i < 2000; ++i) {
    opt.zero_grad();
    ad::backward(ad::sum(ad::mul(w, w)));
    opt.step();
  }
  for (double v : w.values()) CHECK(std::abs(v) < 1e-3);
  CHECK(opt.states()[0].t == 2000);
}
