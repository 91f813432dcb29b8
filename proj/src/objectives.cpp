#include "lagan/objectives.hpp"

#include <cmath>
#include <string>

namespace lagan::objectives {

namespace {

void check_rows(const char* op, const Rows& r, std::size_t width, bool need_labels,
                std::size_t label_limit) {
  if (r.size() == 0) return;
  if (!r.logits.defined())
    throw LossError(std::string(op) + ": rows have weights but no logits");
  if (r.logits.rank() != 2 || r.logits.rows() != r.size())
    throw LossError(std::string(op) + ": " + std::to_string(r.size()) + " weights for logits " +
                    ad::shape_str(r.logits.shape()));
  if (width && r.logits.cols() != width)
    throw LossError(std::string(op) + ": expected " + std::to_string(width) +
                    "-wide logits, got " + ad::shape_str(r.logits.shape()));
  if (need_labels) {
    if (r.labels.size() != r.size())
      throw LossError(std::string(op) + ": missing labels (" + std::to_string(r.labels.size()) +
                      " for " + std::to_string(r.size()) + " rows)");
    for (auto l : r.labels)
      if (l >= label_limit)
        throw LossError(std::string(op) + ": label " + std::to_string(l) + " out of range [0, " +
                        std::to_string(label_limit) + ")");
  }
}

ad::Tensor zero() { return ad::Tensor::scalar(0.0); }

ad::Tensor column_of(const ad::Tensor& t2, std::size_t c) { return ad::slice_cols(t2, c, c + 1); }

// E log D(real) and E log D(fake) pieces of the binary log loss.
ad::Tensor e_log_real(const Rows& r) {
  if (r.size() == 0) return zero();
  return expect(column_of(binary_log_probs(r.logits), 1), r.weights);
}
ad::Tensor e_log_fake(const Rows& r) {
  if (r.size() == 0) return zero();
  return expect(column_of(binary_log_probs(r.logits), 0), r.weights);
}

ad::Tensor e_cross_entropy(const Rows& r, const std::vector<std::size_t>& targets) {
  if (r.size() == 0) return zero();
  return expect(cross_entropy_rows(r.logits, targets), r.weights);
}

ad::Tensor e_relu_margin(const Rows& r, double sign) {
  // E max(0, 1 - sign * l)
  if (r.size() == 0) return zero();
  return expect(ad::relu(ad::affine(r.logits, -sign, 1.0)), r.weights);
}

std::vector<std::size_t> la_targets(const Rows& r, bool real) {
  const std::size_t K = r.logits.cols() / 2;
  std::vector<std::size_t> t(r.labels);
  if (!real)
    for (auto& v : t) v += K;
  return t;
}

}  // namespace

Rows Rows::uniform(ad::Tensor logits, std::vector<std::size_t> labels) {
  const auto n = logits.rows();
  return Rows{std::move(logits), std::move(labels),
              std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0)};
}

void MethodConfig::validate() const {
  const auto name = std::string(to_string(method));
  if (!uses_tradeoff(method)) {
    if (lambda_d || lambda_g)
      throw LossError("method " + name + " has no trade-off hyper-parameter; remove lambda_d/lambda_g");
  }
  for (const auto& [key, v] : {std::pair{"lambda_d", lambda_d}, std::pair{"lambda_g", lambda_g}})
    if (v && !(std::isfinite(*v) && *v >= 0.0))
      throw LossError(std::string(key) + " must be a finite non-negative number");
  if (n_dis < 1) throw LossError("n_dis must be at least 1");
}

ad::Tensor expect(const ad::Tensor& column, const std::vector<double>& weights) {
  if (weights.empty()) return zero();
  if (column.numel() != weights.size())
    throw LossError("expect: " + std::to_string(weights.size()) + " weights for " +
                    ad::shape_str(column.shape()));
  return ad::sum(ad::mul(column, ad::Tensor::constant(column.shape(), weights)));
}

ad::Tensor binary_log_probs(const ad::Tensor& logit) {
  if (logit.rank() != 2 || logit.cols() != 1)
    throw ad::ShapeError("binary_log_probs", "expects an n x 1 logit column, got " +
                                                 ad::shape_str(logit.shape()));
  // [0, l] under log-softmax is [log(1 - sigmoid(l)), log sigmoid(l)].
  static const auto lift = ad::Tensor::constant({1, 2}, {0.0, 1.0});
  return ad::log_softmax(ad::matmul(logit, lift));
}

ad::Tensor cross_entropy_rows(const ad::Tensor& logits, const std::vector<std::size_t>& labels) {
  return ad::affine(ad::pick_per_row(ad::log_softmax(logits), labels), -1.0, 0.0);
}

ad::Tensor multiclass_hinge_rows(const ad::Tensor& logits, const std::vector<std::size_t>& targets,
                                 bool hinge_clip, double margin) {
  if (logits.rank() != 2) throw ad::ShapeError("multiclass_hinge_rows", "expects rank-2 logits");
  const std::size_t n = logits.rows(), w = logits.cols();
  if (targets.size() != n) throw LossError("multiclass_hinge_rows: one target per row required");
  if (w < 2) throw LossError("multiclass_hinge_rows: need at least two classes");
  std::vector<std::size_t> comp, tgt;
  comp.reserve(n * (w - 1));
  tgt.reserve(n * (w - 1));
  for (std::size_t r = 0; r < n; ++r) {
    if (targets[r] >= w) throw LossError("multiclass_hinge_rows: target out of range");
    for (std::size_t c = 0; c < w; ++c) {
      if (c == targets[r]) continue;
      comp.push_back(r * w + c);
      tgt.push_back(r * w + targets[r]);
    }
  }
  const ad::Shape s{n, w - 1};
  auto diff = ad::sub(ad::gather(logits, std::move(comp), s), ad::gather(logits, std::move(tgt), s));
  auto term = ad::affine(diff, 1.0, margin);
  if (hinge_clip) term = ad::relu(term);
  const auto avg = ad::Tensor::constant({w - 1, 1}, std::vector<double>(w - 1, 1.0 / (w - 1)));
  return ad::matmul(term, avg);
}

// ---------------------------------------------------------------------------

ad::Tensor loss_gan(const Rows& real, const Rows& fake, Side side, const LossOptions& opts) {
  check_rows("loss_gan", fake, 1, false, 0);
  if (side == Side::disc) check_rows("loss_gan", real, 1, false, 0);
  if (opts.form == LossForm::hinge) {
    if (side == Side::disc) return ad::add(e_relu_margin(real, 1.0), e_relu_margin(fake, -1.0));
    if (fake.size() == 0) return zero();
    return ad::affine(expect(fake.logits, fake.weights), -1.0, 0.0);
  }
  if (side == Side::disc)
    return ad::affine(ad::add(e_log_real(real), e_log_fake(fake)), -1.0, 0.0);
  if (opts.gen_loss == GenLoss::minimax) return e_log_fake(fake);
  return ad::affine(e_log_real(fake), -1.0, 0.0);
}

ad::Tensor loss_ssgan(const Rows& d_real, const Rows& d_fake, const Rows& c_real,
                      const Rows& c_fake, Side side, double lambda, const LossOptions& opts) {
  const auto gan = loss_gan(d_real, d_fake, side, opts);
  if (lambda == 0.0) return gan;
  // Classifier is trained on real samples only; the generator is rewarded
  // when the classifier recognizes the transform of its samples.
  const Rows& c = side == Side::disc ? c_real : c_fake;
  const std::size_t K = c.size() ? c.logits.cols() : 0;
  check_rows("loss_ssgan", c, 0, true, K);
  return ad::add(gan, ad::affine(e_cross_entropy(c, c.labels), lambda, 0.0));
}

ad::Tensor loss_ssgan_ms(const Rows& d_real, const Rows& d_fake, const Rows& cplus_real,
                         const Rows& cplus_fake, Side side, double lambda,
                         const LossOptions& opts) {
  const auto gan = loss_gan(d_real, d_fake, side, opts);
  if (lambda == 0.0) return gan;
  const std::size_t width =
      cplus_real.size() ? cplus_real.logits.cols() : (cplus_fake.size() ? cplus_fake.logits.cols() : 0);
  if (side == Side::disc) check_rows("loss_ssgan_ms", cplus_real, width, true, width - 1);
  check_rows("loss_ssgan_ms", cplus_fake, width, true, width - 1);

  auto shifted = [](const Rows& r) {
    std::vector<std::size_t> t(r.labels);
    for (auto& v : t) v += 1;
    return t;
  };
  const std::vector<std::size_t> fake_class(cplus_fake.size(), 0);
  if (side == Side::disc) {
    // -(E_real log C+(k) + E_fake log C+(0))
    auto ss = ad::add(e_cross_entropy(cplus_real, shifted(cplus_real)),
                      e_cross_entropy(cplus_fake, fake_class));
    return ad::add(gan, ad::affine(ss, lambda, 0.0));
  }
  // -(E_fake log C+(k) - E_fake log C+(0))
  auto ss = ad::sub(e_cross_entropy(cplus_fake, shifted(cplus_fake)),
                    e_cross_entropy(cplus_fake, fake_class));
  return ad::add(gan, ad::affine(ss, lambda, 0.0));
}

ad::Tensor loss_dagan(const Rows& real, const Rows& fake, Side side, const LossOptions& opts) {
  return loss_gan(real, fake, side, opts);
}

ad::Tensor loss_dagan_md(const Rows& real, const Rows& fake, Side side, const LossOptions& opts) {
  auto route = [](const Rows& r) {
    if (r.size() == 0) return r;
    check_rows("loss_dagan_md", r, 0, true, r.logits.cols());
    return Rows{ad::pick_per_row(r.logits, r.labels), r.labels, r.weights};
  };
  return loss_gan(side == Side::disc ? route(real) : Rows{}, route(fake), side, opts);
}

ad::Tensor loss_ssgan_la(const Rows& real, const Rows& fake, Side side, const LossOptions& opts) {
  auto check = [](const Rows& r) {
    if (r.size() == 0) return;
    if (r.logits.cols() % 2 != 0 || r.logits.cols() == 0)
      throw LossError("loss_ssgan_la: logits must be 2K wide, got " + ad::shape_str(r.logits.shape()));
    check_rows("loss_ssgan_la", r, 0, true, r.logits.cols() / 2);
  };
  if (side == Side::disc) check(real);
  check(fake);

  if (opts.form == LossForm::hinge) {
    if (side == Side::disc) {
      ad::Tensor a = real.size() ? expect(multiclass_hinge_rows(real.logits, la_targets(real, true)), real.weights) : zero();
      ad::Tensor b = fake.size() ? expect(multiclass_hinge_rows(fake.logits, la_targets(fake, false)), fake.weights) : zero();
      return ad::add(a, b);
    }
    if (fake.size() == 0) return zero();
    auto to_real = multiclass_hinge_rows(fake.logits, la_targets(fake, true), false, 0.0);
    auto to_fake = multiclass_hinge_rows(fake.logits, la_targets(fake, false), false, 0.0);
    return expect(ad::sub(to_real, to_fake), fake.weights);
  }
  if (side == Side::disc)
    return ad::add(e_cross_entropy(real, la_targets(real, true)),
                   e_cross_entropy(fake, la_targets(fake, false)));
  // -(E log D(k,1) - E log D(k,0))
  return ad::sub(e_cross_entropy(fake, la_targets(fake, true)),
                 e_cross_entropy(fake, la_targets(fake, false)));
}

ad::Tensor loss_ssgan_la_plus(const Rows& d_real, const Rows& d_fake, const Rows& la_real,
                              const Rows& la_fake, Side side, double lambda,
                              const LossOptions& opts) {
  const auto gan = loss_gan(d_real, d_fake, side, opts);
  if (lambda == 0.0) return gan;
  return ad::add(gan, ad::affine(loss_ssgan_la(la_real, la_fake, side, opts), lambda, 0.0));
}

}  // namespace lagan::objectives
