#pragma once

// Training losses for every method, in log-loss and hinge form. Every loss is
// something to minimize: discriminator objectives that are maximized in their
// usual statement come back negated.
//
// Expectations are weighted sums over rows, so the same code serves sampled
// mini-batches (weight 1/n, or p(T_k)/n when every transform is applied) and
// exhaustive enumerations of a finite space (weight = exact probability).

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lagan/autodiff.hpp"
#include "lagan/method.hpp"

namespace lagan::objectives {

enum class LossForm { log, hinge };
enum class GenLoss { minimax, non_saturating };
enum class Side { disc, gen };

struct Rows {
  ad::Tensor logits;                // n x width
  std::vector<std::size_t> labels;  // per-row class or transform index
  std::vector<double> weights;      // per-row expectation weights

  std::size_t size() const { return weights.size(); }
  // Weights 1/n, no labels.
  static Rows uniform(ad::Tensor logits, std::vector<std::size_t> labels = {});
};

struct LossOptions {
  LossForm form = LossForm::log;
  GenLoss gen_loss = GenLoss::minimax;
};

class LossError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MethodConfig {
  Method method = Method::gan;
  // Must stay empty for methods without a trade-off.
  std::optional<double> lambda_d;
  std::optional<double> lambda_g;
  LossForm form = LossForm::log;
  GenLoss gen_loss = GenLoss::minimax;
  std::size_t n_dis = 2;

  // Throws LossError describing the first violated constraint.
  void validate() const;
  double resolved_lambda_d() const { return lambda_d.value_or(1.0); }
  double resolved_lambda_g() const { return lambda_g.value_or(1.0); }
};

// Sum_i w_i v_i for an n x 1 column; zero when there are no rows.
ad::Tensor expect(const ad::Tensor& column, const std::vector<double>& weights);

// [log D(fake | x), log D(real | x)] for a 1-wide logit column, D = sigmoid.
ad::Tensor binary_log_probs(const ad::Tensor& logit);
// -log softmax(logits)[label] per row, as an n x 1 column.
ad::Tensor cross_entropy_rows(const ad::Tensor& logits, const std::vector<std::size_t>& labels);
// Mean over the width-1 competitors c != target of max(0, margin - l_target + l_c)
// (or its linear version when hinge_clip is false).
ad::Tensor multiclass_hinge_rows(const ad::Tensor& logits, const std::vector<std::size_t>& targets,
                                 bool hinge_clip = true, double margin = 1.0);

// Discriminator side uses both batches; generator side only reads fake.
ad::Tensor loss_gan(const Rows& real, const Rows& fake, Side side, const LossOptions& opts = {});

// d_* are 1-wide GAN logits on untransformed samples; c_* are K-wide
// classifier logits on transformed samples with labels = transform index.
// lambda is lambda_d on the disc side and lambda_g on the gen side.
ad::Tensor loss_ssgan(const Rows& d_real, const Rows& d_fake, const Rows& c_real,
                      const Rows& c_fake, Side side, double lambda, const LossOptions& opts = {});
// cplus_* are (K+1)-wide with column 0 the fake class and column k+1 transform k.
ad::Tensor loss_ssgan_ms(const Rows& d_real, const Rows& d_fake, const Rows& cplus_real,
                         const Rows& cplus_fake, Side side, double lambda,
                         const LossOptions& opts = {});

// GAN loss on transformed batches; the transform weighting lives in the rows.
ad::Tensor loss_dagan(const Rows& real, const Rows& fake, Side side, const LossOptions& opts = {});

// K-wide logits, one column per head; labels route each row to its head.
ad::Tensor loss_dagan_md(const Rows& real, const Rows& fake, Side side,
                         const LossOptions& opts = {});

// 2K-wide logits; labels are transform indices, the real/fake half is implied
// by which batch a row sits in (column k real, column K + k fake).
ad::Tensor loss_ssgan_la(const Rows& real, const Rows& fake, Side side,
                         const LossOptions& opts = {});

// The two heads of a binary_plus_label_aug discriminator, already split: d_*
// are 1-wide logits on untransformed samples, la_* 2K-wide logits on
// transformed ones.
ad::Tensor loss_ssgan_la_plus(const Rows& d_real, const Rows& d_fake, const Rows& la_real,
                              const Rows& la_fake, Side side, double lambda,
                              const LossOptions& opts = {});

}  // namespace lagan::objectives
