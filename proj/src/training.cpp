#include "lagan/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "lagan/adam.hpp"

namespace lagan {

namespace fs = std::filesystem;
using objectives::Rows;
using objectives::Side;

// ---------------------------------------------------------------------------
// Datasets

std::vector<std::vector<double>> modes2d_centres() {
  // Three blobs on the unit circle at 0, 30 and 60 degrees. None is a
  // quarter-turn image of another, so rotated copies stay distinguishable.
  std::vector<std::vector<double>> out;
  for (double deg : {0.0, 30.0, 60.0}) {
    const double a = deg * std::numbers::pi / 180.0;
    out.push_back({std::cos(a), std::sin(a)});
  }
  return out;
}

Experiment make_experiment(const RunConfig& cfg) {
  Experiment e;
  std::vector<Transformation> ts;
  switch (cfg.dataset) {
    case Dataset::gauss1d_shift:
      e.data_dim = 1;
      ts = TransformationSet::shifts1d(cfg.K);
      break;
    case Dataset::modes2d_rot:
      e.data_dim = 2;
      ts = TransformationSet::rotations(cfg.K);
      e.modes = modes2d_centres();
      break;
    case Dataset::finite:
      throw ConfigError("dataset=finite is trained by exact descent, not sample-based training");
  }
  e.base_set = TransformationSet::uniform(ts);
  e.set = cfg.method == Method::dagan_plus
              ? TransformationSet::identity_upweighted(ts, cfg.identity_weight)
              : e.base_set;
  return e;
}

std::vector<double> sample_real(const RunConfig& cfg, const Experiment& exp, std::size_t n, Rng& rng) {
  std::vector<double> out;
  out.reserve(n * exp.data_dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (exp.data_dim == 1) {
      out.push_back(rng.normal());
    } else {
      const auto& m = exp.modes[rng.index(exp.modes.size())];
      out.push_back(m[0] + cfg.mode_sigma * rng.normal());
      out.push_back(m[1] + cfg.mode_sigma * rng.normal());
    }
  }
  return out;
}

ad::Tensor transform_rows(const ad::Tensor& x, const TransformationSet& set,
                          const std::vector<std::size_t>& ks) {
  if (ks.size() != x.rows())
    throw std::invalid_argument("transform_rows: one transform index per row required");
  for (auto k : ks)
    if (k >= set.size()) throw std::invalid_argument("transform_rows: transform index out of range");
  if (ks.empty()) return x;
  if (std::all_of(ks.begin(), ks.end(), [&](auto k) { return k == ks[0]; }))
    return apply(set[ks[0]], x);
  // Sum over k of mask_k * T_k(x): each row keeps only its own transform.
  ad::Tensor out;
  const auto d = x.cols();
  for (std::size_t k = 0; k < set.size(); ++k) {
    std::vector<double> mask(x.numel(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (ks[i] == k) {
        any = true;
        std::fill_n(mask.begin() + i * d, d, 1.0);
      }
    if (!any) continue;
    auto part = ad::mul(apply(set[k], x), ad::Tensor::constant(x.shape(), std::move(mask)));
    out = out.defined() ? ad::add(out, part) : part;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batches

namespace {

// Every sample through every transform: K stacked blocks, rows weighted
// p(T_k) / n, labels = transform index.
struct Stacked {
  ad::Tensor x;
  std::vector<std::size_t> ks;
  std::vector<double> weights;
};

Stacked stack_all(const ad::Tensor& x, const TransformationSet& set) {
  const std::size_t n = x.rows(), K = set.size();
  std::vector<std::size_t> rep, ks;
  std::vector<double> w;
  rep.reserve(n * K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      rep.push_back(i);
      ks.push_back(k);
      w.push_back(set.prob(k) / static_cast<double>(n));
    }
  auto repeated = K == 1 ? x : ad::gather_rows(x, rep);
  return {transform_rows(repeated, set, ks), std::move(ks), std::move(w)};
}

// One sampled transform per sample.
Stacked sample_one(const ad::Tensor& x, const TransformationSet& set, Rng& rng) {
  const std::size_t n = x.rows();
  std::vector<std::size_t> ks(n);
  for (auto& k : ks) k = sample_transform(set, rng);
  return {transform_rows(x, set, ks), ks, std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

Rows rows_of(ad::Tensor logits, const Stacked& s) { return Rows{std::move(logits), s.ks, s.weights}; }

}  // namespace

ad::Tensor method_loss(const RunConfig& cfg, const TrainedModel& model, const ad::Tensor& real,
                       const ad::Tensor& fake, Side side, Rng& transform_rng) {
  const auto& disc = model.disc;
  const auto& set = model.experiment.set;
  const objectives::LossOptions opts{cfg.loss_form, cfg.gen_loss};
  const bool disc_side = side == Side::disc;
  const double lambda = disc_side ? cfg.resolved_lambda_d() : cfg.resolved_lambda_g();

  auto plain = [&](const ad::Tensor& x) {
    if (!x.defined() || x.rows() == 0) return Rows{};
    return Rows::uniform(models::head_logits(disc, models::discriminate(disc, x), 0));
  };
  auto stacked_rows = [&](const ad::Tensor& x, std::size_t head) {
    if (!x.defined() || x.rows() == 0) return Rows{};
    auto s = stack_all(x, set);
    return rows_of(models::head_logits(disc, models::discriminate(disc, s.x), head), s);
  };
  auto sampled_rows = [&](const ad::Tensor& x, std::size_t head, std::size_t begin,
                          std::size_t end) {
    if (!x.defined() || x.rows() == 0) return Rows{};
    auto s = sample_one(x, set, transform_rng);
    auto logits = models::discriminate(disc, s.x);
    logits = end > begin ? ad::slice_cols(logits, begin, end) : models::head_logits(disc, logits, head);
    return rows_of(std::move(logits), s);
  };
  const ad::Tensor none;
  const ad::Tensor& r = disc_side ? real : none;

  switch (cfg.method) {
    case Method::gan:
      return objectives::loss_gan(plain(r), plain(fake), side, opts);
    case Method::ssgan:
      return objectives::loss_ssgan(plain(r), plain(fake), sampled_rows(r, 1, 0, 0),
                                    sampled_rows(fake, 1, 0, 0), side, lambda, opts);
    case Method::ssgan_ms: {
      // The MS classifier sees fake samples on both sides.
      return objectives::loss_ssgan_ms(plain(r), plain(fake), sampled_rows(r, 1, 0, 0),
                                       sampled_rows(fake, 1, 0, 0), side, lambda, opts);
    }
    case Method::dagan:
    case Method::dagan_plus:
      return objectives::loss_dagan(stacked_rows(r, 0), stacked_rows(fake, 0), side, opts);
    case Method::dagan_md:
      return objectives::loss_dagan_md(stacked_rows(r, 0), stacked_rows(fake, 0), side, opts);
    case Method::ssgan_la:
      return objectives::loss_ssgan_la(stacked_rows(r, 0), stacked_rows(fake, 0), side, opts);
    case Method::ssgan_la_plus: {
      const std::size_t w = disc.out_width();
      auto d_rows = [&](const ad::Tensor& x) {
        if (!x.defined() || x.rows() == 0) return Rows{};
        return Rows::uniform(ad::slice_cols(models::discriminate(disc, x), 0, 1));
      };
      return objectives::loss_ssgan_la_plus(d_rows(r), d_rows(fake), sampled_rows(r, 0, 1, w),
                                            sampled_rows(fake, 0, 1, w), side, lambda, opts);
    }
  }
  throw std::invalid_argument("method_loss: unknown method");
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

metrics::Samples to_samples(std::size_t dim, std::span<const double> v) {
  return metrics::Samples(dim, std::vector<double>(v.begin(), v.end()));
}

// Pushes every point through one transform drawn per point.
metrics::Samples transformed(const metrics::Samples& s, const TransformationSet& set, Rng& rng) {
  metrics::Samples out;
  out.dim = s.dim;
  out.values.reserve(s.values.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto y = apply_point(set[sample_transform(set, rng)], s.point(i));
    out.values.insert(out.values.end(), y.begin(), y.end());
  }
  return out;
}

void evaluate(const RunConfig& cfg, TrainOutcome& out) {
  const auto& exp = out.model.experiment;
  Rng eval_rng(cfg.seed, Stream::eval);
  const auto n = cfg.mmd_samples;
  out.real_eval = to_samples(exp.data_dim, sample_real(cfg, exp, n, eval_rng));
  auto g = models::generate(out.model.gen, n, eval_rng);
  out.gen_eval = to_samples(exp.data_dim, g.values());

  metrics::Samples a = out.real_eval, b = out.gen_eval;
  if (cfg.mmd_space == MmdSpace::transformed) {
    a = transformed(a, exp.base_set, eval_rng);
    b = transformed(b, exp.base_set, eval_rng);
  }
  const auto kernel = metrics::Kernel::median_heuristic();
  out.report.mmd_bandwidth = metrics::mmd_bandwidth(a, b, kernel);
  if (std::isfinite(out.report.mmd_bandwidth))
    out.report.final_mmd = metrics::mmd(a, b, metrics::Kernel::fixed(out.report.mmd_bandwidth));
  else
    out.report.final_mmd = std::numeric_limits<double>::quiet_NaN();
  if (!std::isfinite(out.report.final_mmd)) {
    // Finite losses can still hide a generator whose samples overflowed.
    out.report.failed = true;
    out.report.failure = "non-finite final MMD (generated samples overflowed)";
    return;
  }

  if (cfg.dataset == Dataset::modes2d_rot && is_group(exp.base_set).is_group)
    out.report.leaked_mass =
        metrics::leaked_mass(out.gen_eval, exp.modes, exp.base_set, cfg.leak_radius);
}

}  // namespace

TrainOutcome train(const RunConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  TrainOutcome out;
  out.report.config = cfg;
  out.model.experiment = make_experiment(cfg);
  const auto& exp = out.model.experiment;

  Rng init_rng(cfg.seed, Stream::init);
  out.model.gen = models::build_generator(exp.data_dim, cfg.net_config(), init_rng);
  out.model.disc = models::build_discriminator(models::heads_for(cfg.method, cfg.K), exp.data_dim,
                                               cfg.net_config(), init_rng);
  Rng data_rng(cfg.seed, Stream::data);
  Rng latent_rng(cfg.seed, Stream::latent);
  Rng transform_rng(cfg.seed, Stream::transform);

  const AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, 1e-8};
  auto d_params = out.model.disc.parameters();
  auto g_params = out.model.gen.parameters();
  Adam d_opt(d_params, adam), g_opt(g_params, adam);

  out.report.losses.reserve(cfg.steps);
  for (std::size_t it = 0; it < cfg.steps; ++it) {
    LossRecord rec{it, 0.0, 0.0};
    for (std::size_t s = 0; s < cfg.n_dis; ++s) {
      auto real = ad::Tensor::constant({cfg.batch, exp.data_dim},
                                       sample_real(cfg, exp, cfg.batch, data_rng));
      auto fake = models::generate(out.model.gen, cfg.batch, latent_rng).detach();
      auto loss = method_loss(cfg, out.model, real, fake, Side::disc, transform_rng);
      rec.d_loss = loss.item();
      if (!std::isfinite(rec.d_loss)) break;
      d_opt.zero_grad();
      ad::backward(loss);
      d_opt.step();
    }

    if (std::isfinite(rec.d_loss)) {
      for (auto& p : d_params) p.set_requires_grad(false);
      auto fake = models::generate(out.model.gen, cfg.batch, latent_rng);
      auto loss = method_loss(cfg, out.model, ad::Tensor{}, fake, Side::gen, transform_rng);
      rec.g_loss = loss.item();
      if (std::isfinite(rec.g_loss)) {
        g_opt.zero_grad();
        ad::backward(loss);
        g_opt.step();
      }
      for (auto& p : d_params) p.set_requires_grad(true);
    }
    out.report.losses.push_back(rec);
    if (!std::isfinite(rec.d_loss) || !std::isfinite(rec.g_loss)) {
      out.report.failed = true;
      out.report.failure = "non-finite " + std::string(std::isfinite(rec.d_loss) ? "generator" : "discriminator") +
                           " loss at iteration " + std::to_string(it);
      break;
    }
  }

  if (!out.report.failed) evaluate(cfg, out);
  out.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& p, const std::string& text, RunReport& report) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
  report.artifacts.push_back(p.string());
}

std::string losses_csv(const RunReport& r) {
  std::string s = "iter,d_loss,g_loss\n";
  for (const auto& l : r.losses) s += std::to_string(l.iter) + "," + num(l.d_loss) + "," + num(l.g_loss) + "\n";
  return s;
}

std::string samples_txt(const metrics::Samples& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto p = s.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) out += (j ? "," : "") + num(p[j]);
    out += '\n';
  }
  return out;
}

std::vector<double> first_coord(const metrics::Samples& s) {
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = s.point(i)[0];
  return v;
}

// Densities of the first coordinate on a shared 400-point grid spanning both
// sample sets plus three bandwidths each side.
std::string density_csv(const metrics::Samples& real, const metrics::Samples& gen) {
  const auto r = first_coord(real), g = first_coord(gen);
  auto bw = [](const std::vector<double>& v) -> std::optional<double> {
    try {
      return metrics::silverman_bandwidth(v);
    } catch (const std::invalid_argument&) {
      return 1e-3;  // collapsed generator: a narrow spike is the honest picture
    }
  };
  const auto hr = bw(r), hg = bw(g);
  const auto [rlo, rhi] = std::minmax_element(r.begin(), r.end());
  const auto [glo, ghi] = std::minmax_element(g.begin(), g.end());
  const double h = std::max(*hr, *hg);
  const double lo = std::min(*rlo, *glo) - 3 * h, hi = std::max(*rhi, *ghi) + 3 * h;
  std::vector<double> grid(400);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = lo + (hi - lo) * i / (grid.size() - 1);
  const auto pr = metrics::kde(r, grid, hr), pg = metrics::kde(g, grid, hg);
  std::string s = "x,p_real,p_gen\n";
  for (std::size_t i = 0; i < grid.size(); ++i) s += num(grid[i]) + "," + num(pr[i]) + "," + num(pg[i]) + "\n";
  return s;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

}  // namespace

std::string summary_text(const RunReport& r) {
  std::string s;
  s += "status=" + std::string(r.failed ? "failed" : "ok") + "\n";
  if (r.failed) s += "failure=" + r.failure + "\n";
  s += "final_mmd=" + (r.failed ? std::string("NA") : num(r.final_mmd)) + "\n";
  s += "mmd_kernel=gaussian\n";
  s += "mmd_bandwidth=" + (r.failed ? std::string("NA") : num(r.mmd_bandwidth)) + "\n";
  s += "leaked_mass=" + opt_num(r.leaked_mass) + "\n";
  s += "tv_final=" + opt_num(r.tv_final) + "\n";
  s += "wall_seconds=" + num(r.wall_seconds) + "\n";
  s += "iterations=" + std::to_string(r.losses.size()) + "\n";
  s += emit_config(r.config);
  return s;
}

RunReport cmd_train(const RunConfig& cfg) {
  auto outcome = train(cfg);
  auto& report = outcome.report;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_file(dir / "config.txt", emit_config(cfg), report);
  write_file(dir / "losses.csv", losses_csv(report), report);
  if (!report.failed) {
    write_file(dir / "samples.txt", samples_txt(outcome.gen_eval), report);
    write_file(dir / "density.csv", density_csv(outcome.real_eval, outcome.gen_eval), report);
    models::save_parameters((dir / "generator.params").string(),
                            models::named_parameters("generator", outcome.model.gen.net));
    models::save_parameters((dir / "discriminator.params").string(),
                            models::named_parameters("discriminator", outcome.model.disc.net));
    report.artifacts.push_back((dir / "generator.params").string());
    report.artifacts.push_back((dir / "discriminator.params").string());
  }
  write_file(dir / "summary.txt", summary_text(report), report);
  if (report.failed)
    throw TrainingError(report.failure + "; partial artifacts in " + dir.string(),
                        report.losses.empty() ? 0 : report.losses.back().iter);
  return report;
}

}  // namespace lagan
