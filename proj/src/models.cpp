#include "lagan/models.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lagan::models {

MLP::MLP(std::vector<std::size_t> widths, Rng& rng) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw std::invalid_argument("MLP: need at least input and output widths");
  for (auto w : widths_)
    if (w == 0) throw std::invalid_argument("MLP: layer widths must be positive");
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const auto in = widths_[l], out = widths_[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (double& v : w) v = rng.uniform(-bound, bound);
    layers_.push_back({ad::Tensor::parameter({in, out}, std::move(w)),
                       ad::Tensor::parameter({1, out}, std::vector<double>(out, 0.0))});
  }
}

ad::Tensor MLP::forward(const ad::Tensor& x) const {
  if (x.rank() != 2 || x.cols() != in_dim())
    throw ad::ShapeError("MLP::forward", x.shape(), ad::Shape{x.rows(), in_dim()});
  // Bias rows are broadcast with a ones column: ones(n x 1) * b(1 x out).
  const auto ones = ad::Tensor::constant({x.rows(), 1}, std::vector<double>(x.rows(), 1.0));
  ad::Tensor h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = ad::add(ad::matmul(h, layers_[l].weight), ad::matmul(ones, layers_[l].bias));
    if (l + 1 < layers_.size()) h = ad::tanh(h);
  }
  return h;
}

std::vector<ad::Tensor> MLP::parameters() const {
  std::vector<ad::Tensor> out;
  for (const auto& l : layers_) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

void MLP::zero_weights() {
  for (auto& l : layers_)
    for (double& v : l.weight.mutable_values()) v = 0.0;
}

// ---------------------------------------------------------------------------

std::size_t HeadSpec::width() const {
  switch (kind) {
    case HeadKind::binary: return 1;
    case HeadKind::kway: return K;
    case HeadKind::kplus1: return K + 1;
    case HeadKind::multi_disc: return K;
    case HeadKind::label_aug: return 2 * K;
    case HeadKind::binary_plus_label_aug: return 2 * K + 1;
  }
  return 0;
}

std::string_view to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::binary: return "binary";
    case HeadKind::kway: return "kway";
    case HeadKind::kplus1: return "kplus1";
    case HeadKind::multi_disc: return "multi_disc";
    case HeadKind::label_aug: return "label_aug";
    case HeadKind::binary_plus_label_aug: return "binary_plus_label_aug";
  }
  return "?";
}

std::vector<HeadSpec> heads_for(Method method, std::size_t K) {
  if (K == 0) throw std::invalid_argument("heads_for: K must be positive");
  switch (method) {
    case Method::gan:
    case Method::dagan:
    case Method::dagan_plus: return {{HeadKind::binary, K}};
    case Method::ssgan: return {{HeadKind::binary, K}, {HeadKind::kway, K}};
    case Method::ssgan_ms: return {{HeadKind::binary, K}, {HeadKind::kplus1, K}};
    case Method::dagan_md: return {{HeadKind::multi_disc, K}};
    case Method::ssgan_la: return {{HeadKind::label_aug, K}};
    case Method::ssgan_la_plus: return {{HeadKind::binary_plus_label_aug, K}};
  }
  throw std::invalid_argument("heads_for: unknown method");
}

std::size_t Discriminator::out_width() const {
  std::size_t w = 0;
  for (const auto& h : heads) w += h.width();
  return w;
}

std::size_t Discriminator::offset(std::size_t h) const {
  if (h >= heads.size()) throw std::out_of_range("Discriminator::offset: no head " + std::to_string(h));
  std::size_t w = 0;
  for (std::size_t i = 0; i < h; ++i) w += heads[i].width();
  return w;
}

namespace {

std::vector<std::size_t> widths_for(std::size_t in, std::size_t out, const NetConfig& cfg) {
  if (cfg.hidden_layers > 0 && cfg.hidden == 0)
    throw std::invalid_argument("network config: hidden width must be at least 1");
  std::vector<std::size_t> w{in};
  for (std::size_t i = 0; i < cfg.hidden_layers; ++i) w.push_back(cfg.hidden);
  w.push_back(out);
  return w;
}

}  // namespace

GeneratorNet build_generator(std::size_t data_dim, const NetConfig& cfg, Rng& rng) {
  if (cfg.latent_dim == 0 || data_dim == 0)
    throw std::invalid_argument("build_generator: dimensions must be positive");
  return {cfg.latent_dim, data_dim, MLP(widths_for(cfg.latent_dim, data_dim, cfg), rng)};
}

Discriminator build_discriminator(std::vector<HeadSpec> heads, std::size_t data_dim,
                                  const NetConfig& cfg, Rng& rng) {
  if (heads.empty()) throw std::invalid_argument("build_discriminator: no heads");
  if (data_dim == 0) throw std::invalid_argument("build_discriminator: data_dim must be positive");
  Discriminator d;
  d.heads = std::move(heads);
  d.data_dim = data_dim;
  d.net = MLP(widths_for(data_dim, d.out_width(), cfg), rng);
  return d;
}

ad::Tensor sample_latent(const GeneratorNet& gen, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample_latent: n must be at least 1");
  std::vector<double> z(n * gen.latent_dim);
  for (double& v : z) v = rng.normal();
  return ad::Tensor::constant({n, gen.latent_dim}, std::move(z));
}

ad::Tensor generate(const GeneratorNet& gen, const ad::Tensor& z) { return gen.net.forward(z); }

ad::Tensor generate(const GeneratorNet& gen, std::size_t n, Rng& rng) {
  return generate(gen, sample_latent(gen, n, rng));
}

ad::Tensor discriminate(const Discriminator& disc, const ad::Tensor& x) {
  if (x.rank() != 2 || x.cols() != disc.data_dim)
    throw ad::ShapeError("discriminate", x.shape(), ad::Shape{x.rows(), disc.data_dim});
  return disc.net.forward(x);
}

ad::Tensor head_logits(const Discriminator& disc, const ad::Tensor& logits, std::size_t h) {
  const auto begin = disc.offset(h);
  if (disc.heads.size() == 1) return logits;
  return ad::slice_cols(logits, begin, begin + disc.heads[h].width());
}

// ---------------------------------------------------------------------------
// Checkpoints

NamedTensors named_parameters(const std::string& prefix, const MLP& net) {
  NamedTensors out;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    out.emplace_back(prefix + ".layer" + std::to_string(l) + ".weight", net.layers()[l].weight);
    out.emplace_back(prefix + ".layer" + std::to_string(l) + ".bias", net.layers()[l].bias);
  }
  return out;
}

void save_parameters(const std::string& path, const NamedTensors& tensors) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_parameters: cannot open " + path);
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& [name, t] : tensors) {
    os << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    const auto v = t.values();
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    os << '\n';
  }
  if (!os) throw std::runtime_error("save_parameters: write failed for " + path);
}

void load_parameters(const std::string& path, const NamedTensors& tensors) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_parameters: cannot open " + path);
  for (const auto& [name, t] : tensors) {
    std::string got;
    std::size_t rows = 0, cols = 0;
    if (!(is >> got >> rows >> cols))
      throw std::runtime_error("load_parameters: " + path + " ends before " + name);
    if (got != name || rows != t.rows() || cols != t.cols())
      throw std::runtime_error("load_parameters: expected " + name + " " + std::to_string(t.rows()) +
                               "x" + std::to_string(t.cols()) + ", found " + got + " " +
                               std::to_string(rows) + "x" + std::to_string(cols));
    ad::Tensor handle = t;  // shares the node
    auto dst = handle.mutable_values();
    for (double& v : dst)
      if (!(is >> v)) throw std::runtime_error("load_parameters: truncated values for " + name);
  }
}

}  // namespace lagan::models
