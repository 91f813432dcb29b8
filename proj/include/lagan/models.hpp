#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lagan/autodiff.hpp"
#include "lagan/method.hpp"
#include "lagan/rng.hpp"

namespace lagan::models {

struct Linear {
  ad::Tensor weight;  // in x out
  ad::Tensor bias;    // 1 x out
};

// Fully connected net with tanh between layers and a linear output layer.
class MLP {
 public:
  MLP() = default;
  // widths = {in, hidden..., out}; uniform init in +-sqrt(6 / (fan_in + fan_out)),
  // zero biases.
  MLP(std::vector<std::size_t> widths, Rng& rng);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t in_dim() const { return widths_.front(); }
  std::size_t out_dim() const { return widths_.back(); }
  const std::vector<Linear>& layers() const { return layers_; }
  std::vector<Linear>& layers() { return layers_; }

  ad::Tensor forward(const ad::Tensor& x) const;
  std::vector<ad::Tensor> parameters() const;
  // Sets every weight matrix to zero; biases are left alone.
  void zero_weights();

 private:
  std::vector<std::size_t> widths_;
  std::vector<Linear> layers_;
};

struct NetConfig {
  std::size_t latent_dim = 4;
  std::size_t hidden = 10;
  std::size_t hidden_layers = 2;
};

enum class HeadKind { binary, kway, kplus1, multi_disc, label_aug, binary_plus_label_aug };

struct HeadSpec {
  HeadKind kind = HeadKind::binary;
  std::size_t K = 1;
  std::size_t width() const;
};

std::string_view to_string(HeadKind kind);

// Heads a method puts on the shared trunk, in output-column order. SSGAN and
// SSGAN-MS carry the binary discriminator next to their classifier.
std::vector<HeadSpec> heads_for(Method method, std::size_t K);

struct GeneratorNet {
  std::size_t latent_dim = 0;
  std::size_t data_dim = 0;
  MLP net;
  std::vector<ad::Tensor> parameters() const { return net.parameters(); }
};

// One trunk, all heads concatenated along the output axis.
struct Discriminator {
  std::vector<HeadSpec> heads;
  std::size_t data_dim = 0;
  MLP net;

  std::size_t out_width() const;
  // First output column of head h.
  std::size_t offset(std::size_t h) const;
  std::vector<ad::Tensor> parameters() const { return net.parameters(); }
};

GeneratorNet build_generator(std::size_t data_dim, const NetConfig& cfg, Rng& rng);
Discriminator build_discriminator(std::vector<HeadSpec> heads, std::size_t data_dim,
                                  const NetConfig& cfg, Rng& rng);
inline Discriminator build_discriminator(HeadSpec head, std::size_t data_dim, const NetConfig& cfg,
                                         Rng& rng) {
  return build_discriminator(std::vector<HeadSpec>{head}, data_dim, cfg, rng);
}

// n x latent_dim standard normal draws.
ad::Tensor sample_latent(const GeneratorNet& gen, std::size_t n, Rng& rng);
ad::Tensor generate(const GeneratorNet& gen, const ad::Tensor& z);
ad::Tensor generate(const GeneratorNet& gen, std::size_t n, Rng& rng);

// n x out_width logits.
ad::Tensor discriminate(const Discriminator& disc, const ad::Tensor& x);
// Columns of head h.
ad::Tensor head_logits(const Discriminator& disc, const ad::Tensor& logits, std::size_t h);

// Checkpoints: a text file with one block per tensor,
//   <name> <rows> <cols>
//   v v v ...
using NamedTensors = std::vector<std::pair<std::string, ad::Tensor>>;
NamedTensors named_parameters(const std::string& prefix, const MLP& net);
void save_parameters(const std::string& path, const NamedTensors& tensors);
// Copies values into the given tensors; names and shapes must match.
void load_parameters(const std::string& path, const NamedTensors& tensors);

}  // namespace lagan::models
