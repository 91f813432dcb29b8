#pragma once

// Flat key=value run configuration. One pair per line, '#' starts a comment.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lagan/method.hpp"
#include "lagan/models.hpp"
#include "lagan/objectives.hpp"
#include "lagan/oracle.hpp"

namespace lagan {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Dataset { gauss1d_shift, modes2d_rot, finite };
enum class InitKind { random, rotated };
enum class MmdSpace { raw, transformed };

std::string_view to_string(Dataset d);

struct RunConfig {
  Method method = Method::gan;
  Dataset dataset = Dataset::gauss1d_shift;
  std::size_t K = 4;
  std::uint64_t seed = 0;
  std::size_t steps = 20000;
  std::size_t batch = 128;
  std::size_t n_dis = 2;
  double lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::optional<double> lambda_d;
  std::optional<double> lambda_g;
  objectives::LossForm loss_form = objectives::LossForm::log;
  objectives::GenLoss gen_loss = objectives::GenLoss::minimax;
  std::size_t mmd_samples = 10000;
  MmdSpace mmd_space = MmdSpace::raw;
  std::string out_dir = "runs/out";

  // Networks.
  std::size_t latent_dim = 4;
  std::size_t hidden = 10;
  std::size_t hidden_layers = 2;

  // Identity probability for dagan_plus.
  double identity_weight = 0.5;

  // modes2d_rot.
  double mode_sigma = 0.05;
  double leak_radius = 0.15;

  // finite / descent.
  std::size_t space_size = 8;
  InitKind init = InitKind::random;
  oracle::DiscMode disc_mode = oracle::DiscMode::best_response;
  double descent_lr = 1.0;
  double disc_lr = 5.0;

  bool operator==(const RunConfig&) const = default;

  objectives::MethodConfig method_config() const;
  models::NetConfig net_config() const;
  double resolved_lambda_d() const;
  double resolved_lambda_g() const;
};

// Every key accepted in a config file, in emission order.
const std::vector<std::string>& config_keys();

// Applies one key=value assignment; throws ConfigError on an unknown key or
// a malformed value.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
// "key=value" form.
void apply_assignment(RunConfig& cfg, std::string_view assignment);

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// Range and consistency checks; throws ConfigError.
void validate(const RunConfig& cfg);

// key=value lines; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& cfg);
// The same pairs as a map, for reports.
std::map<std::string, std::string> config_pairs(const RunConfig& cfg);

}  // namespace lagan
