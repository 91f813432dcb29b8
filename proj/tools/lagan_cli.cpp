// Command-line driver: verify | train | sweep | descent.
//
// Exit codes: 0 success, 1 run failure, 2 verification failure, 3 config error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lagan/config.hpp"
#include "lagan/harness.hpp"
#include "lagan/training.hpp"
#include "lagan/verify.hpp"

namespace {

constexpr int kRunFailure = 1;
constexpr int kVerifyFailure = 2;
constexpr int kConfigError = 3;

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value config file");
  cmd->add_option("--set", f.sets, "override one key (key=value), repeatable");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "run seed");
}

lagan::RunConfig resolve(const CommonFlags& f) {
  lagan::RunConfig cfg = f.config_path.empty() ? lagan::RunConfig{} : lagan::load_config(f.config_path);
  for (const auto& s : f.sets) lagan::apply_assignment(cfg, s);
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.seed) cfg.seed = *f.seed;
  lagan::validate(cfg);
  return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformation-based self-supervised GAN laboratory"};
  app.require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand("verify", "finite-space identity suite");
  std::vector<std::size_t> sizes{4, 8};
  std::size_t trials = 100;
  std::uint64_t verify_seed = 0;
  std::string verify_out;
  bool non_group = false;
  verify->add_option("--sizes", sizes, "space sizes")->delimiter(',');
  verify->add_option("--trials", trials, "random instances per size");
  verify->add_option("--seed", verify_seed, "suite seed");
  verify->add_option("--out", verify_out, "directory for verify_report.csv");
  verify->add_flag("--non-group", non_group, "use a transform set that is not a group");

  // train / descent
  CommonFlags train_flags, descent_flags, sweep_flags;
  auto* train = app.add_subcommand("train", "sample-based training run");
  add_common(train, train_flags);
  auto* descent = app.add_subcommand("descent", "exact-gradient training on a finite space");
  add_common(descent, descent_flags);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "grid of training runs");
  add_common(sweep, sweep_flags);
  std::string sweep_key, sweep_values, sweep_seeds = "0";
  std::size_t workers = 1;
  sweep->add_option("--key", sweep_key, "config key to vary")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seeds");
  sweep->add_option("--workers", workers, "cells run in parallel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  try {
    if (*verify) {
      lagan::VerifyOptions opts;
      opts.sizes = sizes;
      opts.trials = trials;
      opts.seed = verify_seed;
      opts.non_group = non_group;
      const auto report = lagan::cmd_verify(opts);
      lagan::print_report(std::cout, report);
      if (!verify_out.empty()) {
        std::filesystem::create_directories(verify_out);
        std::ofstream(std::filesystem::path(verify_out) / "verify_report.csv") << lagan::report_csv(report);
      }
      return report.passed() ? 0 : kVerifyFailure;
    }
    if (*train) {
      const auto cfg = resolve(train_flags);
      const auto report = lagan::cmd_train(cfg);
      std::cout << lagan::summary_text(report);
      return 0;
    }
    if (*descent) {
      auto cfg = resolve(descent_flags);
      const auto result = lagan::cmd_descent(cfg);
      const auto& last = result.trajectory.back();
      std::cout << "steps=" << last.step << "\ntv_final=" << last.tv
                << "\ntv_mixture_final=" << last.tv_mixture << "\nout_dir=" << cfg.out_dir << '\n';
      return 0;
    }
    if (*sweep) {
      const auto cfg = resolve(sweep_flags);
      std::vector<std::uint64_t> seeds;
      for (const auto& s : split_list(sweep_seeds)) seeds.push_back(std::stoull(s));
      const auto result = lagan::cmd_sweep(cfg, sweep_key, split_list(sweep_values), seeds, workers);
      std::cout << lagan::sweep_summary_csv(result);
      for (const auto& c : result.cells)
        if (!c.ok) std::cerr << "cell " << sweep_key << "=" << c.value << " seed=" << c.seed
                             << " failed: " << c.error << '\n';
      return 0;
    }
  } catch (const lagan::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const lagan::TrainingError& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kRunFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRunFailure;
  }
  return 0;
}
