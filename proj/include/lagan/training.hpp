#pragma once

// Sample-based training on the continuous datasets and the run artifacts it
// leaves behind.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagan/config.hpp"
#include "lagan/metrics.hpp"
#include "lagan/models.hpp"
#include "lagan/transform.hpp"

namespace lagan {

// Data distribution plus the transforms a run trains with.
struct Experiment {
  std::size_t data_dim = 1;
  // Transforms as listed by the dataset (uniform sampling).
  TransformationSet base_set;
  // What the method actually samples from (dagan_plus re-weights the identity).
  TransformationSet set;
  // modes2d_rot blob centres; empty otherwise.
  std::vector<std::vector<double>> modes;
};

Experiment make_experiment(const RunConfig& cfg);
// n real samples, row-major n x data_dim.
std::vector<double> sample_real(const RunConfig& cfg, const Experiment& exp, std::size_t n, Rng& rng);

// Blob centres of modes2d_rot.
std::vector<std::vector<double>> modes2d_centres();

// Per-row transform application, differentiable: row i goes through
// T_{ks[i]}.
ad::Tensor transform_rows(const ad::Tensor& x, const TransformationSet& set,
                          const std::vector<std::size_t>& ks);

struct LossRecord {
  std::size_t iter = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
};

struct RunReport {
  RunConfig config;
  std::vector<LossRecord> losses;
  double final_mmd = 0.0;
  double mmd_bandwidth = 0.0;
  std::optional<double> leaked_mass;
  std::optional<double> tv_final;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string failure;
  std::vector<std::string> artifacts;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t iter)
      : std::runtime_error(what), iter_(iter) {}
  std::size_t iteration() const { return iter_; }

 private:
  std::size_t iter_;
};

struct TrainedModel {
  models::GeneratorNet gen;
  models::Discriminator disc;
  Experiment experiment;
};

struct TrainOutcome {
  TrainedModel model;
  RunReport report;
  // Final evaluation draws, n x data_dim each.
  metrics::Samples real_eval;
  metrics::Samples gen_eval;
};

// Losses for one method on one batch. real may be empty on the generator side.
ad::Tensor method_loss(const RunConfig& cfg, const TrainedModel& model, const ad::Tensor& real,
                       const ad::Tensor& fake, objectives::Side side, Rng& transform_rng);

// Runs the whole loop and the final evaluation without touching the disk. A
// non-finite loss stops the loop; the partial report is returned with
// failed = true.
TrainOutcome train(const RunConfig& cfg);

// train() plus artifacts in cfg.out_dir: losses.csv, samples.txt,
// density.csv, summary.txt, config.txt, generator.params,
// discriminator.params. Throws TrainingError after writing the partial
// artifacts of a failed run.
RunReport cmd_train(const RunConfig& cfg);

// Emitted summary: key=value lines with the metrics followed by the config.
std::string summary_text(const RunReport& report);

}  // namespace lagan
