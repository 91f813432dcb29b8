#pragma once

// Randomized identity suite over finite spaces with cyclic groups.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lagan/oracle.hpp"

namespace lagan {

enum class CheckStatus { pass, fail, hypothesis_not_met };

std::string_view to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  std::size_t space_size = 0;
  std::size_t instances = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::pass;
  // Worst instance, serialized for replay ("pd=...;pg=...").
  std::string worst_instance;
  std::string note;
};

struct VerifyOptions {
  std::vector<std::size_t> sizes{4, 8};
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  // Random mixture weights per instance for the group-family check.
  std::size_t mixtures = 20;
  // Closed form under test for the label-augmented discriminator; tests swap
  // in a corrupted one to make sure the suite notices.
  std::function<oracle::ClassifierTable(const FiniteDistribution&, const FiniteDistribution&,
                                        const TransformationSet&)>
      dla_formula = oracle::optimal_dla;
  // Replace the cyclic group by {identity, shift by 1}, which is not closed.
  bool non_group = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

VerifyReport cmd_verify(const VerifyOptions& options);

// Fixed-width table, one line per check.
void print_report(std::ostream& os, const VerifyReport& report);
std::string report_csv(const VerifyReport& report);

// Random full-support distribution of size n (softmax of normal logits).
FiniteDistribution random_distribution(std::size_t n, Rng& rng, double scale = 1.0);

}  // namespace lagan
