#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "atd/aging.hpp"
#include "atd/bench.hpp"
#include "atd/detector.hpp"
#include "atd/trojan.hpp"

namespace atd {

/// Clock sweep as fractions of the clean, unaged critical path delay.
struct SweepSpec {
  double lo = 0.50;
  double hi = 0.95;
  int points = 20;
  std::vector<double> explicit_fractions;  // overrides lo/hi/points when set

  std::vector<double> fractions() const;
};

/// Simulated IC instances. Without variation every IC is the nominal one.
struct VariationPlan {
  bool enabled = false;
  double global_frac = 0.05;
  double local_sigma = 0.04;
  std::vector<std::uint64_t> test_seeds;   // one simulated IC per seed
  std::vector<std::uint64_t> train_seeds;  // extra golden-model instances mixed into training
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  BenchSpec bench;
  std::vector<TrojanSpec> trojans;
  AgingParams aging;
  BaseDelayLib lib = BaseDelayLib::defaults();
  std::vector<int> duties{kDutyGrid.begin(), kDutyGrid.end()};
  SweepSpec sweep;
  int n_random = 1000;
  std::uint64_t pattern_seed = 7;
  double train_fraction = 0.5;
  std::size_t bin = 1;
  std::vector<std::size_t> batches{1};
  VariationPlan variation;
  DetectorConfig detector;
  bool persist_grids = true;

  void check() const;  // throws ConfigError
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Names a failing pipeline stage (CLI exit code 3).
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& p);

void to_json(nlohmann::json& j, const BenchSpec& s);
void from_json(const nlohmann::json& j, BenchSpec& s);
void to_json(nlohmann::json& j, const AgingParams& p);
void from_json(const nlohmann::json& j, AgingParams& p);

/// Evaluation of one Trojan (or the clean-only case) at one batch size.
struct ComparisonResult {
  std::string trojan;  // "trojan<i>" or "none"
  std::string instance;  // "nominal", "ic<seed>", or "pooled"
  std::size_t batch = 1;
  EvalReport report;
  EvalReport clean_only;    // clean batches alone: accuracy = TN / (TN + FP)
  EvalReport trojan_only;   // Trojan batches alone: recall = TP / (TP + FN)
};

struct ExperimentResult {
  double t_cp = 0.0;  // ps, clean, unaged, nominal
  std::vector<double> clocks;
  std::size_t train_inputs = 0, test_inputs = 0;
  std::vector<double> area_fractions;
  TrainingLog training;
  std::vector<ComparisonResult> comparisons;  // per instance, then pooled
  /// Total flipped bits over the grid, per input, for the clean IC(s)
  /// (training and test inputs).
  std::vector<double> clean_bit_errors;

  /// Pooled over instances for the first Trojan (or the clean-only case).
  const ComparisonResult& primary(std::size_t batch) const;
};

/// Full pipeline. Artifacts and the report go to `out` when given.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out);

/// Clock periods (ps) for the sweep of `n` relative to its own unaged t_CP.
std::vector<double> sweep_clocks(const Netlist& n, const ExperimentConfig& cfg, double* t_cp = nullptr);

/// Configured pattern set with every input that fires a configured trigger
/// removed.
std::vector<BitVec> dormant_patterns(std::size_t width, const ExperimentConfig& cfg);

/// Seeded disjoint split of the dormant pattern set, as used by run_experiment.
struct PatternSplit {
  std::vector<BitVec> train, test;
};
PatternSplit split_patterns(std::size_t width, const ExperimentConfig& cfg);

/// Annotations of `n` for every configured duty under an optional variation.
std::vector<DelayAnnotation> annotations_for(const Netlist& n, const ExperimentConfig& cfg,
                                             const std::optional<VariationSpec>& v);

}  // namespace atd
