#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rulecg/colgen.hpp"
#include "rulecg/dataset.hpp"
#include "rulecg/ruleset.hpp"

namespace rulecg {

// Fold id per sample. Samples of each class are shuffled with the seed and
// dealt round-robin; the deal continues across classes so fold sizes differ
// by at most one. Throws ConfigError if a class has fewer samples than folds.
std::vector<int> stratified_folds(std::span<const std::uint8_t> labels, int folds, std::uint64_t seed);

struct MetricsRecord {
  std::string dataset;
  int fold = 0;
  int complexity_bound = 0;
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;
  int complexity = 0;
  int z_train = 0;
  std::optional<int> lower_bound;
  double seconds = 0.0;
};

void write_metrics_header(std::ostream& out);
void write_metrics_row(const MetricsRecord& record, std::ostream& out);
void write_metrics_csv(const std::vector<MetricsRecord>& records, std::ostream& out);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample stddev / sqrt(count); 0 for a single value
};
MeanStderr mean_stderr(std::span<const double> values);

struct CurvePoint {
  double complexity = 0.0;
  double accuracy = 0.0;
};
// A point is efficient if no other point has accuracy >= and complexity <=
// with at least one strict.
std::vector<bool> pareto_efficient(std::span<const CurvePoint> points);

struct EvaluationOptions {
  std::string dataset = "data";
  int folds = 10;
  int inner_folds = 3;
  std::vector<int> c_grid;
  ColGenConfig colgen;  // complexity_bound is taken from the grid
  RuleForm form = RuleForm::kDnf;
  BinarizerOptions binarizer;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool record_time = true;
};

// Everything learned on one outer fold.
struct FoldOutcome {
  MetricsRecord metrics;
  double z_rmlp_final = 0.0;
  bool optimal = false;
  std::vector<double> inner_accuracy;  // per grid value; empty without inner CV
};

// Nested stratified CV: binarization is refit on each training fold, the
// inner CV on the training fold picks C (ties to the smaller C), and the
// model is retrained on the full training fold.
std::vector<FoldOutcome> cross_validate(const PreparedTable& table, const EvaluationOptions& options);

struct SweepSummary {
  int complexity_bound = 0;
  MeanStderr test_accuracy;
  MeanStderr train_accuracy;
  MeanStderr complexity;
  bool pareto = false;
};

struct SweepOutcome {
  std::vector<FoldOutcome> folds;  // fold-major, C-minor
  std::vector<SweepSummary> summary;
};

// Per outer fold, one shared-pool complexity sweep over the grid; points are
// averaged over folds and marked Pareto-efficient on (complexity, accuracy).
SweepOutcome sweep_cross_validated(const PreparedTable& table, const EvaluationOptions& options);

void write_sweep_csv(const std::vector<SweepSummary>& summary, std::ostream& out);

// Splits "5,10,20" into integers.
std::vector<int> parse_c_grid(const std::string& text);

}  // namespace rulecg
