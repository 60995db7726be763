#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rulecg/dataset.hpp"
#include "rulecg/master.hpp"
#include "rulecg/pricing.hpp"
#include "rulecg/ruleset.hpp"

namespace rulecg {

struct ColGenConfig {
  int complexity_bound = 0;   // C
  int clause_bound = 0;       // D; 0 means C - 1
  int kappa = 5;
  double time_limit = 300.0;  // seconds, whole run
  double pricing_time_limit = 45.0;
  RegimeThresholds regimes;
  std::uint64_t seed = 0;
  std::size_t max_columns_per_iteration = 10;
  std::size_t greedy_evaluations_per_level = 50000;
  std::size_t restricted_samples = 2000;
  std::size_t restricted_nnz = 100000;
  // The final Restricted MIP gets whatever time is left, but at least this
  // fraction of the overall limit.
  double mip_time_fraction = 0.2;

  // Throws ConfigError on C < 2, negative D, kappa < 1 or non-positive limits.
  void validate() const;
  // min(D or C - 1, C - 1, d), at least 1.
  int effective_clause_bound(std::size_t d) const;
};

struct IterationRecord {
  int iteration = 0;
  double z_rmlp = 0.0;
  std::optional<double> z_cg;
  std::string pricing_mode;
  std::size_t columns_added = 0;
  std::size_t pool_size = 0;
  double seconds = 0.0;  // cumulative
};

struct ColGenResult {
  RuleSet ruleset;
  int z_train = 0;
  double z_rmlp_final = 0.0;
  std::optional<int> lower_bound;
  bool optimal = false;       // lower_bound == z_train
  bool mip_optimal = false;   // Restricted MIP tree exhausted
  std::vector<std::size_t> selected;  // pool indices of the chosen clauses
  std::vector<IterationRecord> trace;
};

// ceil(z_RMLP) once pricing certifies z_CG >= 0, ceil(z_RMLP + (C/2) z_CG)
// for a certified negative z_CG, nothing otherwise.
std::optional<int> lower_bound_certificate(double z_rmlp, std::optional<double> z_cg, bool certified,
                                           int complexity_bound);

struct MipResult {
  std::vector<std::size_t> selected;
  int z = 0;
  bool optimal = false;
  std::int64_t nodes = 0;
};

// Depth-first branch-and-bound over w in {0,1}^pool with LP bounds.
MipResult solve_restricted_mip(const BinaryDataset& ds, const ClausePool& pool, int complexity_bound,
                               double time_limit, const std::vector<std::size_t>& initial = {});

// Hamming loss of selecting the given pool clauses.
int selection_loss(const BinaryDataset& ds, const ClausePool& pool, const std::vector<std::size_t>& selected);

// The shared pool (if given) is used as the initial column set and receives
// every generated clause.
ColGenResult run_column_generation(const BinaryDataset& ds, const ColGenConfig& cfg, ClausePool* pool = nullptr);

// DNF directly, or CNF via the DNF on negated data.
ColGenResult train_rule_set(const BinaryDataset& ds, const ColGenConfig& cfg, RuleForm form = RuleForm::kDnf);

struct SweepPoint {
  int complexity_bound = 0;
  ColGenResult result;
  int first_pass_z_train = 0;
};

// One run per C in increasing order over a shared pool, then every C's
// Restricted MIP is re-solved against the final pool.
std::vector<SweepPoint> sweep_complexity(const BinaryDataset& ds, const std::vector<int>& c_values,
                                         const ColGenConfig& cfg, RuleForm form = RuleForm::kDnf);

void write_trace_csv(const std::vector<IterationRecord>& trace, std::ostream& out);

}  // namespace rulecg
