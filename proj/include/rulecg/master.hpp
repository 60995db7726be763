#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "rulecg/bitset.hpp"
#include "rulecg/dataset.hpp"
#include "rulecg/lp.hpp"
#include "rulecg/ruleset.hpp"

namespace rulecg {

struct PooledClause {
  Clause clause;
  Bitset coverage;             // samples satisfying the clause
  int negatives_covered = 0;   // objective coefficient |coverage ∩ Z|
};

// Deduplicated (by feature set) clauses with their coverage over one dataset.
class ClausePool {
 public:
  // Returns the new index, or nullopt if the clause is already pooled.
  std::optional<std::size_t> add(const Clause& clause, const BinaryDataset& ds);
  bool contains(const Clause& clause) const { return index_.contains(clause); }
  std::optional<std::size_t> find(const Clause& clause) const;

  std::size_t size() const { return clauses_.size(); }
  bool empty() const { return clauses_.empty(); }
  const PooledClause& operator[](std::size_t k) const { return clauses_[k]; }
  auto begin() const { return clauses_.begin(); }
  auto end() const { return clauses_.end(); }

 private:
  std::vector<PooledClause> clauses_;
  std::unordered_map<Clause, std::size_t, ClauseHash> index_;
};

// Restricted MLP: variables xi_i (i in P) then w_k (pool order); one covering
// row per positive sample then the complexity row.
//   min  sum xi_i + sum |cov_k ∩ Z| w_k
//   s.t. xi_i + sum_{k covers i} w_k >= 1   (i in P)
//        sum c_k w_k <= C
//        0 <= xi_i,  0 <= w_k <= 1
// Throws ConfigError when C < 2.
LinearProgram build_restricted_mlp(const BinaryDataset& ds, const ClausePool& pool, int complexity_bound);

struct MasterSolution {
  std::vector<double> w;   // per pooled clause
  std::vector<double> xi;  // per positive sample, in positive order
  std::vector<double> mu;  // per sample index; zero on negatives
  double lambda = 0.0;     // magnitude of the complexity row dual
  double objective = 0.0;  // z_RMLP
  LpStatus status = LpStatus::kIterationLimit;
};

// Warm-started restricted master: columns are appended as the pool grows.
class RestrictedMaster {
 public:
  RestrictedMaster(const BinaryDataset& ds, int complexity_bound, SimplexOptions options = {});

  void add_clause(const PooledClause& clause);
  // Pin w_k to [lower, upper] (branching).
  void set_clause_bounds(std::size_t k, double lower, double upper);
  MasterSolution solve();

  std::size_t num_clauses() const { return num_clauses_; }
  const SimplexSolver& solver() const { return solver_; }
  SimplexSolver& solver() { return solver_; }

 private:
  const BinaryDataset* ds_;
  int complexity_bound_;
  std::vector<int> row_of_sample_;  // -1 for negatives
  std::vector<std::size_t> positive_samples_;
  std::size_t num_clauses_ = 0;
  SimplexSolver solver_;
};

}  // namespace rulecg
