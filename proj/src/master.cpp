#include "rulecg/master.hpp"

#include <algorithm>

namespace rulecg {

std::optional<std::size_t> ClausePool::add(const Clause& clause, const BinaryDataset& ds) {
  if (index_.contains(clause)) return std::nullopt;
  PooledClause pc{clause, coverage(clause, ds), 0};
  pc.negatives_covered = static_cast<int>(pc.coverage.count_and(ds.negatives()));
  const std::size_t k = clauses_.size();
  clauses_.push_back(std::move(pc));
  index_.emplace(clause, k);
  return k;
}

std::optional<std::size_t> ClausePool::find(const Clause& clause) const {
  const auto it = index_.find(clause);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<LinearProgram::Entry> clause_column(const PooledClause& pc, const BinaryDataset& ds,
                                                const std::vector<int>& row_of_sample, int complexity_row) {
  std::vector<LinearProgram::Entry> entries;
  (pc.coverage & ds.positives()).for_each([&](std::size_t i) {
    entries.push_back({row_of_sample[i], 1.0});
  });
  entries.push_back({complexity_row, static_cast<double>(pc.clause.complexity())});
  return entries;
}

std::vector<int> positive_rows(const BinaryDataset& ds) {
  std::vector<int> rows(ds.n(), -1);
  int r = 0;
  ds.positives().for_each([&](std::size_t i) { rows[i] = r++; });
  return rows;
}

}  // namespace

LinearProgram build_restricted_mlp(const BinaryDataset& ds, const ClausePool& pool, int complexity_bound) {
  if (complexity_bound < 2) {
    throw ConfigError("complexity bound C = " + std::to_string(complexity_bound) +
                      " admits no clause (every clause has complexity >= 2)");
  }
  LinearProgram lp;
  const auto rows = positive_rows(ds);
  ds.positives().for_each([&](std::size_t i) {
    const int xi = lp.add_variable(0.0, kInfinity, 1.0, "xi" + std::to_string(i));
    lp.add_row(RowSense::kGreaterEqual, 1.0, {{xi, 1.0}}, "cover" + std::to_string(i));
  });
  const int complexity_row = lp.add_row(RowSense::kLessEqual, complexity_bound, {}, "complexity");
  for (std::size_t k = 0; k < pool.size(); ++k) {
    lp.add_column(0.0, 1.0, pool[k].negatives_covered, clause_column(pool[k], ds, rows, complexity_row),
                  "w" + std::to_string(k));
  }
  return lp;
}

RestrictedMaster::RestrictedMaster(const BinaryDataset& ds, int complexity_bound, SimplexOptions options)
    : ds_(&ds),
      complexity_bound_(complexity_bound),
      row_of_sample_(positive_rows(ds)),
      positive_samples_(ds.positives().indices()),
      solver_(build_restricted_mlp(ds, ClausePool{}, complexity_bound), options) {}

void RestrictedMaster::add_clause(const PooledClause& clause) {
  const int complexity_row = static_cast<int>(positive_samples_.size());
  solver_.add_column(0.0, 1.0, clause.negatives_covered,
                     clause_column(clause, *ds_, row_of_sample_, complexity_row),
                     "w" + std::to_string(num_clauses_));
  ++num_clauses_;
}

void RestrictedMaster::set_clause_bounds(std::size_t k, double lower, double upper) {
  solver_.set_bounds(static_cast<int>(positive_samples_.size() + k), lower, upper);
}

MasterSolution RestrictedMaster::solve() {
  const LpSolution lp = solver_.solve();
  MasterSolution out;
  out.status = lp.status;
  out.objective = lp.objective;
  const std::size_t np = positive_samples_.size();
  out.xi.assign(lp.x.begin(), lp.x.begin() + static_cast<std::ptrdiff_t>(np));
  out.w.assign(lp.x.begin() + static_cast<std::ptrdiff_t>(np), lp.x.end());
  out.mu.assign(ds_->n(), 0.0);
  if (lp.status == LpStatus::kOptimal) {
    for (std::size_t r = 0; r < np; ++r) {
      out.mu[positive_samples_[r]] = std::clamp(lp.duals[r], 0.0, 1.0);
    }
    out.lambda = std::max(0.0, -lp.duals[np]);
  }
  return out;
}

}  // namespace rulecg
