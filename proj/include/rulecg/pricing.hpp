#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "rulecg/dataset.hpp"
#include "rulecg/ruleset.hpp"

namespace rulecg {

// Duals of the restricted master seen by the pricing problem.
struct DualContext {
  const BinaryDataset* ds = nullptr;
  std::vector<double> mu;  // per sample; only positives carry weight
  double lambda = 0.0;
  int max_literals = 1;    // D

  DualContext() = default;
  DualContext(const BinaryDataset& data, std::vector<double> duals, double complexity_dual, int clause_bound);

  // Throws ConfigError unless mu_i in [0,1], lambda >= 0, 1 <= D <= d.
  void validate() const;
};

// sum_{i in Z} delta_i - sum_{i in P} mu_i delta_i + lambda (1 + |clause|),
// delta_i = 1 iff sample i satisfies the clause.
double reduced_cost(const Clause& clause, const DualContext& ctx);
double reduced_cost(const Bitset& coverage, std::size_t literals, const DualContext& ctx);

struct PricedClause {
  Clause clause;
  double reduced_cost = 0.0;
};

struct PricingResult {
  std::vector<PricedClause> clauses;  // reduced cost < 0, ascending
  // Best value found; when proven_optimal, the minimum over non-excluded
  // clauses with at most D literals (or the cutoff if the minimum is not
  // below it). When only bound_valid, a certified lower bound on it.
  double z_cg = kNoValue;
  bool proven_optimal = false;
  bool bound_valid = false;
  std::int64_t explored = 0;
  double seconds = 0.0;

  static constexpr double kNoValue = 1e300;
};

// Clauses the caller already holds (the restricted master's pool).
using ClauseFilter = std::function<bool(const Clause&)>;

struct ExactPricingOptions {
  double time_limit = 1e300;  // seconds
  std::size_t max_returned = 10;
  // Only clauses below the cutoff matter; 0 turns the search into "find a
  // negative clause or prove there is none".
  double cutoff = 1e300;
  ClauseFilter excluded;
};

// Depth-first branch-and-bound over feature subsets in descending order of
// dual-weighted positive coverage. A node K bounds its subtree by
// lambda (1 + |K|) - sum_{i in P covered by K} mu_i.
PricingResult price_exact(const DualContext& ctx, const ExactPricingOptions& options = {});

struct GreedyPricingOptions {
  int kappa = 5;
  std::size_t max_evaluations_per_level = 50000;
  std::size_t max_returned = 10;
  ClauseFilter excluded;
};

// Level-wise extension of one-literal seeds up to kappa literals, processing
// each level in increasing reduced-cost order. Never proves optimality.
PricingResult price_greedy(const DualContext& ctx, const GreedyPricingOptions& options = {});

// Pricing over a random subsample of samples (and, if still too large,
// features). Clauses found here must be re-priced on the full dataset.
struct RestrictedPricing {
  std::shared_ptr<const BinaryDataset> ds;
  DualContext ctx;
  std::vector<std::size_t> samples;   // kept sample -> original sample
  std::vector<std::size_t> features;  // kept feature -> original feature

  Clause lift(const Clause& local) const;
};

RestrictedPricing restrict_pricing(const DualContext& ctx, std::size_t target_samples, std::size_t nnz_cap,
                                   std::uint64_t seed);

enum class Regime { kSmall, kMedium, kLarge };
const char* to_string(Regime regime);

struct RegimeThresholds {
  std::size_t medium = 100000;
  std::size_t large = 1000000;
};

// Non-zeros of the pricing IP: sum_i |S_i| + d + n.
std::size_t pricing_nonzeros(const BinaryDataset& ds);
Regime classify_regime(const BinaryDataset& ds, const RegimeThresholds& thresholds = {});

}  // namespace rulecg
