#include "rulecg/colgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace rulecg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr double kIntegralityTolerance = 1e-6;
constexpr double kAdmissionTolerance = 1e-9;

int ceil_with_tolerance(double value) { return static_cast<int>(std::ceil(value - 1e-6)); }

class MipSearch {
 public:
  MipSearch(const BinaryDataset& ds, const ClausePool& pool, int complexity_bound, double time_limit)
      : ds_(ds), pool_(pool), complexity_bound_(complexity_bound), time_limit_(time_limit),
        master_(ds, complexity_bound), start_(Clock::now()) {
    for (const auto& pc : pool) master_.add_clause(pc);
    incumbent_z_ = static_cast<int>(ds.n_positive());
  }

  void offer(const std::vector<std::size_t>& selected) {
    int used = 0;
    for (std::size_t k : selected) used += pool_[k].clause.complexity();
    if (used > complexity_bound_) return;
    const int z = selection_loss(ds_, pool_, selected);
    if (z < incumbent_z_) {
      incumbent_z_ = z;
      incumbent_ = selected;
      std::sort(incumbent_.begin(), incumbent_.end());
    }
  }

  MipResult run() {
    dfs();
    MipResult out;
    out.selected = incumbent_;
    out.z = incumbent_z_;
    out.optimal = complete_;
    out.nodes = nodes_;
    return out;
  }

 private:
  void round_and_offer(const std::vector<double>& w) {
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (w[k] >= 0.5) order.push_back(k);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    std::vector<std::size_t> chosen;
    int used = 0;
    for (std::size_t k : order) {
      const int c = pool_[k].clause.complexity();
      if (used + c <= complexity_bound_) {
        chosen.push_back(k);
        used += c;
      }
    }
    offer(chosen);
  }

  void dfs() {
    if (seconds_since(start_) > time_limit_) {
      complete_ = false;
      return;
    }
    ++nodes_;
    const MasterSolution sol = master_.solve();
    if (sol.status != LpStatus::kOptimal) {
      if (sol.status != LpStatus::kInfeasible) complete_ = false;
      return;
    }
    if (ceil_with_tolerance(sol.objective) >= incumbent_z_) return;
    round_and_offer(sol.w);

    std::optional<std::size_t> branch;
    double most = kIntegralityTolerance;
    for (std::size_t k = 0; k < sol.w.size(); ++k) {
      const double frac = std::min(sol.w[k], 1.0 - sol.w[k]);
      if (frac > most) {
        most = frac;
        branch = k;
      }
    }
    if (!branch) {
      std::vector<std::size_t> chosen;
      for (std::size_t k = 0; k < sol.w.size(); ++k) {
        if (sol.w[k] > 0.5) chosen.push_back(k);
      }
      offer(chosen);
      return;
    }
    const std::size_t k = *branch;
    const double first = sol.w[k] >= 0.5 ? 1.0 : 0.0;
    for (double value : {first, 1.0 - first}) {
      master_.set_clause_bounds(k, value, value);
      dfs();
      master_.set_clause_bounds(k, 0.0, 1.0);
      if (seconds_since(start_) > time_limit_) {
        complete_ = false;
        return;
      }
    }
  }

  const BinaryDataset& ds_;
  const ClausePool& pool_;
  int complexity_bound_;
  double time_limit_;
  RestrictedMaster master_;
  Clock::time_point start_;
  std::vector<std::size_t> incumbent_;
  int incumbent_z_ = 0;
  std::int64_t nodes_ = 0;
  bool complete_ = true;
};

struct PricingRound {
  std::vector<Clause> candidates;
  std::optional<double> z_cg;
  bool certified = false;
  std::string mode;
};

PricingRound price_round(const DualContext& ctx, const ColGenConfig& cfg, Regime regime, const ClausePool& pool,
                         double time_budget, int iteration) {
  PricingRound round;
  const auto excluded = [&pool](const Clause& c) { return pool.contains(c); };

  GreedyPricingOptions greedy;
  greedy.kappa = std::min(cfg.kappa, ctx.max_literals);
  greedy.max_evaluations_per_level = cfg.greedy_evaluations_per_level;
  greedy.max_returned = cfg.max_columns_per_iteration;
  greedy.excluded = excluded;

  ExactPricingOptions exact;
  exact.time_limit = std::min(cfg.pricing_time_limit, time_budget);
  exact.max_returned = cfg.max_columns_per_iteration;
  exact.cutoff = 0.0;

  if (regime != Regime::kLarge) {
    exact.excluded = excluded;
    const PricingResult r = price_exact(ctx, exact);
    round.mode = r.proven_optimal ? "exact" : "exact-timeout";
    round.z_cg = r.z_cg;
    round.certified = r.bound_valid;
    for (const auto& pc : r.clauses) round.candidates.push_back(pc.clause);
  } else {
    round.mode = "restricted";
    try {
      const RestrictedPricing rp =
          restrict_pricing(ctx, cfg.restricted_samples, cfg.restricted_nnz, cfg.seed + static_cast<std::uint64_t>(iteration));
      exact.excluded = [&](const Clause& c) { return pool.contains(rp.lift(c)); };
      const PricingResult r = price_exact(rp.ctx, exact);
      for (const auto& pc : r.clauses) {
        const Clause lifted = rp.lift(pc.clause);
        if (reduced_cost(lifted, ctx) < -kAdmissionTolerance) round.candidates.push_back(lifted);
      }
    } catch (const ConfigError&) {
      round.mode = "restricted-empty";
    }
  }

  const bool exhausted = round.certified && round.z_cg && *round.z_cg >= -kAdmissionTolerance;
  if (round.candidates.empty() && !exhausted) {
    const PricingResult g = price_greedy(ctx, greedy);
    round.mode += "+greedy";
    if (!round.certified) round.z_cg = g.clauses.empty() ? std::optional<double>{} : g.z_cg;
    for (const auto& pc : g.clauses) round.candidates.push_back(pc.clause);
  }
  return round;
}

}  // namespace

void ColGenConfig::validate() const {
  if (complexity_bound < 2) {
    throw ConfigError("complexity bound C = " + std::to_string(complexity_bound) +
                      " admits no clause (every clause has complexity >= 2)");
  }
  if (clause_bound < 0) throw ConfigError("clause bound D must be positive");
  if (kappa < 1) throw ConfigError("kappa must be at least 1");
  if (!(time_limit > 0.0) || !(pricing_time_limit > 0.0)) throw ConfigError("time limits must be positive");
  if (max_columns_per_iteration < 1) throw ConfigError("max columns per iteration must be at least 1");
}

int ColGenConfig::effective_clause_bound(std::size_t d) const {
  int bound = complexity_bound - 1;
  if (clause_bound > 0) bound = std::min(bound, clause_bound);
  bound = std::min<int>(bound, static_cast<int>(d));
  return std::max(bound, 1);
}

std::optional<int> lower_bound_certificate(double z_rmlp, std::optional<double> z_cg, bool certified,
                                           int complexity_bound) {
  if (!certified || !z_cg) return std::nullopt;
  if (*z_cg >= -kAdmissionTolerance) return ceil_with_tolerance(z_rmlp);
  return ceil_with_tolerance(z_rmlp + 0.5 * complexity_bound * *z_cg);
}

int selection_loss(const BinaryDataset& ds, const ClausePool& pool, const std::vector<std::size_t>& selected) {
  Bitset covered(ds.n());
  int loss = 0;
  for (std::size_t k : selected) {
    covered |= pool[k].coverage;
    loss += pool[k].negatives_covered;
  }
  return loss + static_cast<int>(ds.n_positive() - covered.count_and(ds.positives()));
}

MipResult solve_restricted_mip(const BinaryDataset& ds, const ClausePool& pool, int complexity_bound,
                               double time_limit, const std::vector<std::size_t>& initial) {
  MipSearch search(ds, pool, complexity_bound, time_limit);
  if (!initial.empty()) search.offer(initial);
  return search.run();
}

ColGenResult run_column_generation(const BinaryDataset& ds, const ColGenConfig& cfg, ClausePool* shared_pool) {
  cfg.validate();
  if (ds.n_positive() == 0 || ds.n_negative() == 0) {
    throw ConfigError("training data must contain both positive and negative samples");
  }
  if (ds.d() == 0) throw ConfigError("training data has no binary features");
  const auto start = Clock::now();
  const int C = cfg.complexity_bound;
  const int D = cfg.effective_clause_bound(ds.d());

  ClausePool local_pool;
  ClausePool& pool = shared_pool != nullptr ? *shared_pool : local_pool;
  RestrictedMaster master(ds, C);
  for (const auto& pc : pool) master.add_clause(pc);
  const Regime regime = classify_regime(ds, cfg.regimes);

  ColGenResult result;
  for (int iteration = 1;; ++iteration) {
    const MasterSolution sol = master.solve();
    if (sol.status != LpStatus::kOptimal) {
      throw std::runtime_error(std::string("restricted master LP not solved: ") + to_string(sol.status));
    }
    result.z_rmlp_final = sol.objective;

    IterationRecord rec;
    rec.iteration = iteration;
    rec.z_rmlp = sol.objective;
    const double remaining = cfg.time_limit - seconds_since(start);
    if (remaining <= 0.0) {
      rec.pricing_mode = "time-limit";
      rec.pool_size = pool.size();
      rec.seconds = seconds_since(start);
      result.trace.push_back(std::move(rec));
      break;
    }

    const DualContext ctx(ds, sol.mu, sol.lambda, D);
    const PricingRound round = price_round(ctx, cfg, regime, pool, remaining, iteration);
    for (const Clause& c : round.candidates) {
      if (reduced_cost(c, ctx) >= -kAdmissionTolerance) continue;
      if (const auto k = pool.add(c, ds)) {
        master.add_clause(pool[*k]);
        ++rec.columns_added;
      }
    }
    if (const auto lb = lower_bound_certificate(sol.objective, round.z_cg, round.certified, C)) {
      result.lower_bound = result.lower_bound ? std::max(*result.lower_bound, *lb) : *lb;
    }
    rec.z_cg = round.z_cg;
    rec.pricing_mode = round.mode;
    rec.pool_size = pool.size();
    rec.seconds = seconds_since(start);
    const bool done = rec.columns_added == 0;
    result.trace.push_back(std::move(rec));
    if (done) break;
  }

  const double mip_time = std::max(cfg.time_limit - seconds_since(start), cfg.mip_time_fraction * cfg.time_limit);
  const MipResult mip = solve_restricted_mip(ds, pool, C, mip_time);
  std::vector<Clause> clauses;
  for (std::size_t k : mip.selected) clauses.push_back(pool[k].clause);
  result.ruleset = RuleSet(std::move(clauses), ds.features(), RuleForm::kDnf);
  result.selected = mip.selected;
  result.z_train = mip.z;
  result.mip_optimal = mip.optimal;
  result.optimal = result.lower_bound && *result.lower_bound == result.z_train;
  result.ruleset.training = {C, D, cfg.seed, result.z_train, result.lower_bound};
  return result;
}

namespace {

RuleSet as_form(const RuleSet& dnf, const BinaryDataset& original, RuleForm form) {
  RuleSet out(dnf.clauses(), original.features(), form);
  out.training = dnf.training;
  return out;
}

}  // namespace

ColGenResult train_rule_set(const BinaryDataset& ds, const ColGenConfig& cfg, RuleForm form) {
  if (form == RuleForm::kDnf) return run_column_generation(ds, cfg);
  const BinaryDataset negated = negate_for_cnf(ds);
  ColGenResult r = run_column_generation(negated, cfg);
  r.ruleset = as_form(r.ruleset, ds, form);
  return r;
}

std::vector<SweepPoint> sweep_complexity(const BinaryDataset& ds, const std::vector<int>& c_values,
                                         const ColGenConfig& cfg, RuleForm form) {
  if (c_values.empty()) throw ConfigError("complexity sweep needs at least one C value");
  for (std::size_t i = 1; i < c_values.size(); ++i) {
    if (c_values[i] <= c_values[i - 1]) throw ConfigError("complexity sweep values must be strictly increasing");
  }
  const BinaryDataset negated = form == RuleForm::kCnf ? negate_for_cnf(ds) : BinaryDataset{};
  const BinaryDataset& data = form == RuleForm::kCnf ? negated : ds;

  ClausePool pool;
  std::vector<SweepPoint> points;
  for (int C : c_values) {
    ColGenConfig point_cfg = cfg;
    point_cfg.complexity_bound = C;
    SweepPoint point;
    point.complexity_bound = C;
    point.result = run_column_generation(data, point_cfg, &pool);
    point.first_pass_z_train = point.result.z_train;
    points.push_back(std::move(point));
  }

  for (auto& point : points) {
    ColGenResult& r = point.result;
    const int C = point.complexity_bound;
    const MipResult mip = solve_restricted_mip(data, pool, C, cfg.mip_time_fraction * cfg.time_limit, r.selected);
    if (mip.z < r.z_train) {
      std::vector<Clause> clauses;
      for (std::size_t k : mip.selected) clauses.push_back(pool[k].clause);
      const TrainingInfo info = r.ruleset.training;
      r.ruleset = RuleSet(std::move(clauses), data.features(), RuleForm::kDnf);
      r.ruleset.training = info;
      r.selected = mip.selected;
      r.z_train = mip.z;
      r.mip_optimal = mip.optimal;
    }
    RestrictedMaster master(data, C);
    for (const auto& pc : pool) master.add_clause(pc);
    const MasterSolution sol = master.solve();
    if (sol.status == LpStatus::kOptimal) r.z_rmlp_final = sol.objective;
    r.optimal = r.lower_bound && *r.lower_bound == r.z_train;
    r.ruleset.training.z_train = r.z_train;
    if (form == RuleForm::kCnf) r.ruleset = as_form(r.ruleset, ds, form);
  }
  return points;
}

void write_trace_csv(const std::vector<IterationRecord>& trace, std::ostream& out) {
  out << "iteration,z_rmlp,z_cg,pricing_mode,columns_added,pool_size,seconds\n";
  for (const auto& rec : trace) {
    std::ostringstream line;
    line << std::setprecision(10) << rec.iteration << ',' << rec.z_rmlp << ',';
    if (rec.z_cg) line << *rec.z_cg;
    line << ',' << rec.pricing_mode << ',' << rec.columns_added << ',' << rec.pool_size << ',' << std::fixed
         << std::setprecision(3) << rec.seconds;
    out << line.str() << '\n';
  }
}

}  // namespace rulecg
