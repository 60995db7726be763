#include "rulecg/pricing.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace rulecg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Bounded, sorted list of the most negative clauses seen.
class TopClauses {
 public:
  explicit TopClauses(std::size_t capacity) : capacity_(capacity) {}

  bool full() const { return capacity_ == 0 || items_.size() >= capacity_; }
  double worst() const { return items_.empty() ? 0.0 : items_.back().reduced_cost; }

  void offer(const std::vector<int>& features, double rc) {
    if (capacity_ == 0) return;
    if (full() && rc >= worst()) return;
    PricedClause pc{Clause(features), rc};
    auto it = std::lower_bound(items_.begin(), items_.end(), pc, [](const PricedClause& a, const PricedClause& b) {
      return a.reduced_cost < b.reduced_cost || (a.reduced_cost == b.reduced_cost && a.clause < b.clause);
    });
    items_.insert(it, std::move(pc));
    if (items_.size() > capacity_) items_.pop_back();
  }

  std::vector<PricedClause> take() { return std::move(items_); }

 private:
  std::size_t capacity_;
  std::vector<PricedClause> items_;
};

struct FeatureCandidate {
  int index = 0;
  double positive_weight = 0.0;  // sum of mu over covered positives
  bool has_twins = false;        // other features share this column
};

// Distinct, potentially useful features in descending order of
// dual-weighted positive coverage.
std::vector<FeatureCandidate> candidate_features(const DualContext& ctx, bool drop_unweighted) {
  const auto& ds = *ctx.ds;
  std::unordered_map<std::size_t, std::vector<int>> by_hash;
  std::vector<FeatureCandidate> out;
  for (std::size_t j = 0; j < ds.d(); ++j) {
    const Bitset& col = ds.column(j);
    auto& bucket = by_hash[col.hash()];
    const bool duplicate = std::any_of(bucket.begin(), bucket.end(), [&](int other) {
      return ds.column(static_cast<std::size_t>(other)) == col;
    });
    if (duplicate) {
      for (auto& c : out) {
        if (ds.column(static_cast<std::size_t>(c.index)) == col) c.has_twins = true;
      }
      continue;
    }
    bucket.push_back(static_cast<int>(j));
    const double weight = (col & ds.positives()).weighted_sum(ctx.mu);
    if (drop_unweighted && weight <= 0.0) continue;
    out.push_back({static_cast<int>(j), weight});
  }
  std::stable_sort(out.begin(), out.end(), [](const FeatureCandidate& a, const FeatureCandidate& b) {
    return a.positive_weight > b.positive_weight;
  });
  return out;
}

class BranchAndBound {
 public:
  BranchAndBound(const DualContext& ctx, const ExactPricingOptions& options)
      : ctx_(ctx),
        options_(options),
        ds_(*ctx.ds),
        top_(options.max_returned),
        start_(Clock::now()) {}

  PricingResult run() {
    const bool cg_mode = options_.cutoff <= 0.0;
    cands_ = candidate_features(ctx_, cg_mode);
    max_depth_ = std::min<int>(ctx_.max_literals, static_cast<int>(cands_.size()));
    const Bitset all(ds_.n(), true);
    negatives_ = Bitset(ds_.n());
    buffers_.reserve(static_cast<std::size_t>(max_depth_) + 1);
    kids_.reserve(static_cast<std::size_t>(max_depth_) + 1);
    root_done_.assign(cands_.size(), false);
    if (max_depth_ > 0) explore(0, 0, all, false);

    PricingResult result;
    result.explored = nodes_;
    result.seconds = seconds_since(start_);
    double z = std::min({best_, floor_, options_.cutoff});
    if (timed_out_) {
      // Unfinished root branches are bounded by their root node bound.
      for (std::size_t p = 0; p < cands_.size(); ++p) {
        if (!root_done_[p]) z = std::min(z, 2.0 * ctx_.lambda - cands_[p].positive_weight);
      }
      result.bound_valid = true;
      result.proven_optimal = false;
      result.z_cg = z;
    } else {
      result.proven_optimal = true;
      result.bound_valid = true;
      result.z_cg = z;
    }
    result.clauses = top_.take();
    return result;
  }

 private:
  // Subtrees whose bound reaches this value cannot improve the minimum;
  // other negative clauses are collected only as they are met.
  double threshold() const { return std::min(best_, options_.cutoff); }

  struct Child {
    std::size_t pos = 0;
    double weight = 0.0;
    double rc = 0.0;
  };

  // Scores every child first, drops the node if its descendant bound fails,
  // then visits the surviving children in position order.
  void explore(int depth, std::size_t start, const Bitset& cov, bool parent_excluded) {
    const auto level = static_cast<std::size_t>(depth);
    if (buffers_.size() <= level) {
      buffers_.emplace_back(cands_.size(), Bitset(ds_.n()));
      kids_.emplace_back();
    }
    const double lambda = ctx_.lambda;
    const double size = depth + 1;
    std::vector<Child>& kids = kids_[level];
    kids.clear();
    for (std::size_t p = start; p < cands_.size(); ++p) {
      if ((++nodes_ & 1023) == 0 && seconds_since(start_) > options_.time_limit) {
        timed_out_ = true;
        return;
      }
      Bitset& child = buffers_[level][p];
      child.assign_and(cov, ds_.column(static_cast<std::size_t>(cands_[p].index)));
      // Same coverage as the parent clause: dominated by the parent (and by
      // the parent's other extensions), unless the parent is excluded.
      if (depth > 0 && !parent_excluded && child == cov) continue;
      const double weight = depth == 0 ? cands_[p].positive_weight : (child & ds_.positives()).weighted_sum(ctx_.mu);
      if (lambda * (1.0 + size) - weight >= threshold()) {
        if (depth == 0) root_done_[p] = true;
        continue;
      }
      const double rc = static_cast<double>(child.count_and(ds_.negatives())) - weight + lambda * (1.0 + size);
      kids.push_back({p, weight, rc});
    }
    if (depth > 0 && !kids.empty() && descendant_bound(depth, cov, kids) >= threshold()) return;

    for (std::size_t k = 0; k < kids_[level].size(); ++k) {
      if (timed_out_) return;
      const Child kid = kids_[level][k];
      const Bitset& child = buffers_[level][kid.pos];
      if (lambda * (1.0 + size) - kid.weight >= threshold()) {
        if (depth == 0) root_done_[kid.pos] = true;
        continue;
      }
      const int j = cands_[kid.pos].index;
      path_.push_back(j);
      twins_ += cands_[kid.pos].has_twins;
      const bool excluded = options_.excluded && options_.excluded(Clause(path_));
      if (excluded) {
        // A twin-feature copy of an excluded clause is not excluded but is
        // never generated; count its value here.
        if (twins_ > 0) floor_ = std::min(floor_, kid.rc);
        if (depth + 1 < ctx_.max_literals && lambda * (2.0 + size) - kid.weight < floor_) {
          account_extensions(child, kid.rc + lambda);
        }
      } else {
        best_ = std::min(best_, kid.rc);
        if (kid.rc < 0.0 && kid.rc < options_.cutoff) top_.offer(path_, kid.rc);
      }
      if (depth + 1 < max_depth_ && lambda * (2.0 + size) - kid.weight < threshold()) {
        explore(depth + 1, kid.pos + 1, child, excluded);
      }
      twins_ -= cands_[kid.pos].has_twins;
      path_.pop_back();
      if (depth == 0 && !timed_out_) root_done_[kid.pos] = true;
    }
  }

  // Lower bound on every strict extension of the clause at `depth` with
  // coverage `cov`. Negative z covered by the clause either stays covered
  // (+1) or some added feature excludes it, losing at least m_z of positive
  // weight; with L the largest loss paid, every z with m_z > L stays.
  double descendant_bound(int depth, const Bitset& cov, const std::vector<Child>& kids) {
    const auto level = static_cast<std::size_t>(depth);
    const double weight = (cov & ds_.positives()).weighted_sum(ctx_.mu);
    const double base = ctx_.lambda * (2.0 + depth) - weight;
    if (cov.count_and(ds_.negatives()) == 0) return base;
    if (min_loss_.size() != ds_.n()) min_loss_.assign(ds_.n(), kUnreachable);
    negatives_.assign_and(cov, ds_.negatives());
    const auto neg_words = negatives_.words();
    for (const Child& kid : kids) {
      const double loss = weight - kid.weight;
      const auto col = ds_.column(static_cast<std::size_t>(cands_[kid.pos].index)).words();
      for (std::size_t w = 0; w < neg_words.size(); ++w) {
        Bitset::Word bits = neg_words[w] & ~col[w];
        while (bits != 0) {
          const std::size_t z = w * Bitset::kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
          min_loss_[z] = std::min(min_loss_[z], loss);
          bits &= bits - 1;
        }
      }
    }
    losses_.clear();
    negatives_.for_each([&](std::size_t z) {
      losses_.push_back(min_loss_[z]);
      min_loss_[z] = kUnreachable;
    });
    std::sort(losses_.begin(), losses_.end());
    // L = 0 keeps every z with m_z > 0; L = losses_[k] keeps those after k.
    const std::size_t total = losses_.size();
    std::size_t zero = 0;
    while (zero < total && losses_[zero] <= 0.0) ++zero;
    double extra = static_cast<double>(total - zero);
    for (std::size_t k = 0; k < total && losses_[k] < kUnreachable; ++k) {
      if (k + 1 < total && losses_[k + 1] == losses_[k]) continue;
      extra = std::min(extra, losses_[k] + static_cast<double>(total - k - 1));
    }
    (void)level;
    return base + extra;
  }

  // Supersets of an excluded clause with the same coverage are never
  // generated below it; the cheapest has one more literal.
  void account_extensions(const Bitset& cov, double value) {
    for (std::size_t j = 0; j < ds_.d(); ++j) {
      if (std::find(path_.begin(), path_.end(), static_cast<int>(j)) != path_.end()) continue;
      if (!cov.is_subset_of(ds_.column(j))) continue;
      std::vector<int> extended = path_;
      extended.push_back(static_cast<int>(j));
      if (!options_.excluded(Clause(std::move(extended)))) {
        floor_ = std::min(floor_, value);
        return;
      }
    }
  }

  const DualContext& ctx_;
  const ExactPricingOptions& options_;
  const BinaryDataset& ds_;
  std::vector<FeatureCandidate> cands_;
  int max_depth_ = 0;
  static constexpr double kUnreachable = 1e300;
  std::vector<double> min_loss_;
  std::vector<double> losses_;
  Bitset negatives_;
  std::vector<std::vector<Bitset>> buffers_;  // per depth, per candidate
  std::vector<std::vector<Child>> kids_;      // per depth
  std::vector<int> path_;
  std::vector<bool> root_done_;
  TopClauses top_;
  double best_ = PricingResult::kNoValue;
  double floor_ = PricingResult::kNoValue;
  std::int64_t nodes_ = 0;
  int twins_ = 0;
  bool timed_out_ = false;
  Clock::time_point start_;
};

}  // namespace

DualContext::DualContext(const BinaryDataset& data, std::vector<double> duals, double complexity_dual,
                         int clause_bound)
    : ds(&data), mu(std::move(duals)), lambda(complexity_dual), max_literals(clause_bound) {}

void DualContext::validate() const {
  if (ds == nullptr) throw ConfigError("dual context has no dataset");
  if (mu.size() != ds->n()) throw ConfigError("dual vector length does not match sample count");
  for (double m : mu) {
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("dual weights must lie in [0, 1]");
  }
  if (!(lambda >= 0.0)) throw ConfigError("complexity dual must be nonnegative");
  if (max_literals < 1 || static_cast<std::size_t>(max_literals) > std::max<std::size_t>(ds->d(), 1)) {
    throw ConfigError("clause bound D must satisfy 1 <= D <= d");
  }
}

double reduced_cost(const Bitset& cov, std::size_t literals, const DualContext& ctx) {
  const double negatives = static_cast<double>(cov.count_and(ctx.ds->negatives()));
  const double positives = (cov & ctx.ds->positives()).weighted_sum(ctx.mu);
  return negatives - positives + ctx.lambda * (1.0 + static_cast<double>(literals));
}

double reduced_cost(const Clause& clause, const DualContext& ctx) {
  if (clause.size() == 0) throw std::invalid_argument("reduced cost of an empty clause");
  return reduced_cost(coverage(clause, *ctx.ds), clause.size(), ctx);
}

PricingResult price_exact(const DualContext& ctx, const ExactPricingOptions& options) {
  ctx.validate();
  return BranchAndBound(ctx, options).run();
}

PricingResult price_greedy(const DualContext& ctx, const GreedyPricingOptions& options) {
  ctx.validate();
  const auto start = Clock::now();
  const auto& ds = *ctx.ds;
  const int kappa = std::max(1, std::min(options.kappa, ctx.max_literals));
  const double lambda = ctx.lambda;
  const auto cands = candidate_features(ctx, true);

  struct Node {
    std::vector<int> features;
    Bitset coverage;
    double weight = 0.0;
    double score = 0.0;  // reduced cost
  };
  auto by_score = [](const Node& a, const Node& b) {
    return a.score < b.score || (a.score == b.score && a.features < b.features);
  };

  TopClauses top(options.max_returned);
  double best = PricingResult::kNoValue;
  std::int64_t evaluations = 0;
  auto record = [&](const Node& node) {
    if (node.score >= 0.0) return;
    const Clause c(node.features);
    if (options.excluded && options.excluded(c)) return;
    best = std::min(best, node.score);
    top.offer(node.features, node.score);
  };

  // Seeds: one-literal clauses that could extend to a negative reduced cost.
  std::vector<Node> level;
  for (const auto& f : cands) {
    if (2.0 * lambda - f.positive_weight >= 0.0) continue;
    Node node{{f.index}, ds.column(static_cast<std::size_t>(f.index)), f.positive_weight, 0.0};
    node.score = reduced_cost(node.coverage, 1, ctx);
    ++evaluations;
    record(node);
    level.push_back(std::move(node));
  }
  std::sort(level.begin(), level.end(), by_score);

  std::unordered_set<Clause, ClauseHash> seen;
  for (int l = 1; l < kappa && !level.empty(); ++l) {
    std::vector<Node> next;
    std::size_t level_evaluations = 0;
    Bitset cov(ds.n());
    for (const Node& node : level) {
      if (level_evaluations >= options.max_evaluations_per_level) break;
      if (lambda * (2.0 + l) - node.weight >= 0.0) continue;
      for (const auto& f : cands) {
        if (level_evaluations >= options.max_evaluations_per_level) break;
        if (std::find(node.features.begin(), node.features.end(), f.index) != node.features.end()) continue;
        std::vector<int> feats = node.features;
        feats.insert(std::upper_bound(feats.begin(), feats.end(), f.index), f.index);
        Clause key(feats);
        if (!seen.insert(key).second) continue;
        cov.assign_and(node.coverage, ds.column(static_cast<std::size_t>(f.index)));
        if (cov == node.coverage) continue;
        ++level_evaluations;
        ++evaluations;
        Node child{std::move(feats), cov, (cov & ds.positives()).weighted_sum(ctx.mu), 0.0};
        child.score = static_cast<double>(cov.count_and(ds.negatives())) - child.weight +
                      lambda * (2.0 + l);
        record(child);
        if (l + 1 < kappa && lambda * (3.0 + l) - child.weight < 0.0) next.push_back(std::move(child));
      }
    }
    std::sort(next.begin(), next.end(), by_score);
    level = std::move(next);
  }

  PricingResult result;
  result.clauses = top.take();
  result.z_cg = best;
  result.proven_optimal = false;
  result.bound_valid = false;
  result.explored = evaluations;
  result.seconds = seconds_since(start);
  return result;
}

Clause RestrictedPricing::lift(const Clause& local) const {
  std::vector<int> f;
  f.reserve(local.size());
  for (int j : local.features()) f.push_back(static_cast<int>(features[static_cast<std::size_t>(j)]));
  return Clause(std::move(f));
}

RestrictedPricing restrict_pricing(const DualContext& ctx, std::size_t target_samples, std::size_t nnz_cap,
                                   std::uint64_t seed) {
  ctx.validate();
  if (target_samples < 1 || nnz_cap < 1) throw ConfigError("restriction targets must be positive");
  const auto& ds = *ctx.ds;
  const double p_sample = std::min(1.0, static_cast<double>(target_samples) / static_cast<double>(ds.n()));

  std::vector<std::size_t> ones_per_sample(ds.n(), 0);
  for (const auto& col : ds.columns()) col.for_each([&](std::size_t i) { ++ones_per_sample[i]; });

  for (int attempt = 0; attempt <= 5; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt) * 0x9e3779b97f4a7c15ull);
    std::bernoulli_distribution keep_sample(p_sample);
    std::vector<std::size_t> samples;
    bool has_positive = false;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (p_sample >= 1.0 || keep_sample(rng)) {
        samples.push_back(i);
        has_positive |= ds.y(i) == 1;
        zeros += ds.d() - ones_per_sample[i];
      }
    }
    if (!has_positive) continue;

    std::vector<std::size_t> features;
    const std::size_t projected = zeros + ds.d() + samples.size();
    if (projected > nnz_cap) {
      std::bernoulli_distribution keep_feature(static_cast<double>(nnz_cap) / static_cast<double>(projected));
      for (std::size_t j = 0; j < ds.d(); ++j) {
        if (keep_feature(rng)) features.push_back(j);
      }
      if (features.empty()) continue;
    } else {
      features.resize(ds.d());
      for (std::size_t j = 0; j < ds.d(); ++j) features[j] = j;
    }

    RestrictedPricing out;
    auto sub = std::make_shared<BinaryDataset>(ds.subset_samples(samples).subset_features(features));
    std::vector<double> mu(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) mu[k] = ctx.mu[samples[k]];
    out.ctx = DualContext(*sub, std::move(mu), ctx.lambda,
                          std::min<int>(ctx.max_literals, static_cast<int>(features.size())));
    out.ds = std::move(sub);
    out.samples = std::move(samples);
    out.features = std::move(features);
    return out;
  }
  throw ConfigError("restricted pricing kept no positive sample after 5 retries");
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::kSmall:
      return "small";
    case Regime::kMedium:
      return "medium";
    case Regime::kLarge:
      return "large";
  }
  return "?";
}

std::size_t pricing_nonzeros(const BinaryDataset& ds) { return ds.zero_count() + ds.d() + ds.n(); }

Regime classify_regime(const BinaryDataset& ds, const RegimeThresholds& thresholds) {
  const std::size_t nnz = pricing_nonzeros(ds);
  if (nnz < thresholds.medium) return Regime::kSmall;
  if (nnz > thresholds.large) return Regime::kLarge;
  return Regime::kMedium;
}

}  // namespace rulecg
