#include <doctest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rulecg/pricing.hpp"

using namespace rulecg;

namespace {

// Random duals: mu on positives in [0,1] (some exactly 0 or 1), lambda small.
std::vector<double> random_mu(std::mt19937_64& rng, const oracle::Instance& inst) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> mu(inst.n(), 0.0);
  for (std::size_t i = 0; i < inst.n(); ++i) {
    if (inst.y[i] != 1) continue;
    const double u = unit(rng);
    mu[i] = u < 0.2 ? 0.0 : (u > 0.7 ? 1.0 : unit(rng));
  }
  return mu;
}

std::vector<int> features_of(const Clause& c) { return c.features(); }

}  // namespace

TEST_SUITE("pricing") {
  TEST_CASE("reduced costs on T1") {
    const BinaryDataset ds = fixtures::t1();
    const DualContext ctx(ds, {1, 1, 0, 0}, 0.0, 1);
    CHECK(reduced_cost(Clause({0}), ctx) == doctest::Approx(-2.0));
    CHECK(reduced_cost(Clause({1}), ctx) == doctest::Approx(0.0));
    const DualContext priced(ds, {1, 1, 0, 0}, 0.5, 1);
    CHECK(reduced_cost(Clause({0}), priced) == doctest::Approx(-1.0));
  }

  TEST_CASE("exact pricing on T1 finds X1") {
    const BinaryDataset ds = fixtures::t1();
    const PricingResult r = price_exact(DualContext(ds, {1, 1, 0, 0}, 0.0, 1));
    CHECK(r.proven_optimal);
    CHECK(r.bound_valid);
    CHECK(r.z_cg == doctest::Approx(-2.0));
    REQUIRE_FALSE(r.clauses.empty());
    CHECK(r.clauses.front().clause == Clause({0}));
  }

  TEST_CASE("bitset reduced cost equals the per-sample formula") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      const auto inst = oracle::random_instance(rng, 30, 6);
      const BinaryDataset ds = inst.dataset();
      const auto mu = random_mu(rng, inst);
      const double lambda = 0.1 * (trial % 5);
      const DualContext ctx(ds, mu, lambda, 3);
      oracle::for_each_clause(6, 3, [&](const std::vector<int>& f) {
        CHECK(reduced_cost(Clause(f), ctx) == doctest::Approx(oracle::reduced_cost(inst, mu, lambda, f)).epsilon(1e-12));
      });
    }
  }

  TEST_CASE("exact pricing matches enumeration on 12 features with D = 3") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 60; ++trial) {
      const auto inst = oracle::random_instance(rng, 20 + trial % 30, 12, trial % 2 ? 0.5 : 0.7);
      const BinaryDataset ds = inst.dataset();
      const auto mu = random_mu(rng, inst);
      const double lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const PricingResult r = price_exact(DualContext(ds, mu, lambda, 3));
      REQUIRE(r.proven_optimal);
      const double expected = oracle::min_reduced_cost(inst, mu, lambda, 3);
      CHECK(std::abs(r.z_cg - expected) <= 1e-9);
      double last = -1e300;
      for (const auto& pc : r.clauses) {
        CHECK(pc.reduced_cost < 0.0);
        CHECK(pc.reduced_cost >= last);
        CHECK(pc.clause.size() <= 3);
        CHECK(pc.reduced_cost == doctest::Approx(oracle::reduced_cost(inst, mu, lambda, features_of(pc.clause))));
        last = pc.reduced_cost;
      }
      if (expected < -1e-9) {
        REQUIRE_FALSE(r.clauses.empty());
        CHECK(r.clauses.front().reduced_cost == doctest::Approx(expected));
      }
    }
  }

  TEST_CASE("excluded clauses are skipped and the minimum is over the rest") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 30; ++trial) {
      const auto inst = oracle::random_instance(rng, 25, 7);
      const BinaryDataset ds = inst.dataset();
      const auto mu = random_mu(rng, inst);
      const double lambda = 0.2;
      const DualContext ctx(ds, mu, lambda, 2);
      const PricingResult first = price_exact(ctx);
      REQUIRE_FALSE(first.clauses.empty());
      std::set<std::vector<int>> banned;
      for (std::size_t k = 0; k < std::min<std::size_t>(3, first.clauses.size()); ++k) {
        banned.insert(first.clauses[k].clause.features());
      }
      ExactPricingOptions options;
      options.excluded = [&](const Clause& c) { return banned.contains(c.features()); };
      const PricingResult r = price_exact(ctx, options);
      REQUIRE(r.proven_optimal);
      double expected = 1e300;
      oracle::for_each_clause(7, 2, [&](const std::vector<int>& f) {
        if (!banned.contains(f)) expected = std::min(expected, oracle::reduced_cost(inst, mu, lambda, f));
      });
      CHECK(std::abs(r.z_cg - expected) <= 1e-9);
      for (const auto& pc : r.clauses) CHECK_FALSE(banned.contains(pc.clause.features()));
    }
  }

  TEST_CASE("cutoff zero proves nonnegativity without returning clauses") {
    std::mt19937_64 rng(34);
    const auto inst = oracle::random_instance(rng, 20, 5);
    const BinaryDataset ds = inst.dataset();
    // A large lambda makes every clause expensive.
    std::vector<double> mu(inst.n(), 0.0);
    for (std::size_t i = 0; i < inst.n(); ++i) mu[i] = inst.y[i] == 1 ? 0.1 : 0.0;
    ExactPricingOptions options;
    options.cutoff = 0.0;
    const PricingResult r = price_exact(DualContext(ds, mu, 5.0, 3), options);
    CHECK(r.proven_optimal);
    CHECK(r.clauses.empty());
    CHECK(r.z_cg >= 0.0);
  }

  TEST_CASE("greedy returns valid negative clauses") {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 30; ++trial) {
      const auto inst = oracle::random_instance(rng, 40, 10);
      const BinaryDataset ds = inst.dataset();
      const auto mu = random_mu(rng, inst);
      const double lambda = 0.1;
      GreedyPricingOptions options;
      options.kappa = 4;
      const PricingResult r = price_greedy(DualContext(ds, mu, lambda, 3), options);
      CHECK_FALSE(r.proven_optimal);
      CHECK(r.clauses.size() <= options.max_returned);
      std::set<std::vector<int>> seen;
      for (const auto& pc : r.clauses) {
        CHECK(pc.clause.size() <= 3);
        CHECK(pc.reduced_cost < 0.0);
        CHECK(pc.reduced_cost == doctest::Approx(oracle::reduced_cost(inst, mu, lambda, features_of(pc.clause))));
        CHECK(seen.insert(pc.clause.features()).second);
      }
      // Greedy can never beat the exact minimum.
      if (!r.clauses.empty()) CHECK(r.clauses.front().reduced_cost >= oracle::min_reduced_cost(inst, mu, lambda, 3) - 1e-9);
    }
  }

  TEST_CASE("restricted pricing samples about the target and lifts back") {
    std::mt19937_64 rng(36);
    const auto inst = oracle::random_instance(rng, 10000, 8);
    const BinaryDataset ds = inst.dataset();
    const auto mu = random_mu(rng, inst);
    const DualContext ctx(ds, mu, 0.1, 3);
    const RestrictedPricing rp = restrict_pricing(ctx, 2000, 10000000, 7);
    CHECK(rp.samples.size() > 1800);
    CHECK(rp.samples.size() < 2200);
    CHECK(rp.features.size() == 8);
    CHECK(rp.ds->n() == rp.samples.size());
    for (std::size_t k = 0; k < rp.samples.size(); k += 97) {
      CHECK(rp.ctx.mu[k] == mu[rp.samples[k]]);
      CHECK(rp.ds->y(k) == ds.y(rp.samples[k]));
    }
    const PricingResult local = price_exact(rp.ctx);
    for (const auto& pc : local.clauses) {
      const Clause full = rp.lift(pc.clause);
      CHECK(full.size() == pc.clause.size());
    }
    // Same seed, same sample.
    CHECK(restrict_pricing(ctx, 2000, 10000000, 7).samples == rp.samples);
  }

  TEST_CASE("restricted pricing drops features above the non-zero cap") {
    std::mt19937_64 rng(37);
    const auto inst = oracle::random_instance(rng, 500, 40);
    const BinaryDataset ds = inst.dataset();
    const RestrictedPricing rp = restrict_pricing(DualContext(ds, random_mu(rng, inst), 0.0, 2), 500, 5000, 3);
    CHECK(rp.features.size() < 40);
    for (std::size_t k = 0; k < rp.features.size(); ++k) CHECK(rp.ds->column(k) == ds.column(rp.features[k]));
    const Clause lifted = rp.lift(Clause({0}));
    CHECK(lifted == Clause({static_cast<int>(rp.features[0])}));
  }

  TEST_CASE("regime thresholds") {
    const BinaryDataset ds = fixtures::t1();
    // Zeros: 0 + 1 + 1 + 2 = 4, plus d = 2 and n = 4.
    CHECK(pricing_nonzeros(ds) == 10);
    CHECK(classify_regime(ds) == Regime::kSmall);
    CHECK(classify_regime(ds, {5, 20}) == Regime::kMedium);
    CHECK(classify_regime(ds, {5, 9}) == Regime::kLarge);
    CHECK(classify_regime(ds, {5, 10}) == Regime::kMedium);
  }

  TEST_CASE("invalid duals are configuration errors") {
    const BinaryDataset ds = fixtures::t1();
    CHECK_THROWS_AS(price_exact(DualContext(ds, {1.5, 0, 0, 0}, 0.0, 1)), ConfigError);
    CHECK_THROWS_AS(price_exact(DualContext(ds, {1, 1, 0, 0}, -1.0, 1)), ConfigError);
    CHECK_THROWS_AS(price_exact(DualContext(ds, {1, 1, 0, 0}, 0.0, 3)), ConfigError);
    CHECK_THROWS_AS(price_exact(DualContext(ds, {1, 1, 0}, 0.0, 1)), ConfigError);
  }
}
