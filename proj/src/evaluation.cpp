#include "rulecg/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

namespace rulecg {

std::vector<int> stratified_folds(std::span<const std::uint8_t> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] != 0 ? 1 : 0].push_back(i);
  for (const auto& members : by_class) {
    if (members.size() < static_cast<std::size_t>(folds)) {
      throw ConfigError("a class has " + std::to_string(members.size()) + " samples, fewer than " +
                        std::to_string(folds) + " folds");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t counter = 0;
  for (int cls : {1, 0}) {
    auto& members = by_class[cls];
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) fold[i] = static_cast<int>(counter++ % static_cast<std::size_t>(folds));
  }
  return fold;
}

void write_metrics_header(std::ostream& out) {
  out << "dataset,fold,C,test_acc,train_acc,complexity,z_train,lower_bound,seconds\n";
}

void write_metrics_row(const MetricsRecord& r, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f,%d,%d,", r.fold, r.complexity_bound, r.test_accuracy,
                r.train_accuracy, r.complexity, r.z_train);
  out << r.dataset << ',' << buf;
  if (r.lower_bound) out << *r.lower_bound;
  std::snprintf(buf, sizeof buf, ",%.3f\n", r.seconds);
  out << buf;
}

void write_metrics_csv(const std::vector<MetricsRecord>& records, std::ostream& out) {
  write_metrics_header(out);
  for (const auto& r : records) write_metrics_row(r, out);
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

std::vector<bool> pareto_efficient(std::span<const CurvePoint> points) {
  std::vector<bool> efficient(points.size(), true);
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = 0; b < points.size(); ++b) {
      if (a == b) continue;
      const auto& p = points[a];
      const auto& q = points[b];
      const bool weakly = q.accuracy >= p.accuracy && q.complexity <= p.complexity;
      const bool strictly = q.accuracy > p.accuracy || q.complexity < p.complexity;
      if (weakly && strictly) {
        efficient[a] = false;
        break;
      }
    }
  }
  return efficient;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Split {
  BinaryDataset train;
  BinaryDataset test;
};

Split binarize_split(const PreparedTable& table, std::span<const std::size_t> train_rows,
                     std::span<const std::size_t> test_rows, const BinarizerOptions& options) {
  const Binarizer binarizer = Binarizer::fit(table, train_rows, options);
  return {binarizer.transform(table, train_rows), binarizer.transform(table, test_rows)};
}

double score(const RuleSet& rs, const BinaryDataset& ds) {
  const auto predictions = rs.predict(ds);
  return accuracy(predictions, ds.labels());
}

void split_rows(std::span<const std::size_t> rows, const std::vector<int>& fold_of, int fold,
                std::vector<std::size_t>& train, std::vector<std::size_t>& test) {
  train.clear();
  test.clear();
  for (std::size_t k = 0; k < rows.size(); ++k) (fold_of[k] == fold ? test : train).push_back(rows[k]);
}

std::vector<std::uint8_t> labels_of(const PreparedTable& table, std::span<const std::size_t> rows) {
  std::vector<std::uint8_t> y;
  y.reserve(rows.size());
  for (std::size_t r : rows) y.push_back(table.y[r]);
  return y;
}

// Runs task(i) for i in [0, count) on up to `jobs` threads; the first
// exception (by index) is rethrown.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ColGenConfig config_for(const EvaluationOptions& options, int C, std::uint64_t seed) {
  ColGenConfig cfg = options.colgen;
  cfg.complexity_bound = C;
  cfg.seed = seed;
  return cfg;
}

int select_complexity(const PreparedTable& table, std::span<const std::size_t> rows, const EvaluationOptions& options,
                      std::uint64_t seed, std::vector<double>& mean_accuracy) {
  std::vector<int> grid = options.c_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.size() == 1) return grid.front();
  const auto y = labels_of(table, rows);
  const auto inner = stratified_folds(y, options.inner_folds, seed);
  mean_accuracy.assign(grid.size(), 0.0);
  std::vector<std::size_t> train, test;
  for (int f = 0; f < options.inner_folds; ++f) {
    split_rows(rows, inner, f, train, test);
    const Split split = binarize_split(table, train, test, options.binarizer);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const ColGenResult r = train_rule_set(split.train, config_for(options, grid[g], seed), options.form);
      mean_accuracy[g] += score(r.ruleset, split.test) / options.inner_folds;
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (mean_accuracy[g] > mean_accuracy[best]) best = g;
  }
  return grid[best];
}

void validate_options(const EvaluationOptions& options) {
  if (options.c_grid.empty()) throw ConfigError("the C grid is empty");
  if (options.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  for (int C : options.c_grid) {
    if (C < 2) throw ConfigError("every C in the grid must be at least 2");
  }
}

}  // namespace

std::vector<FoldOutcome> cross_validate(const PreparedTable& table, const EvaluationOptions& options) {
  validate_options(options);
  if (options.c_grid.size() > 1 && options.inner_folds < 2) throw ConfigError("inner CV needs at least 2 folds");
  const auto rows = all_rows(table);
  const auto fold_of = stratified_folds(table.y, options.folds, options.seed);

  std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(options.folds));
  parallel_for(outcomes.size(), options.jobs, [&](std::size_t f) {
    const auto start = Clock::now();
    const std::uint64_t seed = options.seed + f;
    std::vector<std::size_t> train, test;
    split_rows(rows, fold_of, static_cast<int>(f), train, test);
    FoldOutcome& out = outcomes[f];
    const int C = select_complexity(table, train, options, seed, out.inner_accuracy);
    const Split split = binarize_split(table, train, test, options.binarizer);
    const ColGenResult r = train_rule_set(split.train, config_for(options, C, seed), options.form);

    out.metrics.dataset = options.dataset;
    out.metrics.fold = static_cast<int>(f);
    out.metrics.complexity_bound = C;
    out.metrics.test_accuracy = score(r.ruleset, split.test);
    out.metrics.train_accuracy = score(r.ruleset, split.train);
    out.metrics.complexity = complexity(r.ruleset);
    out.metrics.z_train = r.z_train;
    out.metrics.lower_bound = r.lower_bound;
    out.metrics.seconds =
        options.record_time ? std::chrono::duration<double>(Clock::now() - start).count() : 0.0;
    out.z_rmlp_final = r.z_rmlp_final;
    out.optimal = r.optimal;
  });
  return outcomes;
}

SweepOutcome sweep_cross_validated(const PreparedTable& table, const EvaluationOptions& options) {
  validate_options(options);
  std::vector<int> grid = options.c_grid;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw ConfigError("sweep C values must be strictly increasing");
  }
  const auto rows = all_rows(table);
  const auto fold_of = stratified_folds(table.y, options.folds, options.seed);
  const std::size_t folds = static_cast<std::size_t>(options.folds);

  SweepOutcome outcome;
  outcome.folds.resize(folds * grid.size());
  parallel_for(folds, options.jobs, [&](std::size_t f) {
    const auto start = Clock::now();
    const std::uint64_t seed = options.seed + f;
    std::vector<std::size_t> train, test;
    split_rows(rows, fold_of, static_cast<int>(f), train, test);
    const Split split = binarize_split(table, train, test, options.binarizer);
    const auto points = sweep_complexity(split.train, grid, config_for(options, grid.front(), seed), options.form);
    const double seconds =
        options.record_time ? std::chrono::duration<double>(Clock::now() - start).count() : 0.0;
    for (std::size_t g = 0; g < points.size(); ++g) {
      const ColGenResult& r = points[g].result;
      FoldOutcome& out = outcome.folds[f * grid.size() + g];
      out.metrics.dataset = options.dataset;
      out.metrics.fold = static_cast<int>(f);
      out.metrics.complexity_bound = points[g].complexity_bound;
      out.metrics.test_accuracy = score(r.ruleset, split.test);
      out.metrics.train_accuracy = score(r.ruleset, split.train);
      out.metrics.complexity = complexity(r.ruleset);
      out.metrics.z_train = r.z_train;
      out.metrics.lower_bound = r.lower_bound;
      out.metrics.seconds = seconds;
      out.z_rmlp_final = r.z_rmlp_final;
      out.optimal = r.optimal;
    }
  });

  std::vector<CurvePoint> curve;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> test, train, cx;
    for (std::size_t f = 0; f < folds; ++f) {
      const auto& m = outcome.folds[f * grid.size() + g].metrics;
      test.push_back(m.test_accuracy);
      train.push_back(m.train_accuracy);
      cx.push_back(m.complexity);
    }
    SweepSummary s;
    s.complexity_bound = grid[g];
    s.test_accuracy = mean_stderr(test);
    s.train_accuracy = mean_stderr(train);
    s.complexity = mean_stderr(cx);
    outcome.summary.push_back(s);
    curve.push_back({s.complexity.mean, s.test_accuracy.mean});
  }
  const auto efficient = pareto_efficient(curve);
  for (std::size_t g = 0; g < grid.size(); ++g) outcome.summary[g].pareto = efficient[g];
  return outcome;
}

void write_sweep_csv(const std::vector<SweepSummary>& summary, std::ostream& out) {
  out << "C,test_acc,test_acc_se,train_acc,complexity,complexity_se,pareto\n";
  char buf[256];
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.4f,%.4f,%d\n", s.complexity_bound, s.test_accuracy.mean,
                  s.test_accuracy.stderr_, s.train_accuracy.mean, s.complexity.mean, s.complexity.stderr_,
                  s.pareto ? 1 : 0);
    out << buf;
  }
}

std::vector<int> parse_c_grid(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string token = text.substr(pos, comma - pos);
    const auto value = parse_number(token);
    if (!value || *value != std::floor(*value)) throw ConfigError("invalid C value '" + token + "' in grid");
    out.push_back(static_cast<int>(*value));
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("the C grid is empty");
  return out;
}

}  // namespace rulecg
