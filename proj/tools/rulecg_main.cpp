#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rulecg/colgen.hpp"
#include "rulecg/dataset.hpp"
#include "rulecg/evaluation.hpp"
#include "rulecg/ruleset.hpp"

namespace {

using namespace rulecg;

constexpr std::uint64_t kDefaultSeed = 20181203;

struct Options {
  std::string input;
  std::string label_column;
  std::optional<std::string> positive_label;
  std::string form = "dnf";
  int complexity_bound = 0;
  int clause_bound = 0;
  int kappa = 5;
  std::optional<double> time_limit;
  std::optional<double> pricing_time_limit;
  int folds = 10;
  int inner_folds = 3;
  std::string c_grid;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
  std::string output;
  std::string metrics;
  std::string trace;
  std::string rules;
  std::string model;
  std::string missing = "drop";
  int quantiles = 9;
  bool no_timing = false;
};

void add_data_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input, "CSV file with a header row")->required();
  cmd->add_option("--label-column", o.label_column, "Name of the binary label column")->required();
  cmd->add_option("--positive-label", o.positive_label, "Label value mapped to 1 (default: larger value)");
  cmd->add_option("--missing", o.missing, "Missing-value policy")->check(CLI::IsMember({"drop", "category"}));
  cmd->add_option("--quantiles", o.quantiles, "Thresholds per numeric column")->check(CLI::PositiveNumber);
}

void add_learning_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--form", o.form, "Rule form")->check(CLI::IsMember({"dnf", "cnf"}));
  cmd->add_option("--clause-bound", o.clause_bound, "Maximum literals per clause D (default C - 1)");
  cmd->add_option("--kappa", o.kappa, "Maximum clause size explored by the greedy heuristic");
  cmd->add_option("--time-limit", o.time_limit, "Seconds per training run");
  cmd->add_option("--pricing-time-limit", o.pricing_time_limit, "Seconds per pricing round");
  cmd->add_option("--seed", o.seed, "Random seed");
}

void add_cv_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--folds", o.folds, "Outer cross-validation folds");
  cmd->add_option("--c-grid", o.c_grid, "Comma-separated complexity bounds")->required();
  cmd->add_option("--jobs", o.jobs, "Folds run concurrently (1 is reproducible)")->check(CLI::PositiveNumber);
  cmd->add_option("--metrics", o.metrics, "Per-fold metrics CSV");
  cmd->add_flag("--no-timing", o.no_timing, "Write 0 in the seconds column");
}

PreparedTable load_table(const Options& o) {
  const MissingPolicy policy = o.missing == "category" ? MissingPolicy::kAsCategory : MissingPolicy::kDropRow;
  return prepare_table(read_csv(o.input), LabelOptions{o.label_column, o.positive_label}, policy);
}

ColGenConfig colgen_config(const Options& o, double default_time, double default_pricing) {
  ColGenConfig cfg;
  cfg.complexity_bound = o.complexity_bound;
  cfg.clause_bound = o.clause_bound;
  cfg.kappa = o.kappa;
  cfg.time_limit = o.time_limit.value_or(default_time);
  cfg.pricing_time_limit = o.pricing_time_limit.value_or(default_pricing);
  cfg.seed = o.seed;
  return cfg;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

std::string dataset_tag(const std::string& path) {
  const auto slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.rfind('.');
  return dot == std::string::npos || dot == 0 ? name : name.substr(0, dot);
}

int cmd_train(const Options& o) {
  const PreparedTable table = load_table(o);
  const auto rows = all_rows(table);
  const Binarizer binarizer = Binarizer::fit(table, rows, BinarizerOptions{o.quantiles});
  for (const auto& w : binarizer.warnings()) std::cerr << "warning: " << w << '\n';
  const BinaryDataset ds = binarizer.transform(table, rows);
  const ColGenConfig cfg = colgen_config(o, 300.0, 45.0);
  const ColGenResult r = train_rule_set(ds, cfg, rule_form_from_string(o.form));

  RuleSet model = r.ruleset.compact();
  model.labels = table.labels;
  const double train_acc = accuracy(r.ruleset.predict(ds), ds.labels());
  if (!o.output.empty()) open_output(o.output) << to_json(model).dump(2) << '\n';
  if (!o.trace.empty()) {
    auto out = open_output(o.trace);
    write_trace_csv(r.trace, out);
  }
  const std::string rendered = render(model);
  if (!o.rules.empty()) open_output(o.rules) << rendered << '\n';

  std::cout << rendered << '\n';
  std::printf("samples=%zu features=%zu clauses=%zu complexity=%d z_train=%d lower_bound=%s optimal=%s "
              "train_acc=%.4f iterations=%zu\n",
              ds.n(), ds.d(), model.clauses().size(), complexity(model), r.z_train,
              r.lower_bound ? std::to_string(*r.lower_bound).c_str() : "none", r.optimal ? "yes" : "no", train_acc,
              r.trace.size());
  return 0;
}

int cmd_predict(const Options& o) {
  std::ifstream in(o.model);
  if (!in) throw DataError("cannot read model " + o.model);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model file " + o.model + ": " + e.what());
  }
  const RuleSet model = rule_set_from_json(doc);
  const RawTable table = read_csv(o.input);

  std::vector<std::size_t> column_of;
  std::string missing;
  for (const auto& f : model.features()) {
    const auto idx = table.column_index(f.column);
    if (!idx) {
      missing += (missing.empty() ? "" : ", ") + f.column;
      column_of.push_back(0);
    } else {
      column_of.push_back(*idx);
    }
  }
  if (!missing.empty()) {
    std::string available;
    for (const auto& c : table.columns) available += (available.empty() ? "" : ", ") + c;
    throw DataError("input lacks model column(s) " + missing + "; available columns: " + available);
  }

  std::ostringstream buffer;
  for (const auto& row : table.rows) {
    buffer << (model.predict_raw(row, column_of) ? model.labels.positive : model.labels.negative) << '\n';
  }
  if (o.output.empty()) {
    std::cout << buffer.str();
  } else {
    open_output(o.output) << buffer.str();
  }
  return 0;
}

EvaluationOptions evaluation_options(const Options& o) {
  EvaluationOptions e;
  e.dataset = dataset_tag(o.input);
  e.folds = o.folds;
  e.inner_folds = o.inner_folds;
  e.c_grid = parse_c_grid(o.c_grid);
  e.colgen = colgen_config(o, 120.0, 30.0);
  e.colgen.complexity_bound = e.c_grid.front();
  e.colgen.validate();
  e.form = rule_form_from_string(o.form);
  e.binarizer.quantile_count = o.quantiles;
  e.seed = o.seed;
  e.jobs = o.jobs;
  e.record_time = !o.no_timing;
  return e;
}

void print_summary(const char* label, const std::vector<double>& values, double scale) {
  const MeanStderr m = mean_stderr(values);
  std::printf("%s %.2f (%.2f)\n", label, scale * m.mean, scale * m.stderr_);
}

int cmd_cv(const Options& o) {
  const PreparedTable table = load_table(o);
  const EvaluationOptions e = evaluation_options(o);
  const auto outcomes = cross_validate(table, e);

  std::vector<MetricsRecord> records;
  std::vector<double> test, cx;
  for (const auto& f : outcomes) {
    records.push_back(f.metrics);
    test.push_back(f.metrics.test_accuracy);
    cx.push_back(f.metrics.complexity);
  }
  if (!o.metrics.empty()) {
    auto out = open_output(o.metrics);
    write_metrics_csv(records, out);
  } else {
    write_metrics_csv(records, std::cout);
  }
  print_summary("test accuracy % (stderr):", test, 100.0);
  print_summary("complexity (stderr):", cx, 1.0);
  return 0;
}

int cmd_sweep(const Options& o) {
  const PreparedTable table = load_table(o);
  const EvaluationOptions e = evaluation_options(o);
  const SweepOutcome outcome = sweep_cross_validated(table, e);

  if (!o.metrics.empty()) {
    std::vector<MetricsRecord> records;
    for (const auto& f : outcome.folds) records.push_back(f.metrics);
    auto out = open_output(o.metrics);
    write_metrics_csv(records, out);
  }
  if (!o.output.empty()) {
    auto out = open_output(o.output);
    write_sweep_csv(outcome.summary, out);
  }
  write_sweep_csv(outcome.summary, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boolean rule set learning by column generation"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "Learn a rule set on a CSV file");
  add_data_options(train, o);
  add_learning_options(train, o);
  train->add_option("--complexity-bound", o.complexity_bound, "Complexity budget C")->required();
  train->add_option("--output", o.output, "Model JSON");
  train->add_option("--trace", o.trace, "Iteration trace CSV");
  train->add_option("--rules", o.rules, "Rendered rules text");

  auto* predict = app.add_subcommand("predict", "Apply a model to a CSV file");
  predict->add_option("--model", o.model, "Model JSON")->required();
  predict->add_option("--input", o.input, "CSV file with a header row")->required();
  predict->add_option("--output", o.output, "Predictions, one label per line (default stdout)");

  auto* cv = app.add_subcommand("cv", "Nested stratified cross-validation");
  add_data_options(cv, o);
  add_learning_options(cv, o);
  add_cv_options(cv, o);
  cv->add_option("--inner-folds", o.inner_folds, "Inner folds used to pick C from the grid");

  auto* sweep = app.add_subcommand("sweep", "Cross-validated sweep over complexity bounds");
  add_data_options(sweep, o);
  add_learning_options(sweep, o);
  add_cv_options(sweep, o);
  sweep->add_option("--output", o.output, "Per-C summary CSV with Pareto flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(o);
    if (*predict) return cmd_predict(o);
    if (*cv) return cmd_cv(o);
    if (*sweep) return cmd_sweep(o);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
