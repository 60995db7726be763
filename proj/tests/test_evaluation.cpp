#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "rulecg/evaluation.hpp"

using namespace rulecg;

TEST_SUITE("evaluation") {
  TEST_CASE("stratified folds on 958 samples") {
    const BinaryDataset ds = ingest_csv(fixtures::data_path("tic-tac-toe.csv"), {{"class", std::string("positive")}});
    const auto fold = stratified_folds(ds.labels(), 10, 1);
    const double ratio = static_cast<double>(ds.n_positive()) / static_cast<double>(ds.n());
    for (int f = 0; f < 10; ++f) {
      int size = 0, pos = 0;
      for (std::size_t i = 0; i < ds.n(); ++i) {
        if (fold[i] != f) continue;
        ++size;
        pos += ds.y(i);
      }
      CHECK((size == 95 || size == 96));
      CHECK(std::abs(pos - ratio * size) <= 1.0);
    }
    CHECK(stratified_folds(ds.labels(), 10, 1) == fold);
    CHECK(stratified_folds(ds.labels(), 10, 2) != fold);
  }

  TEST_CASE("a class smaller than the fold count is an error") {
    const std::vector<std::uint8_t> labels{1, 1, 0, 0, 0, 0};
    CHECK_THROWS_AS(stratified_folds(labels, 3, 0), ConfigError);
    CHECK_THROWS_AS(stratified_folds(labels, 1, 0), ConfigError);
    CHECK_NOTHROW(stratified_folds(labels, 2, 0));
  }

  TEST_CASE("mean and standard error") {
    const std::vector<double> v{1, 2, 3, 4};
    const MeanStderr m = mean_stderr(v);
    CHECK(m.mean == doctest::Approx(2.5));
    // Sample variance 5/3.
    CHECK(m.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(mean_stderr(std::vector<double>{7}).stderr_ == 0.0);
  }

  TEST_CASE("Pareto efficiency") {
    const std::vector<CurvePoint> pts{{5, 0.80}, {10, 0.85}, {15, 0.84}, {20, 0.85}, {30, 0.90}};
    CHECK(pareto_efficient(pts) == std::vector<bool>{true, true, false, false, true});
  }

  TEST_CASE("C grid parsing") {
    CHECK(parse_c_grid("5,10,20") == std::vector<int>{5, 10, 20});
    CHECK(parse_c_grid("7") == std::vector<int>{7});
    CHECK_THROWS_AS(parse_c_grid("5,x"), ConfigError);
    CHECK_THROWS_AS(parse_c_grid("2.5"), ConfigError);
    CHECK_THROWS_AS(parse_c_grid(""), ConfigError);
  }

  TEST_CASE("metrics CSV") {
    MetricsRecord r;
    r.dataset = "t";
    r.fold = 3;
    r.complexity_bound = 10;
    r.test_accuracy = 0.5;
    r.train_accuracy = 1.0;
    r.complexity = 4;
    r.z_train = 0;
    r.seconds = 1.25;
    std::ostringstream out;
    write_metrics_csv({r}, out);
    CHECK(out.str() ==
          "dataset,fold,C,test_acc,train_acc,complexity,z_train,lower_bound,seconds\n"
          "t,3,10,0.500000,1.000000,4,0,,1.250\n");
  }

  TEST_CASE("cross-validation on tic-tac-toe is accurate and reproducible") {
    const PreparedTable table =
        prepare_table(read_csv(fixtures::data_path("tic-tac-toe.csv")), {"class", std::string("positive")},
                      MissingPolicy::kDropRow);
    EvaluationOptions options;
    options.folds = 3;
    options.c_grid = {32};
    options.colgen.clause_bound = 3;
    options.colgen.time_limit = 60;
    options.colgen.pricing_time_limit = 20;
    options.record_time = false;
    const auto a = cross_validate(table, options);
    REQUIRE(a.size() == 3);
    for (const auto& f : a) {
      CHECK(f.metrics.test_accuracy > 0.95);
      CHECK(f.metrics.seconds == 0.0);
      CHECK(f.metrics.complexity <= 32);
    }
    const auto b = cross_validate(table, options);
    std::ostringstream sa, sb;
    for (const auto& f : a) write_metrics_row(f.metrics, sa);
    for (const auto& f : b) write_metrics_row(f.metrics, sb);
    CHECK(sa.str() == sb.str());
  }

  TEST_CASE("inner CV picks a grid value and sweeps summarize every C") {
    fixtures::TempFile f("small.csv",
                         "a,b,c,y\n"
                         "1,0,1,1\n1,1,0,1\n0,1,1,0\n0,0,1,0\n1,1,1,1\n0,1,0,0\n1,0,0,1\n0,0,0,0\n"
                         "1,1,0,1\n0,1,1,0\n1,0,1,0\n0,0,1,1\n1,1,1,1\n0,1,0,0\n1,0,0,1\n0,0,0,0\n");
    const PreparedTable table = prepare_table(read_csv(f.path()), {"y", std::nullopt}, MissingPolicy::kDropRow);
    EvaluationOptions options;
    options.folds = 2;
    options.inner_folds = 2;
    options.c_grid = {2, 4};
    options.colgen.time_limit = 10;
    options.colgen.pricing_time_limit = 5;
    const auto cv = cross_validate(table, options);
    REQUIRE(cv.size() == 2);
    for (const auto& fo : cv) {
      CHECK(fo.inner_accuracy.size() == 2);
      CHECK((fo.metrics.complexity_bound == 2 || fo.metrics.complexity_bound == 4));
    }
    const SweepOutcome sw = sweep_cross_validated(table, options);
    CHECK(sw.folds.size() == 4);
    REQUIRE(sw.summary.size() == 2);
    CHECK(sw.summary[0].complexity_bound == 2);
    std::ostringstream out;
    write_sweep_csv(sw.summary, out);
    CHECK(out.str().rfind("C,test_acc,test_acc_se,train_acc,complexity,complexity_se,pareto\n", 0) == 0);
  }
}
