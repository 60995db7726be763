#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "rulecg/dataset.hpp"

using namespace rulecg;

namespace {

// Linear-interpolation quantile at probability p on sorted values.
double interpolated_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<std::string> cells_of(std::initializer_list<const char*> values) {
  return std::vector<std::string>(values.begin(), values.end());
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("deciles of 1..10 give 9 thresholds and 18 columns") {
    std::vector<std::string> cells;
    std::vector<double> values;
    for (int v = 1; v <= 10; ++v) {
      cells.push_back(std::to_string(v));
      values.push_back(v);
    }
    std::set<double> expected;
    for (int k = 1; k <= 9; ++k) expected.insert(interpolated_quantile(values, k / 10.0));
    const auto out = binarize_numeric("x", cells, 9);
    CHECK(expected.size() == 9);
    CHECK(out.columns.size() == 2 * expected.size());
    std::set<double> got;
    for (const auto& f : out.features) got.insert(f.threshold);
    CHECK(got == expected);
  }

  TEST_CASE("thresholds are strictly increasing after collapse") {
    const auto t = quantile_thresholds({1, 1, 1, 2, 2, 3, 3, 3, 3, 3}, 9);
    for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k - 1] < t[k]);
  }

  TEST_CASE("constant numeric column emits nothing") {
    CHECK(binarize_numeric("x", cells_of({"5", "5", "5"})).columns.empty());
  }

  TEST_CASE("threshold comparison") {
    const FeatureMeta leq{"x", FeatureKind::kNumericLeq, 5.0, {}, 0};
    const FeatureMeta gt{"x", FeatureKind::kNumericGt, 5.0, {}, 1};
    CHECK(leq.evaluate("3"));
    CHECK_FALSE(gt.evaluate("3"));
    CHECK(leq.condition() == "x <= 5");
  }

  TEST_CASE("non-numeric cell in a numeric column names row and column") {
    try {
      binarize_numeric("age", cells_of({"1", "two", "3"}));
      FAIL("expected an error");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 2") != std::string::npos);
      CHECK(msg.find("age") != std::string::npos);
    }
  }

  TEST_CASE("three categories give six columns") {
    const auto out = binarize_categorical("cell", cells_of({"x", "o", "b", "x"}));
    CHECK(out.columns.size() == 6);
  }

  TEST_CASE("binary category gives four pairwise complementary columns") {
    const auto out = binarize_categorical("flag", cells_of({"yes", "no", "no", "yes"}));
    REQUIRE(out.columns.size() == 4);
    for (std::size_t f = 0; f < 4; f += 2) {
      for (std::size_t i = 0; i < 4; ++i) CHECK(out.columns[f][i] + out.columns[f + 1][i] == 1);
    }
  }

  TEST_CASE("single-category column is dropped") {
    CHECK(binarize_categorical("c", cells_of({"a", "a"})).columns.empty());
  }

  TEST_CASE("CSV parsing handles quotes and CRLF") {
    std::istringstream in("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\r\n2,\n");
    const RawTable t = parse_csv(in);
    REQUIRE(t.n_rows() == 2);
    CHECK(t.rows[0][0] == "x,1");
    CHECK(t.rows[0][1] == "say \"hi\"");
    CHECK(t.rows[1][1].empty());
  }

  TEST_CASE("ragged CSV is rejected") {
    std::istringstream in("a,b\n1\n");
    CHECK_THROWS_AS(parse_csv(in), DataError);
  }

  TEST_CASE("T1 CSV ingests with two positives and two negatives") {
    fixtures::TempFile f("t1.csv", fixtures::kT1Csv);
    const BinaryDataset ds = ingest_csv(f.path(), {{"y", std::nullopt}});
    CHECK(ds.n() == 4);
    CHECK(ds.n_positive() == 2);
    CHECK(ds.n_negative() == 2);
  }

  TEST_CASE("tic-tac-toe ingests to 958 x 54") {
    const BinaryDataset ds = ingest_csv(fixtures::data_path("tic-tac-toe.csv"), {{"class", std::string("positive")}});
    // 9 board cells, 3 categories each, eq and neq per category.
    CHECK(ds.n() == 958);
    CHECK(ds.d() == 9 * 3 * 2);
  }

  TEST_CASE("missing cell drops the row under drop-row") {
    fixtures::TempFile f("missing.csv", "a,y\n1,1\n?,0\n3,0\n4,1\n");
    CHECK(ingest_csv(f.path(), {{"y", std::nullopt}, MissingPolicy::kDropRow}).n() == 3);
  }

  TEST_CASE("missing categorical cell becomes a category on request") {
    fixtures::TempFile f("missing_cat.csv", "a,y\nr,1\n?,0\ng,0\nr,1\n");
    const BinaryDataset ds = ingest_csv(f.path(), {{"y", std::nullopt}, MissingPolicy::kAsCategory});
    CHECK(ds.n() == 4);
    CHECK(ds.d() == 6);
  }

  TEST_CASE("label errors") {
    fixtures::TempFile f("labels.csv", "a,y\n1,p\n2,q\n3,r\n");
    try {
      ingest_csv(f.path(), {{"target", std::nullopt}});
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("target") != std::string::npos);
    }
    CHECK_THROWS_AS(ingest_csv(f.path(), {{"y", std::nullopt}}), DataError);
    fixtures::TempFile empty("empty_after.csv", "a,y\n?,1\n?,0\n");
    CHECK_THROWS_AS(ingest_csv(empty.path(), {{"y", std::nullopt}}), DataError);
  }

  TEST_CASE("default positive label is the lexicographically larger value") {
    fixtures::TempFile f("lex.csv", "a,y\n1,no\n2,yes\n3,no\n");
    const PreparedTable t = prepare_table(read_csv(f.path()), {"y", std::nullopt}, MissingPolicy::kDropRow);
    CHECK(t.labels.positive == "yes");
    CHECK(t.y == std::vector<std::uint8_t>{0, 1, 0});
  }

  TEST_CASE("negation flips labels and features and is an involution") {
    const BinaryDataset ds = fixtures::t1();
    const BinaryDataset neg = negate_for_cnf(ds);
    CHECK(std::vector<std::uint8_t>(neg.labels().begin(), neg.labels().end()) ==
          std::vector<std::uint8_t>{0, 0, 1, 1});
    for (std::size_t i = 0; i < ds.n(); ++i) {
      for (std::size_t j = 0; j < ds.d(); ++j) CHECK(neg.x(i, j) != ds.x(i, j));
    }
    CHECK(negate_for_cnf(neg) == ds);
  }

  TEST_CASE("complementary pairs stay complementary after negation") {
    const BinaryDataset ds = ingest_csv(fixtures::data_path("tic-tac-toe.csv"), {{"class", std::nullopt}});
    const BinaryDataset neg = negate_for_cnf(ds);
    for (std::size_t j = 0; j + 1 < ds.d(); j += 2) {
      REQUIRE(ds.features()[j].column == ds.features()[j + 1].column);
      CHECK((neg.column(j) | neg.column(j + 1)).count() == ds.n());
      CHECK((neg.column(j) & neg.column(j + 1)).none());
    }
  }

  TEST_CASE("every complementary pair on a mixed table") {
    fixtures::TempFile f("mixed.csv", "n,c,y\n1.5,a,1\n2.5,b,0\n3.5,a,1\n4.5,c,0\n5.5,b,1\n");
    const BinaryDataset ds = ingest_csv(f.path(), {{"y", std::nullopt}});
    REQUIRE(ds.d() % 2 == 0);
    for (std::size_t j = 0; j < ds.d(); j += 2) {
      for (std::size_t i = 0; i < ds.n(); ++i) CHECK((ds.x(i, j) ^ ds.x(i, j + 1)));
    }
  }

  TEST_CASE("ingestion is deterministic") {
    const auto path = fixtures::data_path("heart.csv");
    const IngestOptions o{{"diameter_narrowing", std::nullopt}, MissingPolicy::kAsCategory};
    CHECK(ingest_csv(path, o) == ingest_csv(path, o));
  }

  TEST_CASE("binarizer fitted on training rows is replayed on other rows") {
    fixtures::TempFile f("fit.csv", "v,y\n1,1\n2,0\n3,1\n4,0\n100,1\n");
    const PreparedTable t = prepare_table(read_csv(f.path()), {"y", std::nullopt}, MissingPolicy::kDropRow);
    const std::vector<std::size_t> train{0, 1, 2, 3};
    const std::vector<std::size_t> test{4};
    const Binarizer b = Binarizer::fit(t, train, {});
    for (const auto& meta : b.features()) CHECK(meta.threshold <= 4.0);
    const BinaryDataset test_ds = b.transform(t, test);
    for (std::size_t j = 0; j < test_ds.d(); ++j) {
      CHECK(test_ds.x(0, j) == (b.features()[j].kind == FeatureKind::kNumericGt));
    }
  }

  TEST_CASE("debug export writes descriptor and matrix") {
    const BinaryDataset ds = fixtures::t1();
    std::ostringstream desc, mat;
    write_feature_descriptor(ds, desc);
    write_dense_matrix(ds, mat);
    CHECK(desc.str().find("\"d\": 2") != std::string::npos);
    CHECK(mat.str() == "1 1 1\n1 0 1\n0 1 0\n0 0 0\n");
  }
}
