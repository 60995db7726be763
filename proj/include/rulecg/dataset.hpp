#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rulecg/bitset.hpp"
#include "rulecg/errors.hpp"

namespace rulecg {

// "" and "?" are missing.
bool is_missing(std::string_view cell);
std::optional<double> parse_number(std::string_view cell);

struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return columns.size(); }
  std::optional<std::size_t> column_index(std::string_view name) const;
};

// RFC-4180 reader: quoted fields, doubled quotes, CRLF tolerated.
RawTable parse_csv(std::istream& in);
RawTable read_csv(const std::string& path);

enum class FeatureKind { kNumericLeq, kNumericGt, kCategoricalEq, kCategoricalNeq };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view text);

// One binary column and the condition on a raw column that produced it.
struct FeatureMeta {
  std::string column;
  FeatureKind kind = FeatureKind::kNumericLeq;
  double threshold = 0.0;  // numeric kinds
  std::string category;    // categorical kinds
  int index = -1;          // position in the binary matrix

  bool is_numeric() const {
    return kind == FeatureKind::kNumericLeq || kind == FeatureKind::kNumericGt;
  }
  // Evaluates the condition on a raw cell. Missing numeric cells satisfy
  // neither side of a threshold; unseen categories satisfy only "!=".
  bool evaluate(std::string_view cell) const;
  // "age <= 54.5", "odor != n"
  std::string condition() const;
  // Same condition without the index.
  bool same_condition(const FeatureMeta& other) const;
};

std::string format_number(double value);

// Paired binary columns from one raw column.
struct BinarizedColumns {
  std::vector<std::vector<std::uint8_t>> columns;
  std::vector<FeatureMeta> features;
};

// Interpolated empirical quantiles at k/(count+1), k = 1..count, sorted and
// with duplicates removed.
std::vector<double> quantile_thresholds(std::vector<double> values, int quantile_count);

// Emits [x <= t], [x > t] for every distinct quantile threshold t; pairs where
// either side is constant are dropped. Cells must be numeric (missing cells
// evaluate to 0 on both sides).
BinarizedColumns binarize_numeric(const std::string& name, std::span<const std::string> cells,
                                  int quantile_count = 9);

// Emits [x == v], [x != v] for every category v in sorted order. A column with
// fewer than two categories yields nothing.
BinarizedColumns binarize_categorical(const std::string& name, std::span<const std::string> cells);

class BinaryDataset {
 public:
  BinaryDataset() = default;
  // columns[j] holds the samples with x_ij = 1.
  BinaryDataset(std::vector<Bitset> columns, std::vector<std::uint8_t> labels,
                std::vector<FeatureMeta> features);
  // Row-major convenience constructor; feature metas get placeholder names
  // X1..Xd (categorical-eq on "1").
  static BinaryDataset from_rows(const std::vector<std::vector<int>>& rows,
                                 const std::vector<int>& labels);

  std::size_t n() const { return labels_.size(); }
  std::size_t d() const { return columns_.size(); }

  bool x(std::size_t i, std::size_t j) const { return columns_[j].test(i); }
  int y(std::size_t i) const { return labels_[i]; }
  std::span<const std::uint8_t> labels() const { return labels_; }

  const Bitset& column(std::size_t j) const { return columns_[j]; }
  std::span<const Bitset> columns() const { return columns_; }
  const Bitset& positives() const { return positives_; }
  const Bitset& negatives() const { return negatives_; }
  std::size_t n_positive() const { return positives_.count(); }
  std::size_t n_negative() const { return negatives_.count(); }

  const std::vector<FeatureMeta>& features() const { return features_; }

  // S_i = {j : x_ij = 0}
  std::vector<int> zero_features(std::size_t i) const;
  std::vector<std::uint8_t> row(std::size_t i) const;
  // Sum over samples of |S_i|.
  std::size_t zero_count() const;

  BinaryDataset subset_samples(std::span<const std::size_t> rows) const;
  BinaryDataset subset_features(std::span<const std::size_t> features) const;

  friend bool operator==(const BinaryDataset& a, const BinaryDataset& b) {
    return a.columns_ == b.columns_ && a.labels_ == b.labels_;
  }

 private:
  std::vector<Bitset> columns_;
  std::vector<std::uint8_t> labels_;
  std::vector<FeatureMeta> features_;
  Bitset positives_;
  Bitset negatives_;
};

// y' = 1 - y and x' = 1 - x. Feature metas are kept as-is: feature j of the
// negated dataset is the negation of the original condition j.
BinaryDataset negate_for_cnf(const BinaryDataset& ds);

enum class MissingPolicy { kDropRow, kAsCategory };
enum class ColumnType { kNumeric, kCategorical };

struct LabelMapping {
  std::string column;
  std::string positive;
  std::string negative;
};

struct LabelOptions {
  std::string column;
  std::optional<std::string> positive;  // default: lexicographically larger value
};

// Raw table after missing-value handling, type inference and label mapping.
struct PreparedTable {
  RawTable table;
  std::size_t label_index = 0;
  LabelMapping labels;
  std::vector<ColumnType> types;  // per raw column; label column ignored
  std::vector<std::uint8_t> y;
  std::size_t dropped_rows = 0;
};

PreparedTable prepare_table(RawTable table, const LabelOptions& label, MissingPolicy policy);

struct BinarizerOptions {
  int quantile_count = 9;
};

// Binarization fitted on a set of training rows and replayed verbatim on any
// other rows (test folds, prediction inputs).
class Binarizer {
 public:
  static Binarizer fit(const PreparedTable& table, std::span<const std::size_t> rows,
                       const BinarizerOptions& options = {});
  BinaryDataset transform(const PreparedTable& table, std::span<const std::size_t> rows) const;

  const std::vector<FeatureMeta>& features() const { return features_; }
  std::vector<std::string> warnings() const { return warnings_; }

 private:
  std::vector<FeatureMeta> features_;
  std::vector<std::size_t> source_columns_;  // raw column per feature
  std::vector<std::string> warnings_;
};

std::vector<std::size_t> all_rows(const PreparedTable& table);

struct IngestOptions {
  LabelOptions label;
  MissingPolicy missing = MissingPolicy::kDropRow;
  BinarizerOptions binarizer;
};

BinaryDataset ingest_csv(const std::string& path, const IngestOptions& options);

// Debug export: JSON descriptor of feature metas and a dense 0/1 matrix
// (label in the last column).
void write_feature_descriptor(const BinaryDataset& ds, std::ostream& out);
void write_dense_matrix(const BinaryDataset& ds, std::ostream& out);

}  // namespace rulecg
