#include "rulecg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rulecg {

bool is_missing(std::string_view cell) { return cell.empty() || cell == "?"; }

std::optional<double> parse_number(std::string_view cell) {
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.remove_prefix(1);
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.remove_suffix(1);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::size_t> RawTable::column_index(std::string_view name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return c;
  }
  return std::nullopt;
}

namespace {

// Splits one CSV record; returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch = 0;
  ++line;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      break;
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get(ch);
      break;
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) {
    throw DataError("unterminated quoted field starting near line " + std::to_string(line));
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

RawTable parse_csv(std::istream& in) {
  RawTable table;
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!read_record(in, fields, line)) {
    throw DataError("CSV input has no header row");
  }
  for (auto& f : fields) table.columns.push_back(trim(std::move(f)));
  if (!table.columns.empty() && table.columns.front().starts_with("\xEF\xBB\xBF")) {
    table.columns.front().erase(0, 3);
  }
  while (read_record(in, fields, line)) {
    if (fields.size() == 1 && fields.front().empty()) continue;  // blank line
    if (fields.size() != table.columns.size()) {
      throw DataError("line " + std::to_string(line) + ": expected " +
                      std::to_string(table.columns.size()) + " cells, found " +
                      std::to_string(fields.size()));
    }
    std::vector<std::string> row;
    row.reserve(fields.size());
    for (auto& f : fields) row.push_back(trim(std::move(f)));
    table.rows.push_back(std::move(row));
  }
  return table;
}

RawTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in);
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kNumericLeq:
      return "numeric-leq";
    case FeatureKind::kNumericGt:
      return "numeric-gt";
    case FeatureKind::kCategoricalEq:
      return "categorical-eq";
    case FeatureKind::kCategoricalNeq:
      return "categorical-neq";
  }
  return "?";
}

FeatureKind feature_kind_from_string(std::string_view text) {
  if (text == "numeric-leq") return FeatureKind::kNumericLeq;
  if (text == "numeric-gt") return FeatureKind::kNumericGt;
  if (text == "categorical-eq") return FeatureKind::kCategoricalEq;
  if (text == "categorical-neq") return FeatureKind::kCategoricalNeq;
  throw DataError("unknown feature kind '" + std::string(text) + "'");
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc{} ? ptr : buf);
}

bool FeatureMeta::evaluate(std::string_view cell) const {
  switch (kind) {
    case FeatureKind::kNumericLeq:
    case FeatureKind::kNumericGt: {
      if (is_missing(cell)) return false;
      const auto v = parse_number(cell);
      if (!v) {
        throw DataError("non-numeric value '" + std::string(cell) + "' in numeric column '" +
                        column + "'");
      }
      return kind == FeatureKind::kNumericLeq ? *v <= threshold : *v > threshold;
    }
    case FeatureKind::kCategoricalEq:
      return cell == category || (is_missing(cell) && is_missing(category));
    case FeatureKind::kCategoricalNeq:
      return !(cell == category || (is_missing(cell) && is_missing(category)));
  }
  return false;
}

std::string FeatureMeta::condition() const {
  switch (kind) {
    case FeatureKind::kNumericLeq:
      return column + " <= " + format_number(threshold);
    case FeatureKind::kNumericGt:
      return column + " > " + format_number(threshold);
    case FeatureKind::kCategoricalEq:
      return column + " == " + category;
    case FeatureKind::kCategoricalNeq:
      return column + " != " + category;
  }
  return column;
}

bool FeatureMeta::same_condition(const FeatureMeta& other) const {
  if (column != other.column || kind != other.kind) return false;
  return is_numeric() ? threshold == other.threshold : category == other.category;
}

std::vector<double> quantile_thresholds(std::vector<double> values, int quantile_count) {
  if (values.empty()) throw DataError("numeric column has no values");
  if (quantile_count < 1) throw DataError("quantile count must be at least 1");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(quantile_count));
  for (int k = 1; k <= quantile_count; ++k) {
    const double q = static_cast<double>(k) / (quantile_count + 1);
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    out.push_back(values[lo] + frac * (values[hi] - values[lo]));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::vector<std::optional<double>> parse_numeric_cells(const std::string& name,
                                                       std::span<const std::string> cells) {
  std::vector<std::optional<double>> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (is_missing(cells[i])) continue;
    out[i] = parse_number(cells[i]);
    if (!out[i]) {
      throw DataError("row " + std::to_string(i + 1) + ", column '" + name +
                      "': non-numeric value '" + cells[i] + "'");
    }
  }
  return out;
}

// Threshold pairs that split the given values (both sides nonconstant).
std::vector<FeatureMeta> numeric_features(const std::string& name,
                                          std::span<const std::optional<double>> values,
                                          int quantile_count) {
  std::vector<double> present;
  for (const auto& v : values) {
    if (v) present.push_back(*v);
  }
  if (present.empty()) return {};
  std::vector<FeatureMeta> out;
  for (double t : quantile_thresholds(present, quantile_count)) {
    bool any_leq = false;
    bool any_gt = false;
    for (double v : present) {
      (v <= t ? any_leq : any_gt) = true;
    }
    // Missing cells are 0 on both sides, so a pair is informative only when
    // each side holds for some sample.
    if (!any_leq || !any_gt) continue;
    out.push_back({name, FeatureKind::kNumericLeq, t, {}, -1});
    out.push_back({name, FeatureKind::kNumericGt, t, {}, -1});
  }
  return out;
}

std::vector<FeatureMeta> categorical_features(const std::string& name,
                                              std::span<const std::string> cells) {
  std::set<std::string> categories(cells.begin(), cells.end());
  if (categories.size() < 2) return {};
  std::vector<FeatureMeta> out;
  for (const auto& c : categories) {
    out.push_back({name, FeatureKind::kCategoricalEq, 0.0, c, -1});
    out.push_back({name, FeatureKind::kCategoricalNeq, 0.0, c, -1});
  }
  return out;
}

}  // namespace

BinarizedColumns binarize_numeric(const std::string& name, std::span<const std::string> cells,
                                  int quantile_count) {
  const auto values = parse_numeric_cells(name, cells);
  BinarizedColumns out;
  out.features = numeric_features(name, values, quantile_count);
  for (std::size_t f = 0; f < out.features.size(); ++f) {
    out.features[f].index = static_cast<int>(f);
    std::vector<std::uint8_t> col(cells.size(), 0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!values[i]) continue;
      const double t = out.features[f].threshold;
      col[i] = out.features[f].kind == FeatureKind::kNumericLeq ? *values[i] <= t : *values[i] > t;
    }
    out.columns.push_back(std::move(col));
  }
  return out;
}

BinarizedColumns binarize_categorical(const std::string& name, std::span<const std::string> cells) {
  BinarizedColumns out;
  out.features = categorical_features(name, cells);
  for (std::size_t f = 0; f < out.features.size(); ++f) {
    out.features[f].index = static_cast<int>(f);
    std::vector<std::uint8_t> col(cells.size(), 0);
    for (std::size_t i = 0; i < cells.size(); ++i) col[i] = out.features[f].evaluate(cells[i]);
    out.columns.push_back(std::move(col));
  }
  return out;
}

BinaryDataset::BinaryDataset(std::vector<Bitset> columns, std::vector<std::uint8_t> labels,
                             std::vector<FeatureMeta> features)
    : columns_(std::move(columns)), labels_(std::move(labels)), features_(std::move(features)) {
  if (features_.size() != columns_.size()) {
    throw std::invalid_argument("feature meta count does not match column count");
  }
  positives_ = Bitset(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] > 1) throw std::invalid_argument("labels must be 0 or 1");
    positives_.set(i, labels_[i] == 1);
  }
  negatives_ = ~positives_;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].size() != labels_.size()) {
      throw std::invalid_argument("column length does not match sample count");
    }
    features_[j].index = static_cast<int>(j);
  }
}

BinaryDataset BinaryDataset::from_rows(const std::vector<std::vector<int>>& rows,
                                       const std::vector<int>& labels) {
  if (rows.size() != labels.size()) throw std::invalid_argument("rows/labels size mismatch");
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  std::vector<Bitset> cols(d, Bitset(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw std::invalid_argument("ragged rows");
    for (std::size_t j = 0; j < d; ++j) cols[j].set(i, rows[i][j] != 0);
  }
  std::vector<FeatureMeta> metas;
  for (std::size_t j = 0; j < d; ++j) {
    metas.push_back({"X" + std::to_string(j + 1), FeatureKind::kCategoricalEq, 0.0, "1",
                     static_cast<int>(j)});
  }
  std::vector<std::uint8_t> y(labels.begin(), labels.end());
  return BinaryDataset(std::move(cols), std::move(y), std::move(metas));
}

std::vector<int> BinaryDataset::zero_features(std::size_t i) const {
  std::vector<int> out;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (!columns_[j].test(i)) out.push_back(static_cast<int>(j));
  }
  return out;
}

std::vector<std::uint8_t> BinaryDataset::row(std::size_t i) const {
  std::vector<std::uint8_t> out(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) out[j] = columns_[j].test(i);
  return out;
}

std::size_t BinaryDataset::zero_count() const {
  std::size_t ones = 0;
  for (const auto& c : columns_) ones += c.count();
  return n() * d() - ones;
}

BinaryDataset BinaryDataset::subset_samples(std::span<const std::size_t> rows) const {
  std::vector<Bitset> cols(columns_.size(), Bitset(rows.size()));
  std::vector<std::uint8_t> y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    y[r] = labels_[rows[r]];
    for (std::size_t j = 0; j < columns_.size(); ++j) cols[j].set(r, columns_[j].test(rows[r]));
  }
  return BinaryDataset(std::move(cols), std::move(y), features_);
}

BinaryDataset BinaryDataset::subset_features(std::span<const std::size_t> features) const {
  std::vector<Bitset> cols;
  std::vector<FeatureMeta> metas;
  for (std::size_t j : features) {
    cols.push_back(columns_[j]);
    metas.push_back(features_[j]);
  }
  return BinaryDataset(std::move(cols), labels_, std::move(metas));
}

BinaryDataset negate_for_cnf(const BinaryDataset& ds) {
  std::vector<Bitset> cols;
  cols.reserve(ds.d());
  for (const auto& c : ds.columns()) cols.push_back(~c);
  std::vector<std::uint8_t> y(ds.labels().begin(), ds.labels().end());
  for (auto& v : y) v = 1 - v;
  return BinaryDataset(std::move(cols), std::move(y), ds.features());
}

PreparedTable prepare_table(RawTable table, const LabelOptions& label, MissingPolicy policy) {
  PreparedTable out;
  const auto label_index = table.column_index(label.column);
  if (!label_index) {
    std::string names;
    for (const auto& c : table.columns) names += (names.empty() ? "" : ", ") + c;
    throw DataError("unknown label column '" + label.column + "' (columns: " + names + ")");
  }
  out.label_index = *label_index;

  const std::size_t cols = table.n_cols();
  out.types.assign(cols, ColumnType::kNumeric);
  for (std::size_t c = 0; c < cols; ++c) {
    bool any = false;
    for (const auto& row : table.rows) {
      if (is_missing(row[c])) continue;
      any = true;
      if (!parse_number(row[c])) {
        out.types[c] = ColumnType::kCategorical;
        break;
      }
    }
    if (!any) out.types[c] = ColumnType::kCategorical;
  }

  std::vector<std::vector<std::string>> kept;
  kept.reserve(table.rows.size());
  for (auto& row : table.rows) {
    bool drop = is_missing(row[out.label_index]);
    for (std::size_t c = 0; c < cols && !drop; ++c) {
      if (c == out.label_index || !is_missing(row[c])) continue;
      if (policy == MissingPolicy::kDropRow || out.types[c] == ColumnType::kNumeric) {
        drop = true;
      } else {
        row[c] = "?";
      }
    }
    if (drop) {
      ++out.dropped_rows;
    } else {
      kept.push_back(std::move(row));
    }
  }
  table.rows = std::move(kept);
  if (table.rows.empty()) throw DataError("dataset is empty after dropping rows with missing values");

  std::set<std::string> values;
  for (const auto& row : table.rows) values.insert(row[out.label_index]);
  if (values.size() != 2) {
    throw DataError("label column '" + label.column + "' must have exactly 2 distinct values, found " +
                    std::to_string(values.size()));
  }
  out.labels.column = label.column;
  if (label.positive) {
    if (!values.contains(*label.positive)) {
      throw DataError("positive label '" + *label.positive + "' does not occur in column '" +
                      label.column + "'");
    }
    out.labels.positive = *label.positive;
  } else {
    out.labels.positive = *values.rbegin();
  }
  for (const auto& v : values) {
    if (v != out.labels.positive) out.labels.negative = v;
  }
  out.y.reserve(table.rows.size());
  for (const auto& row : table.rows) out.y.push_back(row[out.label_index] == out.labels.positive);
  out.table = std::move(table);
  return out;
}

std::vector<std::size_t> all_rows(const PreparedTable& table) {
  std::vector<std::size_t> rows(table.table.n_rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

Binarizer Binarizer::fit(const PreparedTable& table, std::span<const std::size_t> rows,
                         const BinarizerOptions& options) {
  Binarizer b;
  for (std::size_t c = 0; c < table.table.n_cols(); ++c) {
    if (c == table.label_index) continue;
    const auto& name = table.table.columns[c];
    std::vector<std::string> cells;
    cells.reserve(rows.size());
    for (std::size_t r : rows) cells.push_back(table.table.rows[r][c]);
    std::vector<FeatureMeta> metas;
    if (table.types[c] == ColumnType::kNumeric) {
      metas = numeric_features(name, parse_numeric_cells(name, cells), options.quantile_count);
      if (metas.empty()) b.warnings_.push_back("column '" + name + "' is constant; dropped");
    } else {
      metas = categorical_features(name, cells);
      if (metas.empty()) b.warnings_.push_back("column '" + name + "' has a single category; dropped");
    }
    for (auto& m : metas) {
      m.index = static_cast<int>(b.features_.size());
      b.features_.push_back(std::move(m));
      b.source_columns_.push_back(c);
    }
  }
  return b;
}

BinaryDataset Binarizer::transform(const PreparedTable& table, std::span<const std::size_t> rows) const {
  std::vector<Bitset> cols(features_.size(), Bitset(rows.size()));
  std::vector<std::uint8_t> y(rows.size());
  // Numeric cells are parsed once per raw column.
  std::map<std::size_t, std::vector<std::optional<double>>> parsed;
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const auto& meta = features_[f];
    const std::size_t c = source_columns_[f];
    if (meta.is_numeric()) {
      auto it = parsed.find(c);
      if (it == parsed.end()) {
        std::vector<std::string> cells;
        cells.reserve(rows.size());
        for (std::size_t r : rows) cells.push_back(table.table.rows[r][c]);
        it = parsed.emplace(c, parse_numeric_cells(meta.column, cells)).first;
      }
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& v = it->second[k];
        if (!v) continue;
        cols[f].set(k, meta.kind == FeatureKind::kNumericLeq ? *v <= meta.threshold : *v > meta.threshold);
      }
    } else {
      for (std::size_t k = 0; k < rows.size(); ++k) {
        cols[f].set(k, meta.evaluate(table.table.rows[rows[k]][c]));
      }
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) y[k] = table.y[rows[k]];
  return BinaryDataset(std::move(cols), std::move(y), features_);
}

BinaryDataset ingest_csv(const std::string& path, const IngestOptions& options) {
  const PreparedTable table = prepare_table(read_csv(path), options.label, options.missing);
  const auto rows = all_rows(table);
  const Binarizer b = Binarizer::fit(table, rows, options.binarizer);
  return b.transform(table, rows);
}

void write_feature_descriptor(const BinaryDataset& ds, std::ostream& out) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : ds.features()) {
    nlohmann::json j{{"index", f.index}, {"column", f.column}, {"kind", to_string(f.kind)}};
    if (f.is_numeric()) {
      j["value"] = f.threshold;
    } else {
      j["value"] = f.category;
    }
    features.push_back(std::move(j));
  }
  nlohmann::json doc{{"n", ds.n()}, {"d", ds.d()}, {"features", std::move(features)}};
  out << doc.dump(2) << '\n';
}

void write_dense_matrix(const BinaryDataset& ds, std::ostream& out) {
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j < ds.d(); ++j) out << (ds.x(i, j) ? '1' : '0') << ' ';
    out << ds.y(i) << '\n';
  }
}

}  // namespace rulecg
