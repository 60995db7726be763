#include "rulecg/ruleset.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace rulecg {

Clause::Clause(std::vector<int> features) : features_(std::move(features)) {
  std::sort(features_.begin(), features_.end());
  features_.erase(std::unique(features_.begin(), features_.end()), features_.end());
  if (features_.empty()) throw std::invalid_argument("a clause needs at least one feature");
  if (features_.front() < 0) throw std::invalid_argument("negative feature index");
}

std::size_t ClauseHash::operator()(const Clause& c) const {
  std::size_t h = 1469598103934665603ull;
  for (int f : c.features()) {
    h ^= static_cast<std::size_t>(f) + 0x9e3779b97f4a7c15ull;
    h *= 1099511628211ull;
  }
  return h;
}

bool satisfies(const Clause& clause, std::span<const std::uint8_t> sample) {
  return std::all_of(clause.features().begin(), clause.features().end(),
                     [&](int j) { return sample[static_cast<std::size_t>(j)] != 0; });
}

Bitset coverage(const Clause& clause, const BinaryDataset& ds) {
  Bitset cov(ds.n(), true);
  for (int j : clause.features()) cov &= ds.column(static_cast<std::size_t>(j));
  return cov;
}

std::string_view to_string(RuleForm form) { return form == RuleForm::kDnf ? "dnf" : "cnf"; }

RuleForm rule_form_from_string(std::string_view text) {
  if (text == "dnf" || text == "DNF") return RuleForm::kDnf;
  if (text == "cnf" || text == "CNF") return RuleForm::kCnf;
  throw std::invalid_argument("unknown rule form '" + std::string(text) + "'");
}

RuleSet::RuleSet(std::vector<Clause> clauses, std::vector<FeatureMeta> features, RuleForm form)
    : clauses_(std::move(clauses)), features_(std::move(features)), form_(form) {
  std::sort(clauses_.begin(), clauses_.end());
  clauses_.erase(std::unique(clauses_.begin(), clauses_.end()), clauses_.end());
  for (const auto& c : clauses_) {
    if (static_cast<std::size_t>(c.features().back()) >= features_.size()) {
      throw std::invalid_argument("clause references a feature outside the rule set's feature space");
    }
  }
}

int RuleSet::predict(std::span<const std::uint8_t> sample) const {
  if (form_ == RuleForm::kDnf) {
    return std::any_of(clauses_.begin(), clauses_.end(), [&](const Clause& c) { return satisfies(c, sample); });
  }
  // CNF: AND over clauses of OR over literals.
  return std::all_of(clauses_.begin(), clauses_.end(), [&](const Clause& c) {
    return std::any_of(c.features().begin(), c.features().end(),
                       [&](int j) { return sample[static_cast<std::size_t>(j)] != 0; });
  });
}

std::vector<int> RuleSet::predict(const BinaryDataset& ds) const {
  // Bitset route: DNF = OR of clause coverages.
  Bitset positive(ds.n());
  if (form_ == RuleForm::kDnf) {
    for (const auto& c : clauses_) positive |= coverage(c, ds);
  } else {
    positive.fill(true);
    for (const auto& c : clauses_) {
      Bitset any(ds.n());
      for (int j : c.features()) any |= ds.column(static_cast<std::size_t>(j));
      positive &= any;
    }
  }
  std::vector<int> out(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) out[i] = positive.test(i);
  return out;
}

int RuleSet::predict_raw(std::span<const std::string> row, std::span<const std::size_t> column_of) const {
  std::vector<std::uint8_t> sample(features_.size(), 0);
  std::vector<bool> used(features_.size(), false);
  for (const auto& c : clauses_) {
    for (int j : c.features()) used[static_cast<std::size_t>(j)] = true;
  }
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (used[j]) sample[j] = features_[j].evaluate(row[column_of[j]]);
  }
  return predict(sample);
}

RuleSet RuleSet::compact() const {
  std::map<int, int> remap;
  for (const auto& c : clauses_) {
    for (int j : c.features()) remap.emplace(j, 0);
  }
  std::vector<FeatureMeta> metas;
  for (auto& [old, fresh] : remap) {
    fresh = static_cast<int>(metas.size());
    metas.push_back(features_[static_cast<std::size_t>(old)]);
    metas.back().index = fresh;
  }
  std::vector<Clause> clauses;
  for (const auto& c : clauses_) {
    std::vector<int> f;
    for (int j : c.features()) f.push_back(remap.at(j));
    clauses.emplace_back(std::move(f));
  }
  RuleSet out(std::move(clauses), std::move(metas), form_);
  out.labels = labels;
  out.training = training;
  return out;
}

int hamming_loss(std::span<const Clause> clauses, const BinaryDataset& ds) {
  Bitset covered(ds.n());
  int false_positive_units = 0;
  for (const auto& c : clauses) {
    const Bitset cov = coverage(c, ds);
    covered |= cov;
    false_positive_units += static_cast<int>(cov.count_and(ds.negatives()));
  }
  const int false_negatives = static_cast<int>(ds.n_positive() - covered.count_and(ds.positives()));
  return false_negatives + false_positive_units;
}

int hamming_loss(const RuleSet& rs, const BinaryDataset& ds) {
  if (rs.form() == RuleForm::kDnf) return hamming_loss(rs.clauses(), ds);
  return hamming_loss(rs.clauses(), negate_for_cnf(ds));
}

int complexity(std::span<const Clause> clauses) {
  int total = 0;
  for (const auto& c : clauses) total += c.complexity();
  return total;
}

int complexity(const RuleSet& rs) { return complexity(rs.clauses()); }

double accuracy(std::span<const int> predictions, std::span<const std::uint8_t> labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("accuracy: size mismatch");
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::string render(const RuleSet& rs) {
  const bool dnf = rs.form() == RuleForm::kDnf;
  const std::string label = rs.labels.column.empty() ? "label" : rs.labels.column;
  const std::string positive = rs.labels.positive.empty() ? "1" : rs.labels.positive;
  std::string body;
  if (rs.empty()) {
    body = dnf ? "(false)" : "(true)";
  }
  for (std::size_t k = 0; k < rs.clauses().size(); ++k) {
    if (k > 0) body += dnf ? " OR " : " AND ";
    body += '(';
    const auto& f = rs.clauses()[k].features();
    for (std::size_t l = 0; l < f.size(); ++l) {
      if (l > 0) body += dnf ? " AND " : " OR ";
      body += rs.features()[static_cast<std::size_t>(f[l])].condition();
    }
    body += ')';
  }
  return "IF " + body + " THEN " + label + " = " + positive;
}

nlohmann::json to_json(const RuleSet& rs) {
  using nlohmann::json;
  json clauses = json::array();
  for (const auto& c : rs.clauses()) {
    json lits = json::array();
    for (int j : c.features()) {
      const auto& m = rs.features()[static_cast<std::size_t>(j)];
      json lit{{"column", m.column}, {"kind", to_string(m.kind)}};
      if (m.is_numeric()) {
        lit["value"] = m.threshold;
      } else {
        lit["value"] = m.category;
      }
      lits.push_back(std::move(lit));
    }
    clauses.push_back(std::move(lits));
  }
  json training{{"C", rs.training.complexity_bound},
                {"D", rs.training.clause_bound},
                {"seed", rs.training.seed},
                {"z_train", rs.training.z_train},
                {"complexity", complexity(rs)}};
  training["lower_bound"] = rs.training.lower_bound ? json(*rs.training.lower_bound) : json(nullptr);
  return json{{"format_version", kModelFormatVersion},
              {"form", to_string(rs.form())},
              {"label", {{"column", rs.labels.column}, {"positive", rs.labels.positive}, {"negative", rs.labels.negative}}},
              {"clauses", std::move(clauses)},
              {"training", std::move(training)}};
}

RuleSet rule_set_from_json(const nlohmann::json& doc) {
  const int version = doc.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw std::invalid_argument("unsupported model format_version " + std::to_string(version));
  }
  std::vector<FeatureMeta> metas;
  std::vector<Clause> clauses;
  for (const auto& lits : doc.at("clauses")) {
    std::vector<int> f;
    for (const auto& lit : lits) {
      FeatureMeta m;
      m.column = lit.at("column").get<std::string>();
      m.kind = feature_kind_from_string(lit.at("kind").get<std::string>());
      if (m.is_numeric()) {
        m.threshold = lit.at("value").get<double>();
      } else {
        m.category = lit.at("value").get<std::string>();
      }
      auto it = std::find_if(metas.begin(), metas.end(), [&](const FeatureMeta& o) { return o.same_condition(m); });
      if (it == metas.end()) {
        m.index = static_cast<int>(metas.size());
        metas.push_back(m);
        f.push_back(m.index);
      } else {
        f.push_back(it->index);
      }
    }
    clauses.emplace_back(std::move(f));
  }
  RuleSet rs(std::move(clauses), std::move(metas), rule_form_from_string(doc.at("form").get<std::string>()));
  const auto& label = doc.at("label");
  rs.labels = {label.at("column").get<std::string>(), label.at("positive").get<std::string>(),
               label.at("negative").get<std::string>()};
  const auto& t = doc.at("training");
  rs.training.complexity_bound = t.at("C").get<int>();
  rs.training.clause_bound = t.at("D").get<int>();
  rs.training.seed = t.at("seed").get<std::uint64_t>();
  rs.training.z_train = t.at("z_train").get<int>();
  if (!t.at("lower_bound").is_null()) rs.training.lower_bound = t.at("lower_bound").get<int>();
  return rs;
}

}  // namespace rulecg
