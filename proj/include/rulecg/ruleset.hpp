#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rulecg/bitset.hpp"
#include "rulecg/dataset.hpp"

namespace rulecg {

// A conjunction of binary features, kept sorted and duplicate-free.
class Clause {
 public:
  Clause() = default;
  // Throws std::invalid_argument on an empty feature list.
  explicit Clause(std::vector<int> features);

  const std::vector<int>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  // 1 + number of literals
  int complexity() const { return 1 + static_cast<int>(features_.size()); }

  friend bool operator==(const Clause&, const Clause&) = default;
  friend auto operator<=>(const Clause& a, const Clause& b) {
    if (a.features_.size() != b.features_.size()) return a.features_.size() <=> b.features_.size();
    return a.features_ <=> b.features_;
  }

 private:
  std::vector<int> features_;
};

struct ClauseHash {
  std::size_t operator()(const Clause& c) const;
};

bool satisfies(const Clause& clause, std::span<const std::uint8_t> sample);
// Samples of ds satisfying the clause (AND of feature columns).
Bitset coverage(const Clause& clause, const BinaryDataset& ds);

enum class RuleForm { kDnf, kCnf };
std::string_view to_string(RuleForm form);
RuleForm rule_form_from_string(std::string_view text);

struct TrainingInfo {
  int complexity_bound = 0;
  int clause_bound = 0;
  std::uint64_t seed = 0;
  int z_train = 0;
  std::optional<int> lower_bound;
};

// Learned model. Clauses index into `features`. A CNF model is stored as the
// DNF learned on the negated problem: clause k is an OR of its conditions
// and the prediction is the AND over clauses, i.e. 1 - DNF(1 - x).
class RuleSet {
 public:
  RuleSet() = default;
  RuleSet(std::vector<Clause> clauses, std::vector<FeatureMeta> features, RuleForm form = RuleForm::kDnf);

  const std::vector<Clause>& clauses() const { return clauses_; }
  const std::vector<FeatureMeta>& features() const { return features_; }
  RuleForm form() const { return form_; }
  bool empty() const { return clauses_.empty(); }

  LabelMapping labels;
  TrainingInfo training;

  // Prediction on a binarized sample over the same feature space.
  int predict(std::span<const std::uint8_t> sample) const;
  std::vector<int> predict(const BinaryDataset& ds) const;
  // Prediction on raw cells, evaluating the stored conditions directly.
  // column_of maps each feature to a raw cell position.
  int predict_raw(std::span<const std::string> row, std::span<const std::size_t> column_of) const;

  // Keeps only the features used by clauses and reindexes them.
  RuleSet compact() const;

 private:
  std::vector<Clause> clauses_;
  std::vector<FeatureMeta> features_;
  RuleForm form_ = RuleForm::kDnf;
};

// For DNF over (X, y): sum over positives of [uncovered] plus, over
// negatives, the number of covering clauses. For a CNF model the loss is
// that of its underlying DNF on the negated data.
int hamming_loss(const RuleSet& rs, const BinaryDataset& ds);
int hamming_loss(std::span<const Clause> clauses, const BinaryDataset& ds);
int complexity(const RuleSet& rs);
int complexity(std::span<const Clause> clauses);
double accuracy(std::span<const int> predictions, std::span<const std::uint8_t> labels);

// "IF (a <= 5 AND b == x) OR (c > 2) THEN label = 1"; CNF renders as an AND
// of OR-groups.
std::string render(const RuleSet& rs);

inline constexpr int kModelFormatVersion = 1;
nlohmann::json to_json(const RuleSet& rs);
RuleSet rule_set_from_json(const nlohmann::json& doc);

}  // namespace rulecg
