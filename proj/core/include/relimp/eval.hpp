#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relimp/error.hpp"

namespace relimp {

struct ScoredLabel {
  double score = 0;
  bool positive = false;
};

// Mann-Whitney AUC: probability a random positive outscores a random
// negative, ties at half credit (midranks). Needs both classes.
double auc(std::span<const ScoredLabel> data);

struct PrPoint {
  double recall = 0;
  double precision = 0;
};

// One point per distinct score threshold, thresholds descending; a row is
// predicted positive when its score >= threshold. Needs at least one
// positive.
std::vector<PrPoint> pr_curve(std::span<const ScoredLabel> data);

enum class Direction : std::uint8_t { Forward, Backward };

// One labelled rule instance. Relations and arguments stay as strings here;
// resolution against a corpus happens in the scorer.
struct LabelledRule {
  std::string antecedent_subject, antecedent_relation, antecedent_object;
  std::string consequent_subject, consequent_relation, consequent_object;
  bool reversed = false;  // derived from the argument correspondence
  bool positive = false;                 // classification label
  std::optional<Direction> direction;    // directional label
};

// Seven tab-separated columns:
//   ant_subject ant_relation ant_object cons_subject cons_relation
//   cons_object label
// label is 0/1 (directional=false) or forward/backward (directional=true).
// The reversed flag is derived: consequent arguments matching the
// antecedent's in order mean reversed=0, swapped mean reversed=1, anything
// else is an error.
std::vector<LabelledRule> parse_labelled_tsv(std::istream& in,
                                             bool directional);

// Scores a rule instance; forward=false swaps antecedent and consequent.
using RuleScorer = std::function<double(const LabelledRule&, bool forward)>;

// Fraction of rows whose higher-scoring direction matches the label, ties
// at half credit. Every row needs a direction label.
double directional_accuracy(const RuleScorer& scorer,
                            std::span<const LabelledRule> rows);

struct EvalReport {
  std::optional<double> auc_value;
  std::vector<PrPoint> pr_points;
  std::optional<double> directional;
  std::uint64_t rows = 0;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
  std::uint64_t oov_rules = 0;  // rules scored 0 for unknown relations
};

}  // namespace relimp
