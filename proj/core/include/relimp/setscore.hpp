#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "relimp/corpus.hpp"

namespace relimp {

enum class WeightScheme : std::uint8_t { Unit, Pmi };

// How a relation's observed tuples are turned into feature sets:
//   ArgumentTuple: one set, F_r = T_r.
//   SlotIndependent: subject-slot and object-slot sets, compared slotwise.
//   Unary: both slot sets of p compared against both slot sets of q
//          (four comparisons).
// Multi-slot scores combine by geometric mean.
enum class FeatureRep : std::uint8_t { ArgumentTuple, SlotIndependent, Unary };

// Directed rule "antecedent implies consequent". When reversed is set the
// consequent's arguments are flipped, i.e. the consequent is replaced by its
// synthetic @rev relation; the corpus must be reversal-augmented.
struct ImplicationRule {
  RelationId antecedent = 0;
  RelationId consequent = 0;
  bool reversed = false;
};

// Resolves the reversed flag to a concrete relation id.
RelationId effective_consequent(const Corpus& corpus, const ImplicationRule& rule);

struct ScoreDiagnostics {
  // Slot scores forced back into [0, 1] (negative weight mass under Pmi).
  std::uint64_t clamped_slots = 0;
};

// Shared-feature implication measures.
//
//   dirt(p -> q)  = sum_{f in Fp^Fq} (w_p(f) + w_q(f))
//                 / (sum_{Fp} w_p(f) + sum_{Fq} w_q(f))      (symmetric)
//   cover(p -> q) = sum_{f in Fp^Fq} w_p(f) / sum_{Fp} w_p(f) (directional)
//   binc(p -> q)  = sqrt(dirt * cover)
//
// Unit weights give scores in [0, 1] by construction. Pmi weights can go
// negative; slot scores outside [0, 1] are clamped and counted.
class SetScorer {
 public:
  SetScorer(const Corpus& corpus, WeightScheme scheme, FeatureRep rep);

  double dirt(const ImplicationRule& rule);
  double cover(const ImplicationRule& rule);
  double binc(const ImplicationRule& rule);

  const ScoreDiagnostics& diagnostics() const { return diag_; }

 private:
  enum class Slot : std::uint8_t { TupleSlot, Subject, Object };
  struct SlotFeatures {
    std::vector<std::uint64_t> features;  // sorted distinct feature keys
    std::vector<std::uint64_t> counts;    // observation multiplicity per key
    double weight_sum = 0;                // sum of scheme weights
  };
  struct SlotSums {
    double inter_pq = 0;  // sum over intersection of w_p + w_q
    double inter_p = 0;   // sum over intersection of w_p
    double sum_p = 0;
    double sum_q = 0;
  };

  const SlotFeatures& slot_features(RelationId r, Slot s);
  double feature_weight(RelationId r, Slot s, std::uint64_t f,
                        std::uint64_t count_rf) const;
  std::uint64_t global_slot_count(Slot s, std::uint64_t f) const;
  SlotSums slot_sums(RelationId p, RelationId q, Slot sp, Slot sq);
  double ratio_score(double num, double den);
  std::vector<std::pair<Slot, Slot>> slot_pairs() const;
  double combined(const ImplicationRule& rule, bool want_dirt);

  const Corpus& corpus_;
  WeightScheme scheme_;
  FeatureRep rep_;
  ScoreDiagnostics diag_;
  std::unordered_map<std::uint64_t, SlotFeatures> feature_cache_;
  std::unordered_map<std::uint64_t, std::uint64_t> global_subject_counts_;
  std::unordered_map<std::uint64_t, std::uint64_t> global_object_counts_;
};

double dirt(const Corpus& corpus, const ImplicationRule& rule,
            WeightScheme scheme, FeatureRep rep,
            ScoreDiagnostics* diag = nullptr);
double cover(const Corpus& corpus, const ImplicationRule& rule,
             WeightScheme scheme, FeatureRep rep,
             ScoreDiagnostics* diag = nullptr);
double binc(const Corpus& corpus, const ImplicationRule& rule,
            WeightScheme scheme, FeatureRep rep,
            ScoreDiagnostics* diag = nullptr);

// Geometric mean of non-negative factors; 0 as soon as any factor is 0.
// Log-domain with value-sorted summation so permuted inputs give identical
// bits.
double geometric_mean(std::vector<double> values);

// Rule list rows: "antecedent<TAB>consequent" with an optional third column
// "0"/"1" for the reversed flag.
struct RuleRow {
  std::string antecedent;
  std::string consequent;
  bool reversed = false;
};
std::vector<RuleRow> parse_rules_tsv(std::istream& in);

}  // namespace relimp
