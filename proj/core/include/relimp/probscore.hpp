#pragma once

#include <cstdint>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "relimp/corpus.hpp"
#include "relimp/linkpred.hpp"
#include "relimp/setscore.hpp"

namespace relimp {

// How P(Z_r = 1 | T = t) is estimated:
//   Empirical:     n_{r t} / n_{. t} from counts.
//   LinkFull:      sigmoid(phi(r, t)) for every observed tuple.
//   LinkObserved:  sigmoid(phi(r, t)) when t is in T_r, else 0.
enum class EstimatorKind : std::uint8_t { Empirical, LinkFull, LinkObserved };

// Factorized joint over one tuple draw: P(T = t) is empirical in every
// estimator; relation truths are conditionally independent given T.
class ConditionalModel {
 public:
  ConditionalModel(const Corpus& corpus, EstimatorKind kind,
                   const EmbeddingState* state = nullptr);

  const Corpus& corpus() const { return *corpus_; }
  EstimatorKind kind() const { return kind_; }

  // P(T = corpus.all_tuples()[i]) = n_{. t} / n.
  double tuple_prob(std::size_t tuple_index) const;
  // P(Z_r = 1 | T = corpus.all_tuples()[i]).
  double conditional(RelationId r, std::size_t tuple_index) const;
  // P(Z_r = 1), cached per relation.
  double marginal(RelationId r) const;

 private:
  const Corpus* corpus_;
  EstimatorKind kind_;
  const EmbeddingState* state_ = nullptr;
  mutable std::mutex marginal_mutex_;
  mutable std::unordered_map<RelationId, double> marginal_cache_;
};

// Per-tuple conditional table of one relation with its marginal.
struct ConditionalTable {
  std::vector<double> probs;  // aligned with corpus.all_tuples()
  double marginal = 0;
};
ConditionalTable build_conditional_table(const ConditionalModel& model,
                                         RelationId r);

// Shorthand for the count-based estimator context.
inline ConditionalModel empirical_marginals(const Corpus& corpus) {
  return ConditionalModel(corpus, EstimatorKind::Empirical);
}

struct Condition {
  RelationId relation = 0;
  bool truth = true;
};

// P(Z_target = 1 | conditions) by summing the factorized joint over the
// observed tuples. Errors when the conditions have zero probability.
double conditional_query(const ConditionalModel& model, RelationId target,
                         std::span<const Condition> conditions);

// P(Z_target = truth | conditions); supports negated query targets.
double conditional_query(const ConditionalModel& model, Condition target,
                         std::span<const Condition> conditions);

// P(Z_q = 1 | Z_p = 1) under the three estimators. prob_e uses counts,
// prob_l uses sigmoid conditionals over every observed tuple, prob_el
// restricts sigmoid conditionals to each relation's observed tuples.
double prob_e(const Corpus& corpus, const ImplicationRule& rule);
double prob_l(const Corpus& corpus, const EmbeddingState& state,
              const ImplicationRule& rule);
double prob_el(const Corpus& corpus, const EmbeddingState& state,
               const ImplicationRule& rule);

}  // namespace relimp
