#include "relimp/probscore.hpp"

#include <cmath>

#include "mathutil.hpp"

namespace relimp {

namespace {
using mathutil::clamp01;
using mathutil::sigmoid;

void check_vocab(const Corpus& corpus, const EmbeddingState& state) {
  if (state.num_relations() < corpus.num_relations() ||
      state.num_arguments() < corpus.num_arguments())
    throw DataError("embedding vocabulary does not cover the corpus");
}
}  // namespace

ConditionalModel::ConditionalModel(const Corpus& corpus, EstimatorKind kind,
                                   const EmbeddingState* state)
    : corpus_(&corpus), kind_(kind), state_(state) {
  if (kind_ != EstimatorKind::Empirical) {
    if (!state_) throw DataError("link estimator needs an embedding state");
    check_vocab(corpus, *state_);
  }
}

double ConditionalModel::tuple_prob(std::size_t tuple_index) const {
  return double(corpus_->all_tuple_counts()[tuple_index]) /
         double(corpus_->total());
}

double ConditionalModel::conditional(RelationId r,
                                     std::size_t tuple_index) const {
  const Tuple& t = corpus_->all_tuples()[tuple_index];
  switch (kind_) {
    case EstimatorKind::Empirical:
      return double(corpus_->count(r, t)) /
             double(corpus_->all_tuple_counts()[tuple_index]);
    case EstimatorKind::LinkFull:
      return sigmoid(score(*state_, r, t.subject, t.object));
    case EstimatorKind::LinkObserved:
      if (corpus_->count(r, t) == 0) return 0.0;
      return sigmoid(score(*state_, r, t.subject, t.object));
  }
  throw DataError("unknown estimator kind");
}

double ConditionalModel::marginal(RelationId r) const {
  if (r >= corpus_->num_relations())
    throw DataError("relation id out of range");
  if (kind_ == EstimatorKind::Empirical)
    return double(corpus_->relation_count(r)) / double(corpus_->total());
  std::lock_guard lock(marginal_mutex_);
  auto it = marginal_cache_.find(r);
  if (it != marginal_cache_.end()) return it->second;
  double acc = 0;
  for (std::size_t i = 0; i < corpus_->all_tuples().size(); ++i)
    acc += tuple_prob(i) * conditional(r, i);
  marginal_cache_.emplace(r, acc);
  return acc;
}

ConditionalTable build_conditional_table(const ConditionalModel& model,
                                         RelationId r) {
  if (r >= model.corpus().num_relations())
    throw DataError("relation id out of range");
  ConditionalTable table;
  std::size_t n = model.corpus().all_tuples().size();
  table.probs.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    table.probs.push_back(model.conditional(r, i));
  table.marginal = model.marginal(r);
  return table;
}

double conditional_query(const ConditionalModel& model, Condition target,
                         std::span<const Condition> conditions) {
  if (conditions.empty()) throw DataError("conditional query needs conditions");
  const Corpus& corpus = model.corpus();
  if (target.relation >= corpus.num_relations())
    throw DataError("relation id out of range");
  for (const Condition& c : conditions)
    if (c.relation >= corpus.num_relations())
      throw DataError("relation id out of range");

  double num = 0, den = 0;
  std::size_t n = corpus.all_tuples().size();
  for (std::size_t i = 0; i < n; ++i) {
    double base = model.tuple_prob(i);
    for (const Condition& c : conditions) {
      double p = model.conditional(c.relation, i);
      base *= c.truth ? p : 1.0 - p;
      if (base == 0.0) break;
    }
    if (base == 0.0) continue;
    den += base;
    double pt = model.conditional(target.relation, i);
    num += base * (target.truth ? pt : 1.0 - pt);
  }
  if (den == 0.0)
    throw DataError("conditional is undefined: conditions have probability 0");
  return clamp01(num / den);
}

double conditional_query(const ConditionalModel& model, RelationId target,
                         std::span<const Condition> conditions) {
  return conditional_query(model, Condition{target, true}, conditions);
}

double prob_e(const Corpus& corpus, const ImplicationRule& rule) {
  RelationId p = rule.antecedent;
  RelationId q = effective_consequent(corpus, rule);
  if (p >= corpus.num_relations()) throw DataError("relation id out of range");

  const auto& tp = corpus.tuples(p);
  const auto& mp = corpus.tuple_multiplicities(p);
  const auto& tq = corpus.tuples(q);
  const auto& mq = corpus.tuple_multiplicities(q);
  double n = double(corpus.total());
  double num = 0;
  std::size_t i = 0, j = 0;
  while (i < tp.size() && j < tq.size()) {
    if (tp[i] < tq[j]) {
      ++i;
    } else if (tq[j] < tp[i]) {
      ++j;
    } else {
      double nt = double(corpus.tuple_count(tp[i]));
      num += (nt / n * (double(mp[i]) / nt)) * (double(mq[j]) / nt);
      ++i;
      ++j;
    }
  }
  double den = double(corpus.relation_count(p)) / n;
  return clamp01(num / den);
}

double prob_l(const Corpus& corpus, const EmbeddingState& state,
              const ImplicationRule& rule) {
  check_vocab(corpus, state);
  RelationId p = rule.antecedent;
  RelationId q = effective_consequent(corpus, rule);
  if (p >= corpus.num_relations()) throw DataError("relation id out of range");

  const auto& tuples = corpus.all_tuples();
  const auto& counts = corpus.all_tuple_counts();
  double n = double(corpus.total());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const Tuple& t = tuples[i];
    double base = double(counts[i]) / n *
                  sigmoid(score(state, p, t.subject, t.object));
    den += base;
    num += base * sigmoid(score(state, q, t.subject, t.object));
  }
  if (den == 0.0)
    throw DataError("conditional is undefined: conditions have probability 0");
  return clamp01(num / den);
}

double prob_el(const Corpus& corpus, const EmbeddingState& state,
               const ImplicationRule& rule) {
  check_vocab(corpus, state);
  RelationId p = rule.antecedent;
  RelationId q = effective_consequent(corpus, rule);
  if (p >= corpus.num_relations()) throw DataError("relation id out of range");

  const auto& tp = corpus.tuples(p);
  const auto& tq = corpus.tuples(q);
  double n = double(corpus.total());
  double num = 0;
  std::size_t i = 0, j = 0;
  while (i < tp.size() && j < tq.size()) {
    if (tp[i] < tq[j]) {
      ++i;
    } else if (tq[j] < tp[i]) {
      ++j;
    } else {
      const Tuple& t = tp[i];
      double base = double(corpus.tuple_count(t)) / n *
                    sigmoid(score(state, p, t.subject, t.object));
      num += base * sigmoid(score(state, q, t.subject, t.object));
      ++i;
      ++j;
    }
  }
  double den = 0;
  for (std::size_t i2 = 0; i2 < tp.size(); ++i2) {
    const Tuple& t = tp[i2];
    den += double(corpus.tuple_count(t)) / n *
           sigmoid(score(state, p, t.subject, t.object));
  }
  if (den == 0.0)
    throw DataError("conditional is undefined: conditions have probability 0");
  return clamp01(num / den);
}

}  // namespace relimp
