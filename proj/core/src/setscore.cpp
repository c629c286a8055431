#include "relimp/setscore.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

namespace relimp {

RelationId effective_consequent(const Corpus& corpus,
                                const ImplicationRule& rule) {
  if (rule.consequent >= corpus.num_relations())
    throw DataError("relation id out of range");
  if (!rule.reversed) return rule.consequent;
  return corpus.reversed(rule.consequent);
}

double geometric_mean(std::vector<double> values) {
  if (values.empty()) throw DataError("geometric mean of no values");
  for (double v : values)
    if (v == 0.0) return 0.0;
  if (values.size() == 1) return values[0];
  std::sort(values.begin(), values.end());
  double acc = 0;
  for (double v : values) acc += std::log(v);
  return std::exp(acc / double(values.size()));
}

SetScorer::SetScorer(const Corpus& corpus, WeightScheme scheme, FeatureRep rep)
    : corpus_(corpus), scheme_(scheme), rep_(rep) {
  if (scheme_ == WeightScheme::Pmi && rep_ != FeatureRep::ArgumentTuple) {
    for (const Observation& ob : corpus_.observations()) {
      global_subject_counts_[ob.tuple.subject] += ob.count;
      global_object_counts_[ob.tuple.object] += ob.count;
    }
  }
}

std::uint64_t SetScorer::global_slot_count(Slot s, std::uint64_t f) const {
  switch (s) {
    case Slot::TupleSlot:
      return corpus_.tuple_count(
          {ArgumentId(f >> 32), ArgumentId(f & 0xffffffff)});
    case Slot::Subject:
      return global_subject_counts_.at(f);
    case Slot::Object:
      return global_object_counts_.at(f);
  }
  return 0;
}

double SetScorer::feature_weight(RelationId r, Slot s, std::uint64_t f,
                                 std::uint64_t count_rf) const {
  if (scheme_ == WeightScheme::Unit) return 1.0;
  double num = double(count_rf) * double(corpus_.total());
  double den = double(corpus_.relation_count(r)) *
               double(global_slot_count(s, f));
  return std::log(num / den);
}

const SetScorer::SlotFeatures& SetScorer::slot_features(RelationId r, Slot s) {
  std::uint64_t key = (std::uint64_t(std::uint8_t(s)) << 32) | r;
  auto it = feature_cache_.find(key);
  if (it != feature_cache_.end()) return it->second;

  const auto& tuples = corpus_.tuples(r);
  const auto& mults = corpus_.tuple_multiplicities(r);
  SlotFeatures sf;
  if (s == Slot::TupleSlot) {
    sf.features.reserve(tuples.size());
    for (const Tuple& t : tuples) sf.features.push_back(tuple_key(t));
    sf.counts = mults;
  } else {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> kv;
    kv.reserve(tuples.size());
    for (std::size_t i = 0; i < tuples.size(); ++i)
      kv.emplace_back(s == Slot::Subject ? tuples[i].subject
                                         : tuples[i].object,
                      mults[i]);
    std::sort(kv.begin(), kv.end());
    for (std::size_t i = 0; i < kv.size();) {
      std::size_t j = i;
      std::uint64_t total = 0;
      while (j < kv.size() && kv[j].first == kv[i].first) total += kv[j++].second;
      sf.features.push_back(kv[i].first);
      sf.counts.push_back(total);
      i = j;
    }
  }
  double sum = 0;
  for (std::size_t i = 0; i < sf.features.size(); ++i)
    sum += feature_weight(r, s, sf.features[i], sf.counts[i]);
  sf.weight_sum = sum;
  return feature_cache_.emplace(key, std::move(sf)).first->second;
}

SetScorer::SlotSums SetScorer::slot_sums(RelationId p, RelationId q, Slot sp,
                                         Slot sq) {
  const SlotFeatures& fp = slot_features(p, sp);
  const SlotFeatures& fq = slot_features(q, sq);
  SlotSums sums;
  sums.sum_p = fp.weight_sum;
  sums.sum_q = fq.weight_sum;
  std::size_t i = 0, j = 0;
  while (i < fp.features.size() && j < fq.features.size()) {
    if (fp.features[i] < fq.features[j]) {
      ++i;
    } else if (fq.features[j] < fp.features[i]) {
      ++j;
    } else {
      double wp = feature_weight(p, sp, fp.features[i], fp.counts[i]);
      double wq = feature_weight(q, sq, fq.features[j], fq.counts[j]);
      sums.inter_pq += wp + wq;
      sums.inter_p += wp;
      ++i;
      ++j;
    }
  }
  return sums;
}

double SetScorer::ratio_score(double num, double den) {
  if (den <= 0.0 || num < 0.0) {
    ++diag_.clamped_slots;
    return 0.0;
  }
  double r = num / den;
  if (r > 1.0) {
    ++diag_.clamped_slots;
    return 1.0;
  }
  return r;
}

std::vector<std::pair<SetScorer::Slot, SetScorer::Slot>> SetScorer::slot_pairs()
    const {
  using S = Slot;
  switch (rep_) {
    case FeatureRep::ArgumentTuple:
      return {{S::TupleSlot, S::TupleSlot}};
    case FeatureRep::SlotIndependent:
      return {{S::Subject, S::Subject}, {S::Object, S::Object}};
    case FeatureRep::Unary:
      return {{S::Subject, S::Subject},
              {S::Subject, S::Object},
              {S::Object, S::Subject},
              {S::Object, S::Object}};
  }
  throw DataError("unknown feature representation");
}

double SetScorer::combined(const ImplicationRule& rule, bool want_dirt) {
  RelationId p = rule.antecedent;
  RelationId q = effective_consequent(corpus_, rule);
  if (p >= corpus_.num_relations())
    throw DataError("relation id out of range");
  std::vector<double> scores;
  for (auto [sp, sq] : slot_pairs()) {
    SlotSums s = slot_sums(p, q, sp, sq);
    scores.push_back(want_dirt ? ratio_score(s.inter_pq, s.sum_p + s.sum_q)
                               : ratio_score(s.inter_p, s.sum_p));
  }
  return geometric_mean(std::move(scores));
}

double SetScorer::dirt(const ImplicationRule& rule) {
  return combined(rule, true);
}

double SetScorer::cover(const ImplicationRule& rule) {
  return combined(rule, false);
}

double SetScorer::binc(const ImplicationRule& rule) {
  return std::sqrt(combined(rule, true) * combined(rule, false));
}

double dirt(const Corpus& corpus, const ImplicationRule& rule,
            WeightScheme scheme, FeatureRep rep, ScoreDiagnostics* diag) {
  SetScorer scorer(corpus, scheme, rep);
  double v = scorer.dirt(rule);
  if (diag) diag->clamped_slots += scorer.diagnostics().clamped_slots;
  return v;
}

double cover(const Corpus& corpus, const ImplicationRule& rule,
             WeightScheme scheme, FeatureRep rep, ScoreDiagnostics* diag) {
  SetScorer scorer(corpus, scheme, rep);
  double v = scorer.cover(rule);
  if (diag) diag->clamped_slots += scorer.diagnostics().clamped_slots;
  return v;
}

double binc(const Corpus& corpus, const ImplicationRule& rule,
            WeightScheme scheme, FeatureRep rep, ScoreDiagnostics* diag) {
  SetScorer scorer(corpus, scheme, rep);
  double v = scorer.binc(rule);
  if (diag) diag->clamped_slots += scorer.diagnostics().clamped_slots;
  return v;
}

std::vector<RuleRow> parse_rules_tsv(std::istream& in) {
  std::vector<RuleRow> rows;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 2 && fields.size() != 3)
      throw ParseError("expected 2 or 3 tab-separated fields", lineno);
    if (fields[0].empty() || fields[1].empty())
      throw ParseError("empty field in rule", lineno);
    RuleRow row;
    row.antecedent = fields[0];
    row.consequent = fields[1];
    if (fields.size() == 3) {
      if (fields[2] == "0")
        row.reversed = false;
      else if (fields[2] == "1")
        row.reversed = true;
      else
        throw ParseError("reversed flag must be 0 or 1", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("empty rules file");
  return rows;
}

}  // namespace relimp
