#include "relimp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>

namespace relimp {

namespace {
void check_scores_finite(std::span<const ScoredLabel> data) {
  for (const ScoredLabel& d : data)
    if (!std::isfinite(d.score)) throw DataError("non-finite score");
}
}  // namespace

double auc(std::span<const ScoredLabel> data) {
  check_scores_finite(data);
  std::size_t pos = 0;
  for (const ScoredLabel& d : data) pos += d.positive ? 1 : 0;
  std::size_t neg = data.size() - pos;
  if (pos == 0 || neg == 0)
    throw DataError("auc needs at least one positive and one negative");

  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return data[a].score < data[b].score;
  });

  double rank_sum_pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && data[idx[j]].score == data[idx[i]].score) ++j;
    double midrank = (double(i + 1) + double(j)) / 2.0;  // ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t)
      if (data[idx[t]].positive) rank_sum_pos += midrank;
    i = j;
  }
  double p = double(pos), n = double(neg);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);
}

std::vector<PrPoint> pr_curve(std::span<const ScoredLabel> data) {
  check_scores_finite(data);
  std::size_t pos = 0;
  for (const ScoredLabel& d : data) pos += d.positive ? 1 : 0;
  if (pos == 0) throw DataError("pr curve needs at least one positive");

  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return data[a].score > data[b].score;
  });

  std::vector<PrPoint> points;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && data[idx[j]].score == data[idx[i]].score) {
      if (data[idx[j]].positive)
        ++tp;
      else
        ++fp;
      ++j;
    }
    points.push_back(
        {double(tp) / double(pos), double(tp) / double(tp + fp)});
    i = j;
  }
  return points;
}

std::vector<LabelledRule> parse_labelled_tsv(std::istream& in,
                                             bool directional) {
  std::vector<LabelledRule> rows;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      f.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 7)
      throw ParseError("expected 7 tab-separated fields", lineno);
    for (std::size_t i = 0; i < 6; ++i)
      if (f[i].empty()) throw ParseError("empty field in labelled rule", lineno);

    LabelledRule row;
    row.antecedent_subject = f[0];
    row.antecedent_relation = f[1];
    row.antecedent_object = f[2];
    row.consequent_subject = f[3];
    row.consequent_relation = f[4];
    row.consequent_object = f[5];
    // Aligned arguments first, so s == o rows read as not reversed.
    if (f[3] == f[0] && f[5] == f[2])
      row.reversed = false;
    else if (f[3] == f[2] && f[5] == f[0])
      row.reversed = true;
    else
      throw ParseError("consequent arguments do not correspond to the antecedent's",
                       lineno);

    if (directional) {
      if (f[6] == "forward")
        row.direction = Direction::Forward;
      else if (f[6] == "backward")
        row.direction = Direction::Backward;
      else
        throw ParseError("direction label must be forward or backward", lineno);
    } else {
      if (f[6] == "0")
        row.positive = false;
      else if (f[6] == "1")
        row.positive = true;
      else
        throw ParseError("label must be 0 or 1", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("empty labelled rule file");
  return rows;
}

double directional_accuracy(const RuleScorer& scorer,
                            std::span<const LabelledRule> rows) {
  if (rows.empty()) throw DataError("empty directional rule set");
  double credit = 0;
  for (const LabelledRule& row : rows) {
    if (!row.direction)
      throw DataError("directional accuracy needs direction labels");
    double fwd = scorer(row, true);
    double bwd = scorer(row, false);
    if (!std::isfinite(fwd) || !std::isfinite(bwd))
      throw DataError("non-finite score");
    if (fwd == bwd) {
      credit += 0.5;
    } else {
      Direction picked =
          fwd > bwd ? Direction::Forward : Direction::Backward;
      credit += picked == *row.direction ? 1.0 : 0.0;
    }
  }
  return credit / double(rows.size());
}

}  // namespace relimp
