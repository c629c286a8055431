#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "relimp/probscore.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace relimp;
using namespace testsupport;

namespace {

std::size_t tuple_index(const Corpus& c, const Tuple& t) {
  const auto& all = c.all_tuples();
  auto it = std::lower_bound(all.begin(), all.end(), t);
  REQUIRE(it != all.end());
  REQUIRE(*it == t);
  return std::size_t(it - all.begin());
}

void fill_random(EmbeddingState& st, std::mt19937_64& rng) {
  for (double& p : st.parameters()) p = 2.0 * rand01(rng) - 1.0;
}

const EstimatorKind kKinds[] = {EstimatorKind::Empirical,
                                EstimatorKind::LinkFull,
                                EstimatorKind::LinkObserved};

}  // namespace

TEST_CASE("empirical model on the teaching fixture") {
  Corpus c = build_corpus(small_world());
  ConditionalModel model = empirical_marginals(c);
  Tuple sam_mac{arg_id(c, "Sam"), arg_id(c, "Macquarie")};
  std::size_t i = tuple_index(c, sam_mac);

  CHECK(model.tuple_prob(i) == 3.0 / 7.0);
  CHECK(model.conditional(rel_id(c, "works-for"), i) == 1.0 / 3.0);
  CHECK(model.conditional(rel_id(c, "taught-by"), i) == 0.0);
  CHECK(model.marginal(rel_id(c, "works-for")) == 2.0 / 7.0);
  CHECK_THROWS_AS(model.marginal(99), DataError);
}

TEST_CASE("prob_e worked values") {
  Corpus c = build_corpus(small_world());
  RelationId tutors = rel_id(c, "tutors-at");
  RelationId works = rel_id(c, "works-for");
  RelationId studies = rel_id(c, "studies-at");
  RelationId taught = rel_id(c, "taught-by");

  // Single shared tuple (Sam, Macquarie): ((3/7)*(1/3))*(1/3) / (1/7) = 1/3.
  CHECK(prob_e(c, {tutors, works}) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(prob_e(c, {studies, taught}) == 0.0);
  for (RelationId r = 0; r < c.num_relations(); ++r) {
    double self = prob_e(c, {r, r});
    CHECK(self >= 0.0);
    CHECK(self <= 1.0);
  }
  // works-for -> works-for: (1/21 + 1/7) / (2/7) = 2/3.
  CHECK(prob_e(c, {works, works}) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("prob_e matches the enumeration reference") {
  std::mt19937_64 rng(201);
  for (int trial = 0; trial < 80; ++trial) {
    RawCorpus raw = random_raw_corpus(rng, 5, 8, 50);
    Corpus c = build_corpus(raw);
    oracle::Counts oc = oracle::count(raw);
    for (RelationId p = 0; p < c.num_relations(); ++p)
      for (RelationId q = 0; q < c.num_relations(); ++q)
        CHECK(prob_e(c, {p, q}) ==
              doctest::Approx(oracle::prob_e(oc, c.relations().name(p),
                                             c.relations().name(q)))
                  .epsilon(1e-12));
  }
}

TEST_CASE("zeroed state collapses link estimators to one half") {
  Corpus c = build_corpus(small_world());
  EmbeddingState st = init_random(ModelKind::DistMult, 3, c.num_relations(),
                                  c.num_arguments(), 0);
  for (double& p : st.parameters()) p = 0.0;

  for (RelationId p = 0; p < c.num_relations(); ++p)
    for (RelationId q = 0; q < c.num_relations(); ++q)
      CHECK(prob_l(c, st, {p, q}) == 0.5);

  RelationId tutors = rel_id(c, "tutors-at");
  RelationId works = rel_id(c, "works-for");
  // prob_el restricts to observed tuples: num sums P(t)/4 over the
  // intersection, den sums P(t)/2 over T_p.
  CHECK(prob_el(c, st, {tutors, works}) == 0.5);
  // works -> tutors: ((3/7)/4) / (((3/7)+(1/7))/2) = 3/8.
  CHECK(prob_el(c, st, {works, tutors}) ==
        doctest::Approx(3.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("prob_el equals prob_l when both relations cover every tuple") {
  RawCorpus rows = {{"p", "a", "b"}, {"p", "c", "d"}, {"q", "a", "b"},
                    {"q", "c", "d"}};
  Corpus c = build_corpus(rows);
  std::mt19937_64 rng(17);
  EmbeddingState st = init_random(ModelKind::Complex, 3, c.num_relations(),
                                  c.num_arguments(), 4);
  fill_random(st, rng);
  ImplicationRule rule{rel_id(c, "p"), rel_id(c, "q")};
  CHECK(prob_el(c, st, rule) == prob_l(c, st, rule));
}

TEST_CASE("link scores match the loop reference") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    RawCorpus raw = random_raw_corpus(rng, 4, 7, 40);
    Corpus c = build_corpus(raw);
    oracle::Counts oc = oracle::count(raw);
    for (ModelKind kind :
         {ModelKind::MatrixFact, ModelKind::TransE, ModelKind::DistMult,
          ModelKind::Complex}) {
      EmbeddingState st = init_random(kind, 3, c.num_relations(),
                                      c.num_arguments(), rng());
      fill_random(st, rng);
      for (RelationId p = 0; p < c.num_relations(); ++p) {
        for (RelationId q = 0; q < c.num_relations(); ++q) {
          const std::string& pn = c.relations().name(p);
          const std::string& qn = c.relations().name(q);
          CHECK(prob_l(c, st, {p, q}) ==
                doctest::Approx(oracle::prob_link(oc, c, st,
                                                  EstimatorKind::LinkFull, pn,
                                                  qn))
                    .epsilon(1e-12));
          CHECK(prob_el(c, st, {p, q}) ==
                doctest::Approx(oracle::prob_link(oc, c, st,
                                                  EstimatorKind::LinkObserved,
                                                  pn, qn))
                    .epsilon(1e-12));
          // The empirical loop reference reproduces prob_e as well.
          CHECK(prob_e(c, {p, q}) ==
                doctest::Approx(oracle::prob_link(oc, c, st,
                                                  EstimatorKind::Empirical, pn,
                                                  qn))
                    .epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("probabilities stay in range on random corpora and states") {
  std::mt19937_64 rng(119);
  for (int trial = 0; trial < 100; ++trial) {
    RawCorpus raw = random_raw_corpus(rng, 4, 6, 30);
    Corpus c = build_corpus(raw);
    EmbeddingState st = init_random(ModelKind::TransE, 2, c.num_relations(),
                                    c.num_arguments(), rng(), 1);
    fill_random(st, rng);
    for (RelationId p = 0; p < c.num_relations(); ++p) {
      for (RelationId q = 0; q < c.num_relations(); ++q) {
        for (double v : {prob_e(c, {p, q}), prob_l(c, st, {p, q}),
                         prob_el(c, st, {p, q})}) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("conditional query worked values and complement") {
  Corpus c = build_corpus(small_world());
  RelationId tutors = rel_id(c, "tutors-at");
  RelationId works = rel_id(c, "works-for");
  ConditionalModel model = empirical_marginals(c);

  std::vector<Condition> given = {{tutors, true}};
  double pq = conditional_query(model, works, given);
  CHECK(pq == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  // prob_e is the same query computed over the antecedent's tuple list.
  CHECK(pq == doctest::Approx(prob_e(c, {tutors, works})).epsilon(1e-12));

  double not_q = conditional_query(model, {works, false}, given);
  CHECK(std::abs(not_q - (1.0 - pq)) <= 1e-12);

  // A self-implication query repeats the relation's factor; it reduces to
  // prob_e(p -> p), not to 1.
  std::vector<Condition> self = {{works, true}};
  CHECK(conditional_query(model, works, self) ==
        doctest::Approx(prob_e(c, {works, works})).epsilon(1e-12));

  // Conditioning on an absent relation truth combination.
  std::vector<Condition> impossible = {{rel_id(c, "taught-by"), true},
                                       {rel_id(c, "studies-at"), true}};
  CHECK_THROWS_WITH_AS(conditional_query(model, works, impossible),
                       "conditional is undefined: conditions have probability 0",
                       DataError);
  std::vector<Condition> none;
  CHECK_THROWS_AS(conditional_query(model, works, none), DataError);
  std::vector<Condition> oov = {{99, true}};
  CHECK_THROWS_AS(conditional_query(model, works, oov), DataError);
  CHECK_THROWS_AS(conditional_query(model, 99, given), DataError);
}

TEST_CASE("conditional query matches brute-force joint enumeration") {
  std::mt19937_64 rng(500);
  for (int trial = 0; trial < 30; ++trial) {
    RawCorpus raw = random_raw_corpus(rng, 4, 6, 30);
    Corpus c = build_corpus(raw);
    oracle::Counts oc = oracle::count(raw);
    EmbeddingState st = init_random(ModelKind::DistMult, 3, c.num_relations(),
                                    c.num_arguments(), rng());
    fill_random(st, rng);
    std::uint32_t nr = c.num_relations();
    for (EstimatorKind kind : kKinds) {
      ConditionalModel model(c, kind,
                             kind == EstimatorKind::Empirical ? nullptr : &st);
      if (nr < 2) continue;
      for (int probe = 0; probe < 10; ++probe) {
        // The joint-table reference needs one truth variable per relation,
        // so keep the queried relations distinct; repeating a relation in
        // the condition list is a factor product, not a joint event.
        std::vector<RelationId> ids(nr);
        std::iota(ids.begin(), ids.end(), RelationId(0));
        for (std::size_t k = ids.size() - 1; k > 0; --k)
          std::swap(ids[k], ids[rand_below(rng, k + 1)]);
        std::size_t ncond =
            1 + rand_below(rng, std::min<std::uint64_t>(2, nr - 1));
        RelationId target = ids[ncond];
        bool target_truth = rand_below(rng, 2) == 0;
        std::vector<Condition> conds;
        std::vector<oracle::StrCondition> sconds;
        for (std::size_t k = 0; k < ncond; ++k) {
          bool truth = rand_below(rng, 2) == 0;
          conds.push_back({ids[k], truth});
          sconds.push_back({c.relations().name(ids[k]), truth});
        }
        double got, want;
        bool lib_throws = false, ref_throws = false;
        try {
          got = conditional_query(model, Condition{target, target_truth},
                                  conds);
        } catch (const DataError&) {
          lib_throws = true;
        }
        try {
          want = oracle::conditional_query(
              oc, c, kind == EstimatorKind::Empirical ? nullptr : &st, kind,
              {c.relations().name(target), target_truth}, sconds);
        } catch (const std::runtime_error&) {
          ref_throws = true;
        }
        REQUIRE(lib_throws == ref_throws);
        if (!lib_throws) CHECK(got == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("factorized joint normalizes over full enumeration") {
  std::mt19937_64 rng(321);
  for (int trial = 0; trial < 20; ++trial) {
    RawCorpus raw = random_raw_corpus(rng, 3, 5, 20);
    Corpus c = build_corpus(raw);
    EmbeddingState st = init_random(ModelKind::MatrixFact, 2,
                                    c.num_relations(), c.num_arguments(),
                                    rng());
    fill_random(st, rng);
    std::uint32_t nr = c.num_relations();
    for (EstimatorKind kind : kKinds) {
      ConditionalModel model(c, kind,
                             kind == EstimatorKind::Empirical ? nullptr : &st);
      std::vector<ConditionalTable> tables;
      for (RelationId r = 0; r < nr; ++r)
        tables.push_back(build_conditional_table(model, r));
      double mass = 0;
      for (std::size_t i = 0; i < c.all_tuples().size(); ++i) {
        for (std::uint64_t bits = 0; bits < (1ull << nr); ++bits) {
          double w = model.tuple_prob(i);
          for (std::uint32_t r = 0; r < nr; ++r)
            w *= (bits >> r) & 1 ? tables[r].probs[i]
                                 : 1.0 - tables[r].probs[i];
          mass += w;
        }
      }
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
      // Marginal consistency: sum_t P(t) P(Z_r=1|t) equals the cached
      // marginal.
      for (RelationId r = 0; r < nr; ++r) {
        double acc = 0;
        for (std::size_t i = 0; i < c.all_tuples().size(); ++i)
          acc += model.tuple_prob(i) * tables[r].probs[i];
        CHECK(acc == doctest::Approx(tables[r].marginal).epsilon(1e-12));
        CHECK(tables[r].marginal == model.marginal(r));  // cache consistency
      }
    }
  }
}

TEST_CASE("observed-only estimator zeroes unobserved tuples") {
  Corpus c = build_corpus(small_world());
  std::mt19937_64 rng(9);
  EmbeddingState st = init_random(ModelKind::DistMult, 3, c.num_relations(),
                                  c.num_arguments(), 2);
  fill_random(st, rng);
  ConditionalModel obs(c, EstimatorKind::LinkObserved, &st);
  ConditionalModel full(c, EstimatorKind::LinkFull, &st);
  RelationId works = rel_id(c, "works-for");
  std::size_t jane_mac =
      tuple_index(c, {arg_id(c, "Jane"), arg_id(c, "Macquarie")});
  std::size_t sam_mac =
      tuple_index(c, {arg_id(c, "Sam"), arg_id(c, "Macquarie")});
  CHECK(obs.conditional(works, jane_mac) == 0.0);
  CHECK(obs.conditional(works, sam_mac) == full.conditional(works, sam_mac));
  double phi = score(st, works, arg_id(c, "Sam"), arg_id(c, "Macquarie"));
  CHECK(full.conditional(works, sam_mac) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-phi))).epsilon(1e-14));
}

TEST_CASE("reversed rules resolve against the synthetic relation") {
  Corpus base = build_corpus(small_world());
  Corpus c = augment_reversed(base);
  std::mt19937_64 rng(13);
  EmbeddingState st = init_for_corpus(ModelKind::Complex, 3, c, 21);
  fill_random(st, rng);
  RelationId teaches = rel_id(c, "teaches");
  RelationId taught = rel_id(c, "taught-by");
  // taught-by(Emily, Sam) and teaches@rev(Emily, Sam) coincide exactly.
  ImplicationRule rule{taught, teaches, true};
  ImplicationRule direct{taught, c.reversed(teaches), false};
  CHECK(prob_e(c, rule) == prob_e(c, direct));
  // Both relations observe exactly (Emily, Sam), and nothing else touches
  // that tuple after augmentation, so n_t = 2 and each conditional is 1/2:
  // ((2/14)*(1/2)*(1/2)) / (1/14) = 1/2. Equal tuple sets do not give 1.
  CHECK(prob_e(c, rule) == 0.5);
  CHECK(prob_l(c, st, rule) == prob_l(c, st, direct));
  CHECK(prob_el(c, st, rule) == prob_el(c, st, direct));

  CHECK_THROWS_AS(prob_e(base, rule), DataError);
}

TEST_CASE("vocabulary and argument validation") {
  Corpus c = build_corpus(small_world());
  EmbeddingState small = init_random(ModelKind::DistMult, 2, 2, 3, 0);
  EmbeddingState big = init_random(ModelKind::DistMult, 2, 9, 9, 0);

  CHECK_THROWS_AS(ConditionalModel(c, EstimatorKind::LinkFull, nullptr),
                  DataError);
  CHECK_THROWS_AS(ConditionalModel(c, EstimatorKind::LinkFull, &small),
                  DataError);
  CHECK_THROWS_AS(prob_l(c, small, ImplicationRule{0, 1}), DataError);
  CHECK_THROWS_AS(prob_el(c, small, ImplicationRule{0, 1}), DataError);
  // A covering (larger) vocabulary is accepted.
  ConditionalModel ok(c, EstimatorKind::LinkFull, &big);
  CHECK(ok.marginal(0) > 0.0);
  CHECK(prob_l(c, big, ImplicationRule{0, 1}) >= 0.0);

  CHECK_THROWS_AS(prob_e(c, ImplicationRule{0, 99}), DataError);
  CHECK_THROWS_AS(build_conditional_table(empirical_marginals(c), 99),
                  DataError);
}
