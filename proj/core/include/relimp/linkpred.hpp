#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "relimp/corpus.hpp"

namespace relimp {

// Score functions phi(r, s, o):
//   MatrixFact: e_s . w_r + e_o . w_r                  (symmetric in s, o)
//   TransE:     -|| (e_s + w_r) - e_o ||_p, p in {1,2} (order sensitive)
//   DistMult:   sum_i e_s[i] * w_r[i] * e_o[i]         (symmetric in s, o)
//   Complex:    Re(sum_i e_s[i] * w_r[i] * conj(e_o[i])) (order sensitive)
enum class ModelKind : std::uint8_t {
  MatrixFact = 0,
  TransE = 1,
  DistMult = 2,
  Complex = 3
};

bool is_symmetric(ModelKind kind);
const char* model_kind_name(ModelKind kind);
// 200 for the real-valued models, 100 for Complex.
std::uint32_t default_dimension(ModelKind kind);

// Dense embedding parameters for one model.
//
// Complex vectors are stored as [re(0..k), im(0..k)], so the row stride is
// 2k for Complex and k otherwise.
//
// Synthetic argument-reversed relations own no parameters: they alias the
// base relation's row and score with swapped arguments, which makes
// phi(r@rev, s, o) == phi(r, o, s) hold bit-exactly and sends their
// gradients to the base row.
class EmbeddingState {
 public:
  ModelKind kind() const { return kind_; }
  std::uint32_t dim() const { return dim_; }
  std::uint32_t stride() const { return stride_; }
  int transe_norm() const { return transe_norm_; }
  std::uint64_t seed() const { return seed_; }

  std::uint32_t num_relations() const {
    return std::uint32_t(alias_row_.size());
  }
  std::uint32_t num_relation_rows() const { return relation_rows_; }
  std::uint32_t num_arguments() const { return argument_rows_; }

  std::uint32_t relation_row(RelationId r) const;
  bool swaps_arguments(RelationId r) const;

  std::span<double> relation_row_vec(std::uint32_t row);
  std::span<const double> relation_row_vec(std::uint32_t row) const;
  std::span<double> argument_vec(ArgumentId a);
  std::span<const double> argument_vec(ArgumentId a) const;

  // Flat view over all parameters (relation rows then argument rows).
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  void save(std::ostream& out) const;
  static EmbeddingState load(std::istream& in);

 private:
  friend EmbeddingState init_random(ModelKind, std::uint32_t, std::uint32_t,
                                    std::uint32_t, std::uint64_t, int);
  friend EmbeddingState init_for_corpus(ModelKind, std::uint32_t,
                                        const Corpus&, std::uint64_t, int);

  static EmbeddingState make(ModelKind kind, std::uint32_t k,
                             std::vector<std::uint32_t> alias_row,
                             std::vector<std::uint8_t> alias_swap,
                             std::uint32_t relation_rows,
                             std::uint32_t num_arguments, std::uint64_t seed,
                             int transe_norm);

  ModelKind kind_ = ModelKind::MatrixFact;
  std::uint32_t dim_ = 0;
  std::uint32_t stride_ = 0;
  int transe_norm_ = 2;
  std::uint64_t seed_ = 0;
  std::uint32_t relation_rows_ = 0;
  std::uint32_t argument_rows_ = 0;
  std::vector<std::uint32_t> alias_row_;  // relation id -> parameter row
  std::vector<std::uint8_t> alias_swap_;  // relation id -> swap arguments
  std::vector<double> params_;
};

// Fresh state with identity relation aliasing, entries uniform in
// [-0.5/sqrt(k), 0.5/sqrt(k)], drawn row-major from a fixed-seed generator.
EmbeddingState init_random(ModelKind kind, std::uint32_t k,
                           std::uint32_t num_relations,
                           std::uint32_t num_arguments, std::uint64_t seed,
                           int transe_norm = 2);

// Same, but sized for a corpus; in an augmented corpus the synthetic
// reversed relations alias their base relation's row.
EmbeddingState init_for_corpus(ModelKind kind, std::uint32_t k,
                               const Corpus& corpus, std::uint64_t seed,
                               int transe_norm = 2);

double score(const EmbeddingState& state, RelationId r, ArgumentId s,
             ArgumentId o);

// Partial derivatives of phi at one triple. subject/object hold d phi / d e_s
// and d phi / d e_o for the arguments as passed; relation holds d phi / d w
// for the alias-resolved row (relation_row(r)). When s == o the caller adds
// both argument gradients to the same row.
struct ScoreGradient {
  std::vector<double> subject;
  std::vector<double> object;
  std::vector<double> relation;
};

// Returns phi and fills g.
double score_gradient(const EmbeddingState& state, RelationId r, ArgumentId s,
                      ArgumentId o, ScoreGradient& g);

// Cosine similarity of two relations' parameter rows (alias resolved).
double cosine_similarity(const EmbeddingState& state, RelationId p,
                         RelationId q);

}  // namespace relimp
