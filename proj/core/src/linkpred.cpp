#include "relimp/linkpred.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "binio.hpp"
#include "mathutil.hpp"

namespace relimp {

namespace {
constexpr char kCheckpointMagic[4] = {'R', 'L', 'E', 'B'};
constexpr std::uint8_t kCheckpointVersion = 1;
using mathutil::uniform01;
}  // namespace

bool is_symmetric(ModelKind kind) {
  return kind == ModelKind::MatrixFact || kind == ModelKind::DistMult;
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::MatrixFact: return "matrixfact";
    case ModelKind::TransE: return "transe";
    case ModelKind::DistMult: return "distmult";
    case ModelKind::Complex: return "complex";
  }
  return "?";
}

std::uint32_t default_dimension(ModelKind kind) {
  return kind == ModelKind::Complex ? 100 : 200;
}

std::uint32_t EmbeddingState::relation_row(RelationId r) const {
  if (r >= alias_row_.size()) throw DataError("relation id out of range");
  return alias_row_[r];
}

bool EmbeddingState::swaps_arguments(RelationId r) const {
  if (r >= alias_swap_.size()) throw DataError("relation id out of range");
  return alias_swap_[r] != 0;
}

std::span<double> EmbeddingState::relation_row_vec(std::uint32_t row) {
  if (row >= relation_rows_) throw DataError("relation row out of range");
  return {params_.data() + std::size_t(row) * stride_, stride_};
}

std::span<const double> EmbeddingState::relation_row_vec(
    std::uint32_t row) const {
  if (row >= relation_rows_) throw DataError("relation row out of range");
  return {params_.data() + std::size_t(row) * stride_, stride_};
}

std::span<double> EmbeddingState::argument_vec(ArgumentId a) {
  if (a >= argument_rows_) throw DataError("argument id out of range");
  return {params_.data() + std::size_t(relation_rows_ + a) * stride_, stride_};
}

std::span<const double> EmbeddingState::argument_vec(ArgumentId a) const {
  if (a >= argument_rows_) throw DataError("argument id out of range");
  return {params_.data() + std::size_t(relation_rows_ + a) * stride_, stride_};
}

EmbeddingState EmbeddingState::make(ModelKind kind, std::uint32_t k,
                                    std::vector<std::uint32_t> alias_row,
                                    std::vector<std::uint8_t> alias_swap,
                                    std::uint32_t relation_rows,
                                    std::uint32_t num_arguments,
                                    std::uint64_t seed, int transe_norm) {
  if (k == 0) throw DataError("embedding dimension must be positive");
  if (transe_norm != 1 && transe_norm != 2)
    throw DataError("transe norm must be 1 or 2");
  EmbeddingState st;
  st.kind_ = kind;
  st.dim_ = k;
  st.stride_ = kind == ModelKind::Complex ? 2 * k : k;
  st.transe_norm_ = transe_norm;
  st.seed_ = seed;
  st.relation_rows_ = relation_rows;
  st.argument_rows_ = num_arguments;
  st.alias_row_ = std::move(alias_row);
  st.alias_swap_ = std::move(alias_swap);
  st.params_.resize(std::size_t(relation_rows + num_arguments) * st.stride_);
  std::mt19937_64 rng(seed);
  double bound = 0.5 / std::sqrt(double(k));
  for (double& p : st.params_) p = (2.0 * uniform01(rng) - 1.0) * bound;
  return st;
}

EmbeddingState init_random(ModelKind kind, std::uint32_t k,
                           std::uint32_t num_relations,
                           std::uint32_t num_arguments, std::uint64_t seed,
                           int transe_norm) {
  std::vector<std::uint32_t> alias(num_relations);
  for (std::uint32_t r = 0; r < num_relations; ++r) alias[r] = r;
  return EmbeddingState::make(kind, k, std::move(alias),
                              std::vector<std::uint8_t>(num_relations, 0),
                              num_relations, num_arguments, seed, transe_norm);
}

EmbeddingState init_for_corpus(ModelKind kind, std::uint32_t k,
                               const Corpus& corpus, std::uint64_t seed,
                               int transe_norm) {
  std::uint32_t nrel = corpus.num_relations();
  std::uint32_t rows = corpus.augmented() ? corpus.original_relation_count()
                                          : nrel;
  std::vector<std::uint32_t> alias(nrel);
  std::vector<std::uint8_t> swap(nrel, 0);
  for (std::uint32_t r = 0; r < nrel; ++r) {
    alias[r] = r < rows ? r : r - rows;
    swap[r] = r < rows ? 0 : 1;
  }
  return EmbeddingState::make(kind, k, std::move(alias), std::move(swap), rows,
                              corpus.num_arguments(), seed, transe_norm);
}

namespace {

double score_impl(const EmbeddingState& st, std::uint32_t row, ArgumentId s,
                  ArgumentId o) {
  auto wr = st.relation_row_vec(row);
  auto es = st.argument_vec(s);
  auto eo = st.argument_vec(o);
  std::uint32_t k = st.dim();
  switch (st.kind()) {
    case ModelKind::MatrixFact: {
      double ds = 0, dq = 0;
      for (std::uint32_t i = 0; i < k; ++i) ds += es[i] * wr[i];
      for (std::uint32_t i = 0; i < k; ++i) dq += eo[i] * wr[i];
      return ds + dq;
    }
    case ModelKind::TransE: {
      double acc = 0;
      if (st.transe_norm() == 2) {
        for (std::uint32_t i = 0; i < k; ++i) {
          double d = (es[i] + wr[i]) - eo[i];
          acc += d * d;
        }
        return -std::sqrt(acc);
      }
      for (std::uint32_t i = 0; i < k; ++i)
        acc += std::abs((es[i] + wr[i]) - eo[i]);
      return -acc;
    }
    case ModelKind::DistMult: {
      double acc = 0;
      for (std::uint32_t i = 0; i < k; ++i) acc += (es[i] * eo[i]) * wr[i];
      return acc;
    }
    case ModelKind::Complex: {
      double acc = 0;
      for (std::uint32_t i = 0; i < k; ++i) {
        double a = es[i], b = es[k + i];
        double c = wr[i], d = wr[k + i];
        double e = eo[i], f = eo[k + i];
        acc += (a * c - b * d) * e + (a * d + b * c) * f;
      }
      return acc;
    }
  }
  throw DataError("unknown model kind");
}

// Partials with respect to the base call's subject slot (gs), object slot
// (go) and relation row (gr). Returns phi.
double gradient_impl(const EmbeddingState& st, std::uint32_t row, ArgumentId s,
                     ArgumentId o, std::span<double> gs, std::span<double> go,
                     std::span<double> gr) {
  auto wr = st.relation_row_vec(row);
  auto es = st.argument_vec(s);
  auto eo = st.argument_vec(o);
  std::uint32_t k = st.dim();
  switch (st.kind()) {
    case ModelKind::MatrixFact: {
      double ds = 0, dq = 0;
      for (std::uint32_t i = 0; i < k; ++i) {
        ds += es[i] * wr[i];
        dq += eo[i] * wr[i];
        gs[i] = wr[i];
        go[i] = wr[i];
        gr[i] = es[i] + eo[i];
      }
      return ds + dq;
    }
    case ModelKind::TransE: {
      if (st.transe_norm() == 2) {
        double acc = 0;
        for (std::uint32_t i = 0; i < k; ++i) {
          double d = (es[i] + wr[i]) - eo[i];
          gs[i] = d;  // d stashed, scaled below
          acc += d * d;
        }
        double norm = std::sqrt(acc);
        if (norm == 0.0) {
          for (std::uint32_t i = 0; i < k; ++i) gs[i] = go[i] = gr[i] = 0.0;
          return 0.0;
        }
        for (std::uint32_t i = 0; i < k; ++i) {
          double u = gs[i] / norm;
          gs[i] = -u;
          go[i] = u;
          gr[i] = -u;
        }
        return -norm;
      }
      double acc = 0;
      for (std::uint32_t i = 0; i < k; ++i) {
        double d = (es[i] + wr[i]) - eo[i];
        acc += std::abs(d);
        double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        gs[i] = -sg;
        go[i] = sg;
        gr[i] = -sg;
      }
      return -acc;
    }
    case ModelKind::DistMult: {
      double acc = 0;
      for (std::uint32_t i = 0; i < k; ++i) {
        acc += (es[i] * eo[i]) * wr[i];
        gs[i] = wr[i] * eo[i];
        go[i] = wr[i] * es[i];
        gr[i] = es[i] * eo[i];
      }
      return acc;
    }
    case ModelKind::Complex: {
      double acc = 0;
      for (std::uint32_t i = 0; i < k; ++i) {
        double a = es[i], b = es[k + i];
        double c = wr[i], d = wr[k + i];
        double e = eo[i], f = eo[k + i];
        acc += (a * c - b * d) * e + (a * d + b * c) * f;
        gs[i] = c * e + d * f;
        gs[k + i] = c * f - d * e;
        gr[i] = a * e + b * f;
        gr[k + i] = a * f - b * e;
        go[i] = a * c - b * d;
        go[k + i] = b * c + a * d;
      }
      return acc;
    }
  }
  throw DataError("unknown model kind");
}

}  // namespace

double score(const EmbeddingState& state, RelationId r, ArgumentId s,
             ArgumentId o) {
  std::uint32_t row = state.relation_row(r);
  if (state.swaps_arguments(r)) std::swap(s, o);
  return score_impl(state, row, s, o);
}

double score_gradient(const EmbeddingState& state, RelationId r, ArgumentId s,
                      ArgumentId o, ScoreGradient& g) {
  std::uint32_t row = state.relation_row(r);
  g.subject.resize(state.stride());
  g.object.resize(state.stride());
  g.relation.resize(state.stride());
  if (state.swaps_arguments(r))
    return gradient_impl(state, row, o, s, g.object, g.subject, g.relation);
  return gradient_impl(state, row, s, o, g.subject, g.object, g.relation);
}

double cosine_similarity(const EmbeddingState& state, RelationId p,
                         RelationId q) {
  auto vp = state.relation_row_vec(state.relation_row(p));
  auto vq = state.relation_row_vec(state.relation_row(q));
  double dot = 0, np = 0, nq = 0;
  for (std::size_t i = 0; i < vp.size(); ++i) {
    dot += vp[i] * vq[i];
    np += vp[i] * vp[i];
    nq += vq[i] * vq[i];
  }
  if (np == 0.0 || nq == 0.0)
    throw DataError("cosine similarity of zero vector");
  return dot / (std::sqrt(np) * std::sqrt(nq));
}

void EmbeddingState::save(std::ostream& out) const {
  out.write(kCheckpointMagic, 4);
  binio::write_u8(out, kCheckpointVersion);
  binio::write_u8(out, std::uint8_t(kind_));
  binio::write_u8(out, std::uint8_t(transe_norm_));
  binio::write_u8(out, 0);
  binio::write_u32(out, dim_);
  binio::write_u32(out, num_relations());
  binio::write_u32(out, relation_rows_);
  binio::write_u32(out, argument_rows_);
  binio::write_u64(out, seed_);
  for (std::uint32_t r = 0; r < num_relations(); ++r) {
    binio::write_u32(out, alias_row_[r]);
    binio::write_u8(out, alias_swap_[r]);
  }
  for (double p : params_) binio::write_f64(out, p);
  if (!out) throw DataError("failed writing embedding checkpoint");
}

EmbeddingState EmbeddingState::load(std::istream& in) {
  char magic[4];
  binio::read_exact(in, magic, 4, "checkpoint magic");
  if (!std::equal(magic, magic + 4, kCheckpointMagic))
    throw DataError("not an embedding checkpoint (bad magic)");
  if (binio::read_u8(in, "checkpoint version") != kCheckpointVersion)
    throw DataError("unsupported checkpoint version");
  std::uint8_t kind = binio::read_u8(in, "model kind");
  if (kind > std::uint8_t(ModelKind::Complex))
    throw DataError("unknown model kind in checkpoint");
  std::uint8_t norm = binio::read_u8(in, "transe norm");
  binio::read_u8(in, "padding");

  EmbeddingState st;
  st.kind_ = ModelKind(kind);
  st.transe_norm_ = norm;
  if (norm != 1 && norm != 2) throw DataError("bad transe norm in checkpoint");
  st.dim_ = binio::read_u32(in, "dimension");
  if (st.dim_ == 0) throw DataError("zero dimension in checkpoint");
  st.stride_ = st.kind_ == ModelKind::Complex ? 2 * st.dim_ : st.dim_;
  std::uint32_t nrel = binio::read_u32(in, "relation count");
  st.relation_rows_ = binio::read_u32(in, "relation row count");
  st.argument_rows_ = binio::read_u32(in, "argument count");
  st.seed_ = binio::read_u64(in, "seed");
  st.alias_row_.resize(nrel);
  st.alias_swap_.resize(nrel);
  for (std::uint32_t r = 0; r < nrel; ++r) {
    st.alias_row_[r] = binio::read_u32(in, "alias row");
    st.alias_swap_[r] = binio::read_u8(in, "alias swap");
    if (st.alias_row_[r] >= st.relation_rows_ || st.alias_swap_[r] > 1)
      throw DataError("corrupt alias table in checkpoint");
  }
  st.params_.resize(std::size_t(st.relation_rows_ + st.argument_rows_) *
                    st.stride_);
  for (double& p : st.params_) {
    p = binio::read_f64(in, "parameter");
    if (!std::isfinite(p))
      throw DataError("non-finite parameter in checkpoint");
  }
  return st;
}

}  // namespace relimp
