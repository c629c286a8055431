#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relimp/error.hpp"

namespace relimp {

using RelationId = std::uint32_t;
using ArgumentId = std::uint32_t;

// Argument pair (s, o) of a binary relation instance.
struct Tuple {
  ArgumentId subject = 0;
  ArgumentId object = 0;
  friend bool operator==(const Tuple&, const Tuple&) = default;
  friend auto operator<=>(const Tuple&, const Tuple&) = default;
};

inline std::uint64_t tuple_key(const Tuple& t) {
  return (std::uint64_t(t.subject) << 32) | std::uint64_t(t.object);
}

// Relation name suffix reserved for synthetic argument-reversed relations.
inline constexpr std::string_view kReversedSuffix = "@rev";

class SymbolTable {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const;
  std::uint32_t size() const { return std::uint32_t(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

// One distinct (relation, tuple) pair with its observation multiplicity.
struct Observation {
  RelationId relation = 0;
  Tuple tuple;
  std::uint64_t count = 0;
};

// Immutable multiset of observed triples r(s, o) with count indices.
//
// Internals are fully deterministic: ids are assigned in first-appearance
// order of the input stream, per-relation tuple sets and the distinct
// observation list are kept sorted.
class Corpus {
 public:
  // Reads one "relation\tsubject\tobject" triple per line.
  static Corpus ingest(std::istream& in);

  std::uint64_t total() const { return total_; }  // n, with multiplicity
  std::uint32_t num_relations() const { return relations_.size(); }
  std::uint32_t num_arguments() const { return arguments_.size(); }

  const SymbolTable& relations() const { return relations_; }
  const SymbolTable& arguments() const { return arguments_; }

  // n_{r t}: multiplicity of r(t), 0 when unobserved.
  std::uint64_t count(RelationId r, const Tuple& t) const;
  // n_{r .}: total observations of relation r.
  std::uint64_t relation_count(RelationId r) const;
  // n_{. t}: total observations with argument tuple t, 0 when unobserved.
  std::uint64_t tuple_count(const Tuple& t) const;

  // T_r: distinct tuples of r, sorted ascending.
  const std::vector<Tuple>& tuples(RelationId r) const;
  // Multiplicities aligned with tuples(r).
  const std::vector<std::uint64_t>& tuple_multiplicities(RelationId r) const;
  // All distinct observed tuples, sorted ascending.
  const std::vector<Tuple>& all_tuples() const { return all_tuples_; }
  // Multiplicities aligned with all_tuples().
  const std::vector<std::uint64_t>& all_tuple_counts() const {
    return all_tuple_counts_;
  }
  // Distinct (relation, tuple, count) records sorted by (relation, tuple).
  const std::vector<Observation>& observations() const { return observations_; }

  // pmi(r, t) = log(n_{r t} * n / (n_{r .} * n_{. t})). Errors when n_{r t}=0.
  double pmi_weight(RelationId r, const Tuple& t) const;

  // Argument-reversal augmentation.
  bool augmented() const { return augmented_; }
  std::uint32_t original_relation_count() const { return original_relations_; }
  bool is_reversed_relation(RelationId r) const;
  // Involution r <-> r@rev. Errors when the corpus is not augmented.
  RelationId reversed(RelationId r) const;

  // Snapshot round trip; load(save(c)) is bit-identical.
  void save(std::ostream& out) const;
  static Corpus load(std::istream& in);

 private:
  Corpus() = default;
  void finalize();

  friend Corpus augment_reversed(const Corpus& base);

  SymbolTable relations_;
  SymbolTable arguments_;
  std::vector<Observation> observations_;
  std::uint64_t total_ = 0;
  bool augmented_ = false;
  std::uint32_t original_relations_ = 0;

  // Derived indices, rebuilt by finalize().
  std::vector<std::uint64_t> relation_counts_;
  std::vector<std::vector<Tuple>> relation_tuples_;
  std::vector<std::vector<std::uint64_t>> relation_tuple_counts_;
  std::vector<Tuple> all_tuples_;
  std::vector<std::uint64_t> all_tuple_counts_;
  std::unordered_map<std::uint64_t, std::uint64_t> tuple_count_index_;
};

// Doubles the corpus: every observation r(s, o) also becomes r@rev(o, s).
// Relation ids: reversed(r) = r + original_relation_count for original r.
Corpus augment_reversed(const Corpus& base);

}  // namespace relimp
