#include "relimp/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "binio.hpp"

namespace relimp {

namespace {
constexpr char kSnapshotMagic[4] = {'R', 'L', 'C', 'S'};
constexpr std::uint8_t kSnapshotVersion = 1;

bool ends_with_reserved(std::string_view name) {
  return name.size() >= kReversedSuffix.size() &&
         name.substr(name.size() - kReversedSuffix.size()) == kReversedSuffix;
}
}  // namespace

std::uint32_t SymbolTable::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  std::uint32_t id = std::uint32_t(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> SymbolTable::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& SymbolTable::name(std::uint32_t id) const {
  if (id >= names_.size()) throw DataError("symbol id out of range");
  return names_[id];
}

Corpus Corpus::ingest(std::istream& in) {
  Corpus c;
  struct RawTriple {
    RelationId r;
    Tuple t;
  };
  std::vector<RawTriple> raw;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t tab1 = line.find('\t');
    std::size_t tab2 = tab1 == std::string::npos
                           ? std::string::npos
                           : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        line.find('\t', tab2 + 1) != std::string::npos)
      throw ParseError("expected 3 tab-separated fields", lineno);
    std::string_view rel(line.data(), tab1);
    std::string_view subj(line.data() + tab1 + 1, tab2 - tab1 - 1);
    std::string_view obj(line.data() + tab2 + 1, line.size() - tab2 - 1);
    if (rel.empty() || subj.empty() || obj.empty())
      throw ParseError("empty field in triple", lineno);
    if (ends_with_reserved(rel))
      throw ParseError("relation name uses reserved suffix '@rev'", lineno);
    RawTriple rt;
    rt.r = c.relations_.intern(rel);
    rt.t.subject = c.arguments_.intern(subj);
    rt.t.object = c.arguments_.intern(obj);
    raw.push_back(rt);
  }
  if (raw.empty()) throw DataError("empty corpus");

  std::sort(raw.begin(), raw.end(), [](const RawTriple& a, const RawTriple& b) {
    if (a.r != b.r) return a.r < b.r;
    return a.t < b.t;
  });
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    while (j < raw.size() && raw[j].r == raw[i].r && raw[j].t == raw[i].t) ++j;
    c.observations_.push_back({raw[i].r, raw[i].t, j - i});
    i = j;
  }
  c.original_relations_ = c.relations_.size();
  c.finalize();
  return c;
}

void Corpus::finalize() {
  std::uint32_t nrel = relations_.size();
  total_ = 0;
  relation_counts_.assign(nrel, 0);
  relation_tuples_.assign(nrel, {});
  relation_tuple_counts_.assign(nrel, {});
  all_tuples_.clear();
  all_tuple_counts_.clear();
  tuple_count_index_.clear();

  for (const Observation& ob : observations_) {
    total_ += ob.count;
    relation_counts_[ob.relation] += ob.count;
    relation_tuples_[ob.relation].push_back(ob.tuple);
    relation_tuple_counts_[ob.relation].push_back(ob.count);
    tuple_count_index_[tuple_key(ob.tuple)] += ob.count;
  }
  all_tuples_.reserve(tuple_count_index_.size());
  for (const auto& [key, cnt] : tuple_count_index_)
    all_tuples_.push_back({ArgumentId(key >> 32), ArgumentId(key & 0xffffffff)});
  std::sort(all_tuples_.begin(), all_tuples_.end());
  all_tuple_counts_.reserve(all_tuples_.size());
  for (const Tuple& t : all_tuples_)
    all_tuple_counts_.push_back(tuple_count_index_.at(tuple_key(t)));
}

std::uint64_t Corpus::count(RelationId r, const Tuple& t) const {
  if (r >= num_relations()) throw DataError("relation id out of range");
  const auto& ts = relation_tuples_[r];
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  if (it == ts.end() || *it != t) return 0;
  return relation_tuple_counts_[r][std::size_t(it - ts.begin())];
}

std::uint64_t Corpus::relation_count(RelationId r) const {
  if (r >= num_relations()) throw DataError("relation id out of range");
  return relation_counts_[r];
}

std::uint64_t Corpus::tuple_count(const Tuple& t) const {
  auto it = tuple_count_index_.find(tuple_key(t));
  return it == tuple_count_index_.end() ? 0 : it->second;
}

const std::vector<Tuple>& Corpus::tuples(RelationId r) const {
  if (r >= num_relations()) throw DataError("relation id out of range");
  return relation_tuples_[r];
}

const std::vector<std::uint64_t>& Corpus::tuple_multiplicities(
    RelationId r) const {
  if (r >= num_relations()) throw DataError("relation id out of range");
  return relation_tuple_counts_[r];
}

double Corpus::pmi_weight(RelationId r, const Tuple& t) const {
  std::uint64_t nrt = count(r, t);
  if (nrt == 0) throw DataError("pmi weight of unobserved (relation, tuple)");
  double num = double(nrt) * double(total_);
  double den = double(relation_counts_[r]) * double(tuple_count(t));
  return std::log(num / den);
}

bool Corpus::is_reversed_relation(RelationId r) const {
  if (r >= num_relations()) throw DataError("relation id out of range");
  return augmented_ && r >= original_relations_;
}

RelationId Corpus::reversed(RelationId r) const {
  if (!augmented_) throw DataError("corpus is not reversal-augmented");
  if (r >= num_relations()) throw DataError("relation id out of range");
  return r < original_relations_ ? r + original_relations_
                                 : r - original_relations_;
}

Corpus augment_reversed(const Corpus& base) {
  if (base.augmented_) throw DataError("corpus is already reversal-augmented");
  Corpus c;
  std::uint32_t nrel = base.num_relations();
  for (std::uint32_t r = 0; r < nrel; ++r)
    c.relations_.intern(base.relations_.name(r));
  for (std::uint32_t r = 0; r < nrel; ++r)
    c.relations_.intern(base.relations_.name(r) + std::string(kReversedSuffix));
  for (std::uint32_t a = 0; a < base.num_arguments(); ++a)
    c.arguments_.intern(base.arguments_.name(a));

  c.observations_ = base.observations_;
  for (const Observation& ob : base.observations_)
    c.observations_.push_back(
        {ob.relation + nrel, {ob.tuple.object, ob.tuple.subject}, ob.count});
  std::sort(c.observations_.begin(), c.observations_.end(),
            [](const Observation& a, const Observation& b) {
              if (a.relation != b.relation) return a.relation < b.relation;
              return a.tuple < b.tuple;
            });
  c.augmented_ = true;
  c.original_relations_ = nrel;
  c.finalize();
  return c;
}

void Corpus::save(std::ostream& out) const {
  out.write(kSnapshotMagic, 4);
  binio::write_u8(out, kSnapshotVersion);
  binio::write_u8(out, augmented_ ? 1 : 0);
  binio::write_u32(out, num_relations());
  binio::write_u32(out, original_relations_);
  binio::write_u32(out, num_arguments());
  binio::write_u64(out, std::uint64_t(observations_.size()));
  for (std::uint32_t r = 0; r < num_relations(); ++r)
    binio::write_string(out, relations_.name(r));
  for (std::uint32_t a = 0; a < num_arguments(); ++a)
    binio::write_string(out, arguments_.name(a));
  for (const Observation& ob : observations_) {
    binio::write_u32(out, ob.relation);
    binio::write_u32(out, ob.tuple.subject);
    binio::write_u32(out, ob.tuple.object);
    binio::write_u64(out, ob.count);
  }
  if (!out) throw DataError("failed writing corpus snapshot");
}

Corpus Corpus::load(std::istream& in) {
  char magic[4];
  binio::read_exact(in, magic, 4, "corpus snapshot magic");
  if (!std::equal(magic, magic + 4, kSnapshotMagic))
    throw DataError("not a corpus snapshot (bad magic)");
  if (binio::read_u8(in, "snapshot version") != kSnapshotVersion)
    throw DataError("unsupported corpus snapshot version");
  std::uint8_t flags = binio::read_u8(in, "snapshot flags");

  Corpus c;
  std::uint32_t nrel = binio::read_u32(in, "relation count");
  c.original_relations_ = binio::read_u32(in, "original relation count");
  std::uint32_t narg = binio::read_u32(in, "argument count");
  std::uint64_t nobs = binio::read_u64(in, "observation count");
  c.augmented_ = (flags & 1) != 0;
  if (nobs == 0) throw DataError("empty corpus snapshot");
  if (c.augmented_ ? c.original_relations_ * 2 != nrel
                   : c.original_relations_ != nrel)
    throw DataError("inconsistent relation counts in corpus snapshot");

  for (std::uint32_t r = 0; r < nrel; ++r) {
    std::string name = binio::read_string(in, "relation name");
    if (c.relations_.intern(name) != r)
      throw DataError("duplicate relation name in corpus snapshot");
  }
  for (std::uint32_t a = 0; a < narg; ++a) {
    std::string name = binio::read_string(in, "argument name");
    if (c.arguments_.intern(name) != a)
      throw DataError("duplicate argument name in corpus snapshot");
  }
  c.observations_.reserve(nobs);
  for (std::uint64_t i = 0; i < nobs; ++i) {
    Observation ob;
    ob.relation = binio::read_u32(in, "observation relation");
    ob.tuple.subject = binio::read_u32(in, "observation subject");
    ob.tuple.object = binio::read_u32(in, "observation object");
    ob.count = binio::read_u64(in, "observation count");
    if (ob.relation >= nrel || ob.tuple.subject >= narg ||
        ob.tuple.object >= narg || ob.count == 0)
      throw DataError("corrupt observation record in corpus snapshot");
    if (!c.observations_.empty()) {
      const Observation& prev = c.observations_.back();
      if (std::pair(ob.relation, ob.tuple) <= std::pair(prev.relation, prev.tuple))
        throw DataError("observation records out of order in corpus snapshot");
    }
    c.observations_.push_back(ob);
  }
  c.finalize();
  return c;
}

}  // namespace relimp
