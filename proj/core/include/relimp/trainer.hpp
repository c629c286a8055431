#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "relimp/corpus.hpp"
#include "relimp/linkpred.hpp"

namespace relimp {

struct Triple {
  RelationId relation = 0;
  ArgumentId subject = 0;
  ArgumentId object = 0;
};

// BinaryCrossEntropy: sum_i log(1 + exp(-y_i phi_i)), y = +1/-1.
// PairwiseMargin:     sum_(i,j) max(0, margin + phi_neg_j - phi_pos_i).
// PairwiseAbsolute:   sum_(i,j) |phi_neg_j - phi_pos_i|.
enum class LossKind : std::uint8_t {
  BinaryCrossEntropy,
  PairwiseMargin,
  PairwiseAbsolute
};

struct TrainConfig {
  LossKind loss = LossKind::BinaryCrossEntropy;
  double margin = 1.0;
  std::uint32_t negatives_per_positive = 2;
  double learning_rate = 0.05;
  std::uint32_t batch_size = 128;
  std::uint32_t epochs = 100;
  // Early stop when max |parameter change| over an epoch falls below this.
  double convergence_threshold = 1e-5;
  std::uint64_t seed = 0;
  // workers > 1 samples batches on producer threads; faster but the batch
  // interleaving is no longer reproducible bit for bit.
  std::uint32_t workers = 1;
  int transe_norm = 2;
};

// negatives holds negatives_per_positive entries per positive, grouped:
// negatives of positives[i] are negatives[i*npp .. (i+1)*npp).
struct TrainBatch {
  std::vector<Triple> positives;
  std::vector<Triple> negatives;
  std::uint32_t negatives_per_positive = 0;
};

// Epoch-wise positive sampling: the observation multiset is expanded (one
// entry per count) and permuted; batches are cut sequentially, so every
// epoch covers the multiset exactly once. Negatives redraw both argument
// slots uniformly over the argument vocabulary; accidental positives are
// kept.
class BatchSampler {
 public:
  BatchSampler(const Corpus& corpus, std::uint32_t batch_size,
               std::uint32_t negatives_per_positive, std::uint64_t seed);
  TrainBatch next();
  std::uint64_t batches_per_epoch() const;
  std::uint64_t pool_size() const { return pool_.size(); }

 private:
  void reshuffle();
  const Corpus* corpus_;
  std::uint32_t batch_size_;
  std::uint32_t npp_;
  std::vector<Triple> pool_;
  std::size_t cursor_ = 0;
  std::mt19937_64 rng_;
};

// One-shot batch draw with the same semantics as a fresh BatchSampler.
TrainBatch sample_batch(const Corpus& corpus, const TrainConfig& config,
                        std::mt19937_64& rng);

double batch_loss(const EmbeddingState& state, const TrainBatch& batch,
                  LossKind loss, double margin);

// Dense d(batch loss)/d(parameters); grad must have parameters().size()
// entries and is fully overwritten. Returns the batch loss.
double batch_loss_gradient(const EmbeddingState& state,
                           const TrainBatch& batch, LossKind loss,
                           double margin, std::span<double> grad);

struct EpochStats {
  std::uint32_t epoch = 0;       // 1-based
  double mean_loss = 0;          // per proposition (positives + negatives)
  double max_delta = 0;          // max |parameter change| this epoch
  double wall_ms = 0;
};
using EpochCallback = std::function<void(const EpochStats&)>;

// Plain SGD over sampled batches. Throws NumericError when the loss or an
// updated parameter turns non-finite.
EmbeddingState train(const Corpus& corpus, ModelKind kind, std::uint32_t k,
                     const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

// Mean reciprocal rank over corruptions of each test triple: both argument
// slots are corrupted one at a time over the whole vocabulary, giving
// 2|A| - 1 distinct candidates including the true triple. Rank is
// pessimistic (ties count against the true triple). With filtered set,
// corruptions observed in the corpus are dropped from the candidate list;
// the true triple always stays.
double mean_reciprocal_rank(const EmbeddingState& state,
                            std::span<const Triple> test, const Corpus& corpus,
                            bool filtered);

}  // namespace relimp
