#include "relimp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "mathutil.hpp"

namespace relimp {

namespace {

using mathutil::sigmoid;
using mathutil::softplus;
using mathutil::splitmix64;
using mathutil::uniform_below;

void fisher_yates(std::vector<Triple>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

std::vector<Triple> expand_pool(const Corpus& corpus) {
  std::vector<Triple> pool;
  pool.reserve(corpus.total());
  for (const Observation& ob : corpus.observations())
    for (std::uint64_t i = 0; i < ob.count; ++i)
      pool.push_back({ob.relation, ob.tuple.subject, ob.tuple.object});
  return pool;
}

void draw_negatives(TrainBatch& batch, std::uint32_t num_arguments,
                    std::mt19937_64& rng) {
  batch.negatives.clear();
  batch.negatives.reserve(batch.positives.size() *
                          batch.negatives_per_positive);
  for (const Triple& pos : batch.positives)
    for (std::uint32_t j = 0; j < batch.negatives_per_positive; ++j) {
      Triple neg;
      neg.relation = pos.relation;
      neg.subject = ArgumentId(uniform_below(rng, num_arguments));
      neg.object = ArgumentId(uniform_below(rng, num_arguments));
      batch.negatives.push_back(neg);
    }
}

void check_batch(const TrainBatch& batch) {
  if (batch.positives.empty()) throw DataError("empty training batch");
  if (batch.negatives_per_positive == 0 ||
      batch.negatives.size() !=
          batch.positives.size() * batch.negatives_per_positive)
    throw DataError("batch negatives do not match negatives_per_positive");
}

}  // namespace

BatchSampler::BatchSampler(const Corpus& corpus, std::uint32_t batch_size,
                           std::uint32_t negatives_per_positive,
                           std::uint64_t seed)
    : corpus_(&corpus),
      batch_size_(batch_size),
      npp_(negatives_per_positive),
      rng_(seed) {
  if (batch_size_ == 0) throw DataError("batch size must be positive");
  if (npp_ == 0) throw DataError("negatives_per_positive must be positive");
  pool_ = expand_pool(corpus);
  reshuffle();
}

void BatchSampler::reshuffle() {
  fisher_yates(pool_, rng_);
  cursor_ = 0;
}

std::uint64_t BatchSampler::batches_per_epoch() const {
  return (pool_.size() + batch_size_ - 1) / batch_size_;
}

TrainBatch BatchSampler::next() {
  if (cursor_ >= pool_.size()) reshuffle();
  std::size_t take = std::min<std::size_t>(batch_size_, pool_.size() - cursor_);
  TrainBatch batch;
  batch.negatives_per_positive = npp_;
  batch.positives.assign(pool_.begin() + std::ptrdiff_t(cursor_),
                         pool_.begin() + std::ptrdiff_t(cursor_ + take));
  cursor_ += take;
  draw_negatives(batch, corpus_->num_arguments(), rng_);
  return batch;
}

TrainBatch sample_batch(const Corpus& corpus, const TrainConfig& config,
                        std::mt19937_64& rng) {
  if (config.batch_size == 0) throw DataError("batch size must be positive");
  if (config.negatives_per_positive == 0)
    throw DataError("negatives_per_positive must be positive");
  std::vector<Triple> pool = expand_pool(corpus);
  fisher_yates(pool, rng);
  std::size_t take = std::min<std::size_t>(config.batch_size, pool.size());
  TrainBatch batch;
  batch.negatives_per_positive = config.negatives_per_positive;
  batch.positives.assign(pool.begin(), pool.begin() + std::ptrdiff_t(take));
  draw_negatives(batch, corpus.num_arguments(), rng);
  return batch;
}

double batch_loss(const EmbeddingState& state, const TrainBatch& batch,
                  LossKind loss, double margin) {
  check_batch(batch);
  double total = 0;
  std::uint32_t npp = batch.negatives_per_positive;
  if (loss == LossKind::BinaryCrossEntropy) {
    for (const Triple& t : batch.positives)
      total += softplus(-score(state, t.relation, t.subject, t.object));
    for (const Triple& t : batch.negatives)
      total += softplus(score(state, t.relation, t.subject, t.object));
    return total;
  }
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const Triple& p = batch.positives[i];
    double phi_pos = score(state, p.relation, p.subject, p.object);
    for (std::uint32_t j = 0; j < npp; ++j) {
      const Triple& q = batch.negatives[i * npp + j];
      double phi_neg = score(state, q.relation, q.subject, q.object);
      if (loss == LossKind::PairwiseMargin)
        total += std::max(0.0, margin + phi_neg - phi_pos);
      else
        total += std::abs(phi_neg - phi_pos);
    }
  }
  return total;
}

namespace {

// Accumulates d(loss)/d(row) contributions; Adder is either dense (gradient
// checks) or sparse-touched (SGD updates).
template <typename Adder>
double accumulate_gradient(const EmbeddingState& state,
                           const TrainBatch& batch, LossKind loss,
                           double margin, Adder&& add) {
  check_batch(batch);
  std::uint32_t npp = batch.negatives_per_positive;
  std::uint32_t arg_base = state.num_relation_rows();
  ScoreGradient g;
  double total = 0;

  auto add_triple = [&](const Triple& t, const ScoreGradient& sg,
                        double coeff) {
    add(state.relation_row(t.relation), sg.relation, coeff);
    add(arg_base + t.subject, sg.subject, coeff);
    add(arg_base + t.object, sg.object, coeff);
  };

  if (loss == LossKind::BinaryCrossEntropy) {
    auto bce = [&](const Triple& t, double y) {
      double phi = score_gradient(state, t.relation, t.subject, t.object, g);
      total += softplus(-y * phi);
      add_triple(t, g, -y * sigmoid(-y * phi));
    };
    for (const Triple& t : batch.positives) bce(t, 1.0);
    for (const Triple& t : batch.negatives) bce(t, -1.0);
    return total;
  }

  ScoreGradient gp;
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const Triple& p = batch.positives[i];
    double phi_pos =
        score_gradient(state, p.relation, p.subject, p.object, gp);
    double pos_coeff = 0;
    for (std::uint32_t j = 0; j < npp; ++j) {
      const Triple& q = batch.negatives[i * npp + j];
      double phi_neg =
          score_gradient(state, q.relation, q.subject, q.object, g);
      double neg_coeff = 0;
      if (loss == LossKind::PairwiseMargin) {
        double h = margin + phi_neg - phi_pos;
        if (h > 0.0) {
          total += h;
          neg_coeff = 1.0;
        }
      } else {
        double d = phi_neg - phi_pos;
        total += std::abs(d);
        neg_coeff = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      }
      if (neg_coeff != 0.0) add_triple(q, g, neg_coeff);
      pos_coeff -= neg_coeff;
    }
    if (pos_coeff != 0.0) add_triple(p, gp, pos_coeff);
  }
  return total;
}

}  // namespace

double batch_loss_gradient(const EmbeddingState& state,
                           const TrainBatch& batch, LossKind loss,
                           double margin, std::span<double> grad) {
  if (grad.size() != state.parameters().size())
    throw DataError("gradient buffer size mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);
  std::uint32_t stride = state.stride();
  return accumulate_gradient(
      state, batch, loss, margin,
      [&](std::uint32_t row, std::span<const double> gr, double coeff) {
        double* dst = grad.data() + std::size_t(row) * stride;
        for (std::uint32_t i = 0; i < stride; ++i) dst[i] += coeff * gr[i];
      });
}

namespace {

struct SparseGrad {
  std::vector<double> grad;
  std::vector<std::uint32_t> touched;
  std::vector<std::uint8_t> dirty;
  std::uint32_t stride = 0;

  void init(const EmbeddingState& state) {
    grad.assign(state.parameters().size(), 0.0);
    dirty.assign(state.parameters().size() / state.stride(), 0);
    stride = state.stride();
    touched.clear();
  }
  void add(std::uint32_t row, std::span<const double> gr, double coeff) {
    if (!dirty[row]) {
      dirty[row] = 1;
      touched.push_back(row);
    }
    double* dst = grad.data() + std::size_t(row) * stride;
    for (std::uint32_t i = 0; i < stride; ++i) dst[i] += coeff * gr[i];
  }
  void apply_and_clear(EmbeddingState& state, double lr, std::uint32_t epoch) {
    std::span<double> params = state.parameters();
    for (std::uint32_t row : touched) {
      double* p = params.data() + std::size_t(row) * stride;
      double* gr = grad.data() + std::size_t(row) * stride;
      for (std::uint32_t i = 0; i < stride; ++i) {
        p[i] -= lr * gr[i];
        if (!std::isfinite(p[i]))
          throw NumericError("non-finite parameter at epoch " +
                             std::to_string(epoch));
        gr[i] = 0.0;
      }
      dirty[row] = 0;
    }
    touched.clear();
  }
};

void validate_config(const TrainConfig& cfg) {
  if (cfg.learning_rate < 0.0 || !std::isfinite(cfg.learning_rate))
    throw DataError("learning rate must be non-negative and finite");
  if (!std::isfinite(cfg.margin)) throw DataError("margin must be finite");
  if (cfg.epochs == 0) throw DataError("epochs must be positive");
  if (cfg.batch_size == 0) throw DataError("batch size must be positive");
  if (cfg.negatives_per_positive == 0)
    throw DataError("negatives_per_positive must be positive");
  if (cfg.convergence_threshold < 0.0 ||
      !std::isfinite(cfg.convergence_threshold))
    throw DataError("convergence threshold must be non-negative");
  if (cfg.workers == 0) throw DataError("workers must be positive");
  if (cfg.transe_norm != 1 && cfg.transe_norm != 2)
    throw DataError("transe norm must be 1 or 2");
}

// Bounded handoff between sampler threads and the SGD loop. A producer
// failure closes the queue and surfaces its exception at the next pop.
class BatchQueue {
 public:
  explicit BatchQueue(std::size_t cap) : cap_(cap) {}

  bool push(TrainBatch&& b) {
    std::unique_lock lock(m_);
    room_.wait(lock, [&] { return q_.size() < cap_ || closed_; });
    if (closed_) return false;
    q_.push_back(std::move(b));
    filled_.notify_one();
    return true;
  }
  TrainBatch pop() {
    std::unique_lock lock(m_);
    filled_.wait(lock, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) {
      if (error_) std::rethrow_exception(error_);
      throw DataError("batch producers stopped early");
    }
    TrainBatch b = std::move(q_.front());
    q_.pop_front();
    room_.notify_one();
    return b;
  }
  void close() {
    std::lock_guard lock(m_);
    closed_ = true;
    room_.notify_all();
    filled_.notify_all();
  }
  void fail(std::exception_ptr e) {
    std::lock_guard lock(m_);
    if (!error_) error_ = e;
    closed_ = true;
    room_.notify_all();
    filled_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable room_, filled_;
  std::deque<TrainBatch> q_;
  std::size_t cap_;
  bool closed_ = false;
  std::exception_ptr error_;
};

}  // namespace

EmbeddingState train(const Corpus& corpus, ModelKind kind, std::uint32_t k,
                     const TrainConfig& cfg, const EpochCallback& on_epoch) {
  validate_config(cfg);
  EmbeddingState state =
      init_for_corpus(kind, k, corpus, cfg.seed, cfg.transe_norm);
  std::uint64_t sampler_seed = splitmix64(cfg.seed ^ 0x9E3779B97F4A7C15ull);

  SparseGrad sg;
  sg.init(state);
  std::vector<double> snapshot(state.parameters().begin(),
                               state.parameters().end());

  auto run_epochs = [&](auto&& next_batch, std::uint64_t batches_per_epoch) {
    for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
      auto t0 = std::chrono::steady_clock::now();
      double loss_sum = 0;
      std::uint64_t props = 0;
      for (std::uint64_t b = 0; b < batches_per_epoch; ++b) {
        TrainBatch batch = next_batch();
        double loss = accumulate_gradient(
            state, batch, cfg.loss, cfg.margin,
            [&](std::uint32_t row, std::span<const double> gr, double coeff) {
              sg.add(row, gr, coeff);
            });
        if (!std::isfinite(loss))
          throw NumericError("non-finite loss at epoch " +
                             std::to_string(epoch));
        sg.apply_and_clear(state, cfg.learning_rate, epoch);
        loss_sum += loss;
        props += batch.positives.size() + batch.negatives.size();
      }
      std::span<const double> params = state.parameters();
      double max_delta = 0;
      for (std::size_t i = 0; i < params.size(); ++i) {
        max_delta = std::max(max_delta, std::abs(params[i] - snapshot[i]));
        snapshot[i] = params[i];
      }
      double wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
      if (on_epoch)
        on_epoch({epoch, loss_sum / double(props), max_delta, wall_ms});
      if (max_delta < cfg.convergence_threshold) break;
    }
  };

  if (cfg.workers <= 1) {
    BatchSampler sampler(corpus, cfg.batch_size, cfg.negatives_per_positive,
                         sampler_seed);
    run_epochs([&] { return sampler.next(); }, sampler.batches_per_epoch());
    return state;
  }

  BatchQueue queue(std::size_t(cfg.workers) * 4);
  std::vector<std::thread> producers;
  producers.reserve(cfg.workers);
  for (std::uint32_t w = 0; w < cfg.workers; ++w)
    producers.emplace_back([&, w] {
      try {
        BatchSampler sampler(corpus, cfg.batch_size,
                             cfg.negatives_per_positive,
                             splitmix64(sampler_seed + w));
        while (queue.push(sampler.next())) {
        }
      } catch (...) {
        queue.fail(std::current_exception());
      }
    });
  std::uint64_t bpe =
      (corpus.total() + cfg.batch_size - 1) / cfg.batch_size;
  try {
    run_epochs([&] { return queue.pop(); }, bpe);
  } catch (...) {
    queue.close();
    for (auto& t : producers) t.join();
    throw;
  }
  queue.close();
  for (auto& t : producers) t.join();
  return state;
}

double mean_reciprocal_rank(const EmbeddingState& state,
                            std::span<const Triple> test, const Corpus& corpus,
                            bool filtered) {
  if (test.empty()) throw DataError("empty test set");
  if (state.num_relations() < corpus.num_relations() ||
      state.num_arguments() < corpus.num_arguments())
    throw DataError("embedding vocabulary does not cover the corpus");
  std::uint32_t m = corpus.num_arguments();
  double acc = 0;
  for (const Triple& t : test) {
    if (t.relation >= corpus.num_relations() || t.subject >= m ||
        t.object >= m)
      throw DataError("test triple outside the vocabulary");
    double phi_true = score(state, t.relation, t.subject, t.object);
    std::uint64_t above = 0;
    for (ArgumentId s = 0; s < m; ++s) {
      if (s == t.subject) continue;
      if (filtered && corpus.count(t.relation, {s, t.object}) > 0) continue;
      if (score(state, t.relation, s, t.object) >= phi_true) ++above;
    }
    for (ArgumentId o = 0; o < m; ++o) {
      if (o == t.object) continue;
      if (filtered && corpus.count(t.relation, {t.subject, o}) > 0) continue;
      if (score(state, t.relation, t.subject, o) >= phi_true) ++above;
    }
    acc += 1.0 / double(1 + above);
  }
  return acc / double(test.size());
}

}  // namespace relimp
