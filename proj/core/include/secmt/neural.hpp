#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "secmt/random.hpp"

namespace secmt::neural {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

// Decoder-side inputs of the cache scorer, all of dimension d.
struct DecoderContext {
  Vector decoder_state;   // h_t: output of the final feed-forward block
  Vector source_context;  // c_e: encoder-decoder attention output
  Vector output_history;  // y_<t: self-attention output

  std::size_t dim() const { return static_cast<std::size_t>(decoder_state.size()); }
  Vector concat() const;  // [h_t; c_e; y_<t]
  bool valid(std::size_t d) const;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;
};

// tanh hidden layers and a linear scalar output. Inputs are split into a
// part shared by every item and a per-item column, so the score network can
// evaluate all cache words against one decoder context in a single pass.
class FeedForward {
 public:
  FeedForward() = default;
  // Weights uniform in ±sqrt(6 / (fan_in + fan_out)), biases zero.
  FeedForward(std::size_t input_dim, std::span<const std::size_t> hidden, Rng& rng);
  static FeedForward zeros(std::size_t input_dim, std::span<const std::size_t> hidden);
  static FeedForward zeros_like(const FeedForward& other);

  std::size_t input_dim() const;
  std::vector<std::size_t> hidden_dims() const;
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  struct Trace {
    std::vector<Matrix> hidden;  // post-tanh activations per hidden layer
  };

  // One output per column of `items`; the input of item i is
  // [shared; items.col(i)]. items may have zero rows.
  RowVector forward(const Vector& shared, const Matrix& items,
                    Trace* trace = nullptr) const;

  // Adds d(loss)/d(params) into `grads` given d(loss)/d(outputs); returns
  // d(loss)/d(items).
  Matrix backward(const Vector& shared, const Matrix& items, const Trace& trace,
                  const RowVector& d_out, FeedForward& grads) const;

  void add_scaled(const FeedForward& other, double scale);

 private:
  std::vector<DenseLayer> layers_;
};

struct ScorerConfig {
  std::size_t embedding_dim = 512;
  std::vector<std::size_t> score_hidden{1000, 500};
  std::vector<std::size_t> gate_hidden{500, 200};
  std::uint64_t seed = 1;
  bool freeze_embeddings = false;

  void validate() const;
};

// Rows are vocabulary ids.
using EmbeddingTable = Matrix;

struct CacheScorerParams {
  ScorerConfig config;
  // Same storage as the base model's output embeddings.
  std::shared_ptr<EmbeddingTable> embeddings;
  FeedForward score_net;  // input [h_t; c_e; y_<t; emb(y_c)], 4d
  FeedForward gate_net;   // input [h_t; c_e; y_<t], 3d

  std::size_t vocab_size() const {
    return static_cast<std::size_t>(embeddings->rows());
  }
};

CacheScorerParams init_params(const ScorerConfig& config,
                              std::shared_ptr<EmbeddingTable> embeddings);

// score(y_c) = f_cache(h_t, c_e, y_<t, y_c) for each cache word. An empty
// cache yields nullopt: the caller then uses the base distribution alone.
std::optional<Vector> score_cache(const CacheScorerParams& params,
                                  const DecoderContext& context,
                                  std::span<const std::size_t> cache_ids);

// Softmax with max subtraction.
Vector cache_distribution(const Vector& scores);

// g = sigmoid(f_gate(h_t, c_e, y_<t)).
double gate(const CacheScorerParams& params, const DecoderContext& context);

// g * p_nmt + (1 - g) * p_cache scattered onto the vocabulary. Cache ids
// must be unique.
Vector combine(const Vector& p_nmt, const Vector& p_cache,
               std::span<const std::size_t> cache_ids, double g);

// The full interpolated next-token distribution; g is 1 for an empty cache.
Vector predict(const CacheScorerParams& params, const DecoderContext& context,
               std::span<const std::size_t> cache_ids, const Vector& p_nmt);

struct TrainingExample {
  DecoderContext context;
  std::vector<std::size_t> cache_ids;
  Vector p_nmt;  // frozen base-model distribution
  std::size_t gold = 0;
};

struct Gradients {
  FeedForward score_net;
  FeedForward gate_net;
  std::map<std::size_t, Vector> embeddings;  // touched rows only

  static Gradients zeros_like(const CacheScorerParams& params);
};

// -log p(gold).
double example_loss(const CacheScorerParams& params, const TrainingExample& example);
double mean_loss(const CacheScorerParams& params, std::span<const TrainingExample> batch);

// Exact gradients of the mean loss over the batch; returns the mean loss.
double batch_gradients(const CacheScorerParams& params,
                       std::span<const TrainingExample> batch, Gradients& grads);

// One gradient-descent step on the mean loss. Returns the loss before the
// update. The base model distribution is never modified.
double train_step(CacheScorerParams& params, std::span<const TrainingExample> batch,
                  double learning_rate);

// Deterministic stand-in for a trained translation model: decoder features
// come from hashed bags of the history and source words, and p_nmt is an
// add-one smoothed bigram model over the target vocabulary.
class MockBaseModel {
 public:
  MockBaseModel(std::size_t vocab_size, std::size_t dim, std::uint64_t seed,
                std::size_t bos_id = 0);

  // Bigram counts from training target sentences (ids, without BOS).
  void fit(std::span<const std::vector<std::size_t>> sentences);

  struct Output {
    DecoderContext context;
    Vector p_nmt;
  };
  Output operator()(std::span<const std::size_t> history,
                    std::span<const std::string> source_words) const;

  double bigram_probability(std::size_t previous, std::size_t next) const;

  std::shared_ptr<EmbeddingTable> embeddings() const { return embeddings_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }
  std::size_t bos_id() const { return bos_id_; }

 private:
  double feature(std::uint64_t key, std::size_t j) const;

  std::size_t vocab_size_;
  std::size_t dim_;
  std::uint64_t seed_;
  std::size_t bos_id_;
  std::vector<std::map<std::size_t, std::uint32_t>> successors_;
  std::vector<std::uint64_t> context_totals_;
  std::shared_ptr<EmbeddingTable> embeddings_;
};

enum class TopicSource { gold, projected };

// Exactly round(ratio * n) units get the gold target topic; which ones is a
// seeded shuffle.
std::vector<TopicSource> topic_schedule(std::size_t n_units, double ratio,
                                        std::uint64_t seed);

void write_checkpoint(std::ostream& out, const CacheScorerParams& params,
                      std::string_view config_hash = {});
CacheScorerParams read_checkpoint(std::istream& in);

}  // namespace secmt::neural
