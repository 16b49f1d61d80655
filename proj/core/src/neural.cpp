#include "secmt/neural.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "secmt/artifact.hpp"
#include "secmt/error.hpp"
#include "secmt/text.hpp"

namespace secmt::neural {

Vector DecoderContext::concat() const {
  Vector out(decoder_state.size() + source_context.size() + output_history.size());
  out << decoder_state, source_context, output_history;
  return out;
}

bool DecoderContext::valid(std::size_t d) const {
  const auto n = static_cast<Eigen::Index>(d);
  return decoder_state.size() == n && source_context.size() == n &&
         output_history.size() == n && decoder_state.allFinite() &&
         source_context.allFinite() && output_history.allFinite();
}

// --- feed-forward --------------------------------------------------------

namespace {

std::vector<std::size_t> layer_sizes(std::size_t input_dim,
                                     std::span<const std::size_t> hidden) {
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return sizes;
}

}  // namespace

FeedForward::FeedForward(std::size_t input_dim, std::span<const std::size_t> hidden,
                         Rng& rng) {
  const auto sizes = layer_sizes(input_dim, hidden);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(sizes[l]);
    const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
    // Row-major fill so the draw order does not depend on Eigen's storage.
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) {
        layer.weights(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
      }
    }
    layers_.push_back(std::move(layer));
  }
}

FeedForward FeedForward::zeros(std::size_t input_dim,
                               std::span<const std::size_t> hidden) {
  FeedForward net;
  const auto sizes = layer_sizes(input_dim, hidden);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(sizes[l]);
    const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
    net.layers_.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
  }
  return net;
}

FeedForward FeedForward::zeros_like(const FeedForward& other) {
  return zeros(other.input_dim(), other.hidden_dims());
}

std::size_t FeedForward::input_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.cols());
}

std::vector<std::size_t> FeedForward::hidden_dims() const {
  std::vector<std::size_t> dims;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    dims.push_back(static_cast<std::size_t>(layers_[l].weights.rows()));
  }
  return dims;
}

std::size_t FeedForward::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  }
  return n;
}

RowVector FeedForward::forward(const Vector& shared, const Matrix& items,
                               Trace* trace) const {
  const Eigen::Index n = items.cols();
  const Eigen::Index shared_dim = shared.size();
  const Eigen::Index item_dim = items.rows();
  if (layers_.empty() || shared_dim + item_dim != layers_.front().weights.cols()) {
    fail(ErrorKind::invariant, "feed-forward input dimension mismatch");
  }
  if (trace) trace->hidden.clear();

  const auto& first = layers_.front();
  Matrix z = (first.weights.leftCols(shared_dim) * shared + first.bias).replicate(1, n);
  if (item_dim > 0) z.noalias() += first.weights.rightCols(item_dim) * items;

  for (std::size_t l = 1; l < layers_.size(); ++l) {
    Matrix a = z.array().tanh().matrix();
    z = layers_[l].weights * a;
    z.colwise() += layers_[l].bias;
    if (trace) trace->hidden.push_back(std::move(a));
  }
  return z.row(0);
}

Matrix FeedForward::backward(const Vector& shared, const Matrix& items,
                             const Trace& trace, const RowVector& d_out,
                             FeedForward& grads) const {
  const Eigen::Index shared_dim = shared.size();
  const Eigen::Index item_dim = items.rows();
  Matrix delta = d_out;  // 1 x n
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    auto& g = grads.layers_[l];
    g.bias += delta.rowwise().sum();
    if (l > 0) {
      const Matrix& input = trace.hidden[l - 1];
      g.weights.noalias() += delta * input.transpose();
      Matrix back = layer.weights.transpose() * delta;
      delta = back.array() * (1.0 - input.array().square());
    } else {
      g.weights.leftCols(shared_dim).noalias() += delta.rowwise().sum() * shared.transpose();
      if (item_dim > 0) {
        g.weights.rightCols(item_dim).noalias() += delta * items.transpose();
        return layer.weights.rightCols(item_dim).transpose() * delta;
      }
      return Matrix(0, items.cols());
    }
  }
  return Matrix(0, items.cols());
}

void FeedForward::add_scaled(const FeedForward& other, double scale) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weights += scale * other.layers_[l].weights;
    layers_[l].bias += scale * other.layers_[l].bias;
  }
}

// --- scorer --------------------------------------------------------------

void ScorerConfig::validate() const {
  if (embedding_dim == 0) fail(ErrorKind::config, "embedding_dim must be positive");
  for (auto h : score_hidden) {
    if (h == 0) fail(ErrorKind::config, "score network hidden sizes must be positive");
  }
  for (auto h : gate_hidden) {
    if (h == 0) fail(ErrorKind::config, "gate network hidden sizes must be positive");
  }
}

CacheScorerParams init_params(const ScorerConfig& config,
                              std::shared_ptr<EmbeddingTable> embeddings) {
  config.validate();
  if (!embeddings || embeddings->cols() != static_cast<Eigen::Index>(config.embedding_dim)) {
    fail(ErrorKind::config, "embedding table does not match embedding_dim");
  }
  Rng rng(config.seed);
  CacheScorerParams params;
  params.config = config;
  params.embeddings = std::move(embeddings);
  params.score_net = FeedForward(4 * config.embedding_dim, config.score_hidden, rng);
  params.gate_net = FeedForward(3 * config.embedding_dim, config.gate_hidden, rng);
  return params;
}

namespace {

void check_context(const CacheScorerParams& params, const DecoderContext& context) {
  if (!context.valid(params.config.embedding_dim)) {
    fail(ErrorKind::input, "decoder context has the wrong dimension or non-finite values");
  }
}

Matrix gather_embeddings(const CacheScorerParams& params,
                         std::span<const std::size_t> ids) {
  const auto& table = *params.embeddings;
  Matrix items(table.cols(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= static_cast<std::size_t>(table.rows())) {
      fail(ErrorKind::input, "cache id " + std::to_string(ids[i]) + " out of vocabulary");
    }
    items.col(static_cast<Eigen::Index>(i)) =
        table.row(static_cast<Eigen::Index>(ids[i])).transpose();
  }
  return items;
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void check_unique(std::span<const std::size_t> ids) {
  std::set<std::size_t> seen;
  for (auto id : ids) {
    if (!seen.insert(id).second) {
      fail(ErrorKind::invariant, "duplicate cache id " + std::to_string(id));
    }
  }
}

}  // namespace

std::optional<Vector> score_cache(const CacheScorerParams& params,
                                  const DecoderContext& context,
                                  std::span<const std::size_t> cache_ids) {
  if (cache_ids.empty()) return std::nullopt;
  check_context(params, context);
  const Matrix items = gather_embeddings(params, cache_ids);
  return params.score_net.forward(context.concat(), items).transpose();
}

Vector cache_distribution(const Vector& scores) {
  if (scores.size() == 0) return scores;
  if (!scores.allFinite()) fail(ErrorKind::input, "cache scores must be finite");
  const Vector shifted = scores.array() - scores.maxCoeff();
  Vector e = shifted.array().exp();
  return e / e.sum();
}

double gate(const CacheScorerParams& params, const DecoderContext& context) {
  check_context(params, context);
  const RowVector z = params.gate_net.forward(context.concat(), Matrix(0, 1));
  return sigmoid(z(0));
}

Vector combine(const Vector& p_nmt, const Vector& p_cache,
               std::span<const std::size_t> cache_ids, double g) {
  if (static_cast<std::size_t>(p_cache.size()) != cache_ids.size()) {
    fail(ErrorKind::input, "cache distribution and cache ids differ in length");
  }
  check_unique(cache_ids);
  Vector out = g * p_nmt;
  for (std::size_t i = 0; i < cache_ids.size(); ++i) {
    if (cache_ids[i] >= static_cast<std::size_t>(p_nmt.size())) {
      fail(ErrorKind::input, "cache id out of vocabulary");
    }
    out(static_cast<Eigen::Index>(cache_ids[i])) +=
        (1.0 - g) * p_cache(static_cast<Eigen::Index>(i));
  }
  return out;
}

Vector predict(const CacheScorerParams& params, const DecoderContext& context,
               std::span<const std::size_t> cache_ids, const Vector& p_nmt) {
  const auto scores = score_cache(params, context, cache_ids);
  if (!scores) return p_nmt;
  return combine(p_nmt, cache_distribution(*scores), cache_ids, gate(params, context));
}

// --- training ------------------------------------------------------------

Gradients Gradients::zeros_like(const CacheScorerParams& params) {
  return {FeedForward::zeros_like(params.score_net),
          FeedForward::zeros_like(params.gate_net),
          {}};
}

namespace {

// Loss of one example; when grads is set, adds weight * d(loss)/d(params).
double forward_backward(const CacheScorerParams& params, const TrainingExample& ex,
                        Gradients* grads, double weight) {
  if (ex.gold >= static_cast<std::size_t>(ex.p_nmt.size())) {
    fail(ErrorKind::input, "gold id " + std::to_string(ex.gold) + " out of range");
  }
  const double base = ex.p_nmt(static_cast<Eigen::Index>(ex.gold));
  if (ex.cache_ids.empty()) return -std::log(base);

  check_context(params, ex.context);
  check_unique(ex.cache_ids);
  const Vector shared = ex.context.concat();
  const Matrix items = gather_embeddings(params, ex.cache_ids);

  FeedForward::Trace score_trace;
  const RowVector scores = params.score_net.forward(shared, items, &score_trace);
  const Vector p_cache = cache_distribution(scores.transpose());
  FeedForward::Trace gate_trace;
  const Matrix no_items(0, 1);
  const double g = sigmoid(params.gate_net.forward(shared, no_items, &gate_trace)(0));

  std::optional<Eigen::Index> gold_at;
  for (std::size_t i = 0; i < ex.cache_ids.size(); ++i) {
    if (ex.cache_ids[i] == ex.gold) gold_at = static_cast<Eigen::Index>(i);
  }
  const double cached = gold_at ? p_cache(*gold_at) : 0.0;
  const double p = g * base + (1.0 - g) * cached;
  const double loss = -std::log(p);
  if (!grads) return loss;

  const double d_p = -weight / p;
  RowVector d_gate(1);
  d_gate(0) = d_p * (base - cached) * g * (1.0 - g);
  params.gate_net.backward(shared, no_items, gate_trace, d_gate, grads->gate_net);

  if (gold_at) {
    const double d_cached = d_p * (1.0 - g);
    // d p_cache[j] / d s_i = p_cache[j] (delta_ij - p_cache[i])
    RowVector d_scores = (-d_cached * cached) * p_cache.transpose();
    d_scores(*gold_at) += d_cached * cached;
    const Matrix d_items =
        params.score_net.backward(shared, items, score_trace, d_scores, grads->score_net);
    for (std::size_t i = 0; i < ex.cache_ids.size(); ++i) {
      auto [it, inserted] = grads->embeddings.try_emplace(
          ex.cache_ids[i], Vector::Zero(items.rows()));
      it->second += d_items.col(static_cast<Eigen::Index>(i));
    }
  }
  return loss;
}

}  // namespace

double example_loss(const CacheScorerParams& params, const TrainingExample& example) {
  return forward_backward(params, example, nullptr, 0.0);
}

double mean_loss(const CacheScorerParams& params, std::span<const TrainingExample> batch) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : batch) total += example_loss(params, ex);
  return total / static_cast<double>(batch.size());
}

double batch_gradients(const CacheScorerParams& params,
                       std::span<const TrainingExample> batch, Gradients& grads) {
  if (batch.empty()) return 0.0;
  const double weight = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& ex : batch) total += forward_backward(params, ex, &grads, weight);
  return total * weight;
}

double train_step(CacheScorerParams& params, std::span<const TrainingExample> batch,
                  double learning_rate) {
  if (!(learning_rate >= 0.0)) {
    fail(ErrorKind::config, "learning rate must be non-negative");
  }
  auto grads = Gradients::zeros_like(params);
  const double loss = batch_gradients(params, batch, grads);
  if (learning_rate == 0.0) return loss;
  params.score_net.add_scaled(grads.score_net, -learning_rate);
  params.gate_net.add_scaled(grads.gate_net, -learning_rate);
  if (!params.config.freeze_embeddings) {
    for (const auto& [row, g] : grads.embeddings) {
      params.embeddings->row(static_cast<Eigen::Index>(row)) -=
          learning_rate * g.transpose();
    }
  }
  return loss;
}

// --- mock base model -----------------------------------------------------

MockBaseModel::MockBaseModel(std::size_t vocab_size, std::size_t dim,
                             std::uint64_t seed, std::size_t bos_id)
    : vocab_size_(vocab_size),
      dim_(dim),
      seed_(seed),
      bos_id_(bos_id),
      successors_(vocab_size),
      context_totals_(vocab_size, 0) {
  if (vocab_size == 0 || dim == 0) {
    fail(ErrorKind::config, "mock base model needs a vocabulary and a dimension");
  }
  if (bos_id >= vocab_size) fail(ErrorKind::config, "BOS id outside the vocabulary");
  const auto rows = static_cast<Eigen::Index>(vocab_size);
  const auto cols = static_cast<Eigen::Index>(dim);
  embeddings_ = std::make_shared<EmbeddingTable>(rows, cols);
  Rng rng(derive_seed(seed, 0xe111bedULL));
  const double limit = std::sqrt(6.0 / static_cast<double>(vocab_size + dim));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      (*embeddings_)(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
}

void MockBaseModel::fit(std::span<const std::vector<std::size_t>> sentences) {
  for (const auto& sentence : sentences) {
    std::size_t previous = bos_id_;
    for (std::size_t id : sentence) {
      if (id >= vocab_size_) fail(ErrorKind::data, "token id outside the vocabulary");
      ++successors_[previous][id];
      ++context_totals_[previous];
      previous = id;
    }
  }
}

double MockBaseModel::bigram_probability(std::size_t previous, std::size_t next) const {
  const auto& succ = successors_.at(previous);
  const auto it = succ.find(next);
  const double count = it == succ.end() ? 0.0 : it->second;
  return (count + 1.0) / (static_cast<double>(context_totals_[previous]) +
                          static_cast<double>(vocab_size_));
}

double MockBaseModel::feature(std::uint64_t key, std::size_t j) const {
  const std::uint64_t bits = mix64(derive_seed(seed_, key) + j);
  return static_cast<double>(bits >> 11) * 0x1.0p-52 - 1.0;
}

MockBaseModel::Output MockBaseModel::operator()(
    std::span<const std::size_t> history,
    std::span<const std::string> source_words) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  Output out;
  auto& ctx = out.context;
  ctx.output_history = Vector::Zero(d);
  for (std::size_t id : history) {
    for (Eigen::Index j = 0; j < d; ++j) {
      ctx.output_history(j) += feature(2 * id + 1, static_cast<std::size_t>(j));
    }
  }
  if (!history.empty()) ctx.output_history /= static_cast<double>(history.size());

  ctx.source_context = Vector::Zero(d);
  for (const auto& word : source_words) {
    const std::uint64_t key = 2 * fnv1a64(word);
    for (Eigen::Index j = 0; j < d; ++j) {
      ctx.source_context(j) += feature(key, static_cast<std::size_t>(j));
    }
  }
  if (!source_words.empty()) ctx.source_context /= static_cast<double>(source_words.size());

  const std::size_t previous = history.empty() ? bos_id_ : history.back();
  ctx.decoder_state = Vector(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    ctx.decoder_state(j) =
        std::tanh(0.5 * (ctx.output_history(j) + ctx.source_context(j)) +
                  feature(2 * previous + 1, static_cast<std::size_t>(j) + dim_));
  }

  const double denom = static_cast<double>(context_totals_.at(previous)) +
                       static_cast<double>(vocab_size_);
  out.p_nmt = Vector::Constant(static_cast<Eigen::Index>(vocab_size_), 1.0 / denom);
  for (const auto& [id, count] : successors_[previous]) {
    out.p_nmt(static_cast<Eigen::Index>(id)) = (count + 1.0) / denom;
  }
  return out;
}

// --- schedule ------------------------------------------------------------

std::vector<TopicSource> topic_schedule(std::size_t n_units, double ratio,
                                        std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    fail(ErrorKind::config, "gold topic ratio must lie in [0, 1]");
  }
  std::vector<std::size_t> order(n_units);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n_units; i > 1; --i) {
    std::swap(order[i - 1], order[rng.index(i)]);
  }
  const auto gold = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_units)));
  std::vector<TopicSource> schedule(n_units, TopicSource::projected);
  for (std::size_t i = 0; i < gold; ++i) schedule[order[i]] = TopicSource::gold;
  return schedule;
}

// --- checkpoints ---------------------------------------------------------

namespace {

constexpr std::string_view kCheckpointMagic = "secmt-cache-scorer 1";

void write_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_dims(std::ostream& out, std::string_view key,
                const std::vector<std::size_t>& dims) {
  out << key << ' ' << dims.size();
  for (auto d : dims) out << ' ' << d;
  out << '\n';
}

void write_net(std::ostream& out, std::string_view name, const FeedForward& net) {
  out << name << ' ' << net.layers().size() << '\n';
  for (const auto& layer : net.layers()) {
    out << "layer " << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
    write_matrix(out, layer.weights);
    write_matrix(out, layer.bias.transpose());
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::vector<std::string> line() {
    std::string l;
    if (!std::getline(in_, l)) fail(ErrorKind::data, "checkpoint truncated");
    return text::split_whitespace(l);
  }

  std::vector<std::string> keyed(std::string_view key) {
    auto fields = line();
    if (fields.empty() || fields[0] != key) {
      fail(ErrorKind::data, "checkpoint: expected '" + std::string(key) + "'");
    }
    fields.erase(fields.begin());
    return fields;
  }

  std::size_t keyed_uint(std::string_view key) {
    const auto f = keyed(key);
    if (f.size() != 1) fail(ErrorKind::data, "checkpoint: bad '" + std::string(key) + "'");
    return parse_uint(f[0]);
  }

  std::vector<std::size_t> dims(std::string_view key) {
    const auto f = keyed(key);
    if (f.empty() || parse_uint(f[0]) != f.size() - 1) {
      fail(ErrorKind::data, "checkpoint: bad '" + std::string(key) + "'");
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < f.size(); ++i) out.push_back(parse_uint(f[i]));
    return out;
  }

  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto f = line();
      if (static_cast<Eigen::Index>(f.size()) != cols) {
        fail(ErrorKind::data, "checkpoint: row has the wrong width");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = parse_double(f[static_cast<std::size_t>(c)]);
      }
    }
    return m;
  }

  FeedForward net(std::string_view name, std::size_t input_dim,
                  const std::vector<std::size_t>& hidden) {
    auto expected = FeedForward::zeros(input_dim, hidden);
    const std::size_t n = keyed_uint(name);
    if (n != expected.layers().size()) {
      fail(ErrorKind::data, "checkpoint: layer count mismatch in " + std::string(name));
    }
    for (auto& layer : expected.layers()) {
      const auto shape = keyed("layer");
      if (shape.size() != 2 ||
          static_cast<Eigen::Index>(parse_uint(shape[0])) != layer.weights.rows() ||
          static_cast<Eigen::Index>(parse_uint(shape[1])) != layer.weights.cols()) {
        fail(ErrorKind::data, "checkpoint: layer shape mismatch in " + std::string(name));
      }
      layer.weights = matrix(layer.weights.rows(), layer.weights.cols());
      layer.bias = matrix(1, layer.bias.size()).transpose();
    }
    return expected;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const CacheScorerParams& params,
                      std::string_view config_hash) {
  const auto& c = params.config;
  out << kCheckpointMagic << '\n'
      << "config " << (config_hash.empty() ? "-" : config_hash) << '\n'
      << "embedding_dim " << c.embedding_dim << '\n';
  write_dims(out, "score_hidden", c.score_hidden);
  write_dims(out, "gate_hidden", c.gate_hidden);
  out << "seed " << c.seed << '\n'
      << "freeze_embeddings " << (c.freeze_embeddings ? 1 : 0) << '\n'
      << "embeddings " << params.embeddings->rows() << ' ' << params.embeddings->cols()
      << '\n';
  write_matrix(out, *params.embeddings);
  write_net(out, "score_net", params.score_net);
  write_net(out, "gate_net", params.gate_net);
}

CacheScorerParams read_checkpoint(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kCheckpointMagic) {
    fail(ErrorKind::data, "not a version 1 cache scorer checkpoint");
  }
  Reader r(in);
  r.keyed("config");
  CacheScorerParams params;
  auto& c = params.config;
  c.embedding_dim = r.keyed_uint("embedding_dim");
  c.score_hidden = r.dims("score_hidden");
  c.gate_hidden = r.dims("gate_hidden");
  c.seed = r.keyed_uint("seed");
  c.freeze_embeddings = r.keyed_uint("freeze_embeddings") != 0;
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorKind::data, std::string("checkpoint: ") + e.what());
  }
  const auto shape = r.keyed("embeddings");
  if (shape.size() != 2 || parse_uint(shape[1]) != c.embedding_dim) {
    fail(ErrorKind::data, "checkpoint: embedding shape mismatch");
  }
  params.embeddings = std::make_shared<EmbeddingTable>(
      r.matrix(static_cast<Eigen::Index>(parse_uint(shape[0])),
               static_cast<Eigen::Index>(c.embedding_dim)));
  params.score_net = r.net("score_net", 4 * c.embedding_dim, c.score_hidden);
  params.gate_net = r.net("gate_net", 3 * c.embedding_dim, c.gate_hidden);
  return params;
}

}  // namespace secmt::neural
