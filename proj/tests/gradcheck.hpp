#pragma once

// Central finite differences against the analytic scorer gradients.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "secmt/neural.hpp"
#include "secmt/random.hpp"

namespace gradcheck {

using namespace secmt::neural;

struct Setup {
  CacheScorerParams params;
  std::vector<TrainingExample> batch;
};

inline Vector random_vector(secmt::Rng& rng, Eigen::Index n, double scale) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

inline Vector random_distribution(secmt::Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 0.05 + rng.uniform();
  return v / v.sum();
}

// Random scorer and batch; the cache always holds between 1 and vocab ids.
inline Setup make_setup(std::uint64_t seed, std::size_t dim, std::vector<std::size_t> score_hidden,
                        std::vector<std::size_t> gate_hidden, std::size_t vocab,
                        std::size_t batch_size) {
  secmt::Rng rng(seed);
  auto emb = std::make_shared<EmbeddingTable>(static_cast<Eigen::Index>(vocab),
                                              static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < emb->rows(); ++r) {
    emb->row(r) = random_vector(rng, emb->cols(), 0.8).transpose();
  }
  ScorerConfig config;
  config.embedding_dim = dim;
  config.score_hidden = std::move(score_hidden);
  config.gate_hidden = std::move(gate_hidden);
  config.seed = seed + 1;
  Setup s{init_params(config, emb), {}};
  const auto d = static_cast<Eigen::Index>(dim);
  for (std::size_t b = 0; b < batch_size; ++b) {
    TrainingExample ex;
    ex.context = {random_vector(rng, d, 1.0), random_vector(rng, d, 1.0),
                  random_vector(rng, d, 1.0)};
    std::vector<std::size_t> ids(vocab);
    for (std::size_t i = 0; i < vocab; ++i) ids[i] = i;
    for (std::size_t i = vocab; i > 1; --i) std::swap(ids[i - 1], ids[rng.index(i)]);
    ids.resize(1 + rng.index(vocab));
    ex.cache_ids = ids;
    ex.p_nmt = random_distribution(rng, static_cast<Eigen::Index>(vocab));
    ex.gold = rng.uniform() < 0.6 ? ids[rng.index(ids.size())] : rng.index(vocab);
    s.batch.push_back(std::move(ex));
  }
  return s;
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

// Largest relative error over every parameter (all weights, biases and the
// embedding rows used by the batch).
inline double max_relative_error(Setup& s, double h = 1e-5) {
  Gradients grads = Gradients::zeros_like(s.params);
  batch_gradients(s.params, s.batch, grads);
  double worst = 0.0;
  auto probe = [&](double& x, double analytic) {
    const double saved = x;
    x = saved + h;
    const double up = mean_loss(s.params, s.batch);
    x = saved - h;
    const double down = mean_loss(s.params, s.batch);
    x = saved;
    worst = std::max(worst, relative_error(analytic, (up - down) / (2.0 * h)));
  };
  auto check_net = [&](FeedForward& net, const FeedForward& g) {
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      auto& layer = net.layers()[l];
      const auto& gl = g.layers()[l];
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
          probe(layer.weights(i, j), gl.weights(i, j));
        }
        probe(layer.bias(i), gl.bias(i));
      }
    }
  };
  check_net(s.params.score_net, grads.score_net);
  check_net(s.params.gate_net, grads.gate_net);
  auto& emb = *s.params.embeddings;
  for (Eigen::Index r = 0; r < emb.rows(); ++r) {
    const auto it = grads.embeddings.find(static_cast<std::size_t>(r));
    for (Eigen::Index c = 0; c < emb.cols(); ++c) {
      probe(emb(r, c), it == grads.embeddings.end() ? 0.0 : it->second(c));
    }
  }
  return worst;
}

}  // namespace gradcheck
