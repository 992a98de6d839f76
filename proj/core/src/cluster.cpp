#include "emdlot/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "emdlot/kmeans.hpp"
#include "emdlot/optimizer.hpp"

namespace emdlot {

namespace {

void init_uniform(Param& p, SeededRng& rng, double bound) {
  for (double& v : p.value.v) v = rng.uniform(-bound, bound);
}

}  // namespace

ClusterParams::ClusterParams(int k, int hidden, int classes)
    : k(k),
      hidden(hidden),
      classes(classes),
      ident_W1("cluster.ident_W1", {static_cast<size_t>(hidden), static_cast<size_t>(hidden)}),
      ident_b1("cluster.ident_b1", {static_cast<size_t>(hidden)}),
      ident_W2("cluster.ident_W2", {static_cast<size_t>(k), static_cast<size_t>(hidden)}),
      ident_b2("cluster.ident_b2", {static_cast<size_t>(k)}) {
  if (k < 1) throw std::invalid_argument("cluster: k must be >= 1");
  for (int c = 0; c < k; ++c)
    centroids.emplace_back("cluster.centroid_" + std::to_string(c),
                           std::vector<size_t>{static_cast<size_t>(hidden)});
  for (int c = 0; c < k; ++c) {
    Head h;
    h.W = Param("cluster.head_" + std::to_string(c) + ".W",
                {static_cast<size_t>(classes), static_cast<size_t>(hidden)});
    h.b = Param("cluster.head_" + std::to_string(c) + ".b",
                {static_cast<size_t>(classes)});
    heads.push_back(std::move(h));
  }
}

void ClusterParams::init(SeededRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  init_uniform(ident_W1, rng, bound);
  init_uniform(ident_W2, rng, bound);
  for (auto& h : heads) init_uniform(h.W, rng, bound);
  for (auto& c : centroids) init_uniform(c, rng, bound);
}

void ClusterParams::collect(std::vector<Param*>& out) {
  for (auto& c : centroids) out.push_back(&c);
  out.push_back(&ident_W1);
  out.push_back(&ident_b1);
  out.push_back(&ident_W2);
  out.push_back(&ident_b2);
  for (auto& h : heads) {
    out.push_back(&h.W);
    out.push_back(&h.b);
  }
}

ClusterNodeIds bind(Tape& tape, ClusterParams& p) {
  ClusterNodeIds ids;
  for (auto& c : p.centroids) ids.centroids.push_back(tape.param(c));
  ids.ident_W1 = tape.param(p.ident_W1);
  ids.ident_b1 = tape.param(p.ident_b1);
  ids.ident_W2 = tape.param(p.ident_W2);
  ids.ident_b2 = tape.param(p.ident_b2);
  for (auto& h : p.heads) ids.heads.emplace_back(tape.param(h.W), tape.param(h.b));
  return ids;
}

int assign_graph(Tape& tape, const ClusterNodeIds& ids, int z, int hidden_dropout_mask) {
  int a1 = tape.tanh(tape.affine(ids.ident_W1, z, ids.ident_b1));
  if (hidden_dropout_mask >= 0) a1 = tape.hadamard(a1, hidden_dropout_mask);
  const int logits = tape.affine(ids.ident_W2, a1, ids.ident_b2);
  return tape.softmax_t(logits, 1.0);
}

int mixture_graph(Tape& tape, const ClusterNodeIds& ids, int pi, int z) {
  std::vector<int> head_probs;
  head_probs.reserve(ids.heads.size());
  for (const auto& [w, b] : ids.heads)
    head_probs.push_back(tape.softmax_t(tape.affine(w, z, b), 1.0));
  return tape.weighted_sum(pi, head_probs);
}

ClusterAssignment assign(std::span<const double> z_fusion, ClusterParams& params) {
  if (z_fusion.size() != static_cast<size_t>(params.hidden))
    throw std::invalid_argument("assign: embedding size mismatch");
  Tape tape;
  auto ids = bind(tape, params);
  const int z = tape.constant(z_fusion, z_fusion.size());
  const int pi = assign_graph(tape, ids, z);
  auto v = tape.values(pi);
  return {{v.begin(), v.end()}};
}

std::vector<double> mixture_predict(const ClusterAssignment& assignment,
                                    std::span<const double> z_fusion,
                                    ClusterParams& params) {
  if (assignment.pi.size() != static_cast<size_t>(params.k))
    throw std::invalid_argument("mixture_predict: pi size mismatch");
  Tape tape;
  auto ids = bind(tape, params);
  const int z = tape.constant(z_fusion, z_fusion.size());
  const int pi = tape.constant(assignment.pi, assignment.pi.size());
  const int yhat = mixture_graph(tape, ids, pi, z);
  auto v = tape.values(yhat);
  return {v.begin(), v.end()};
}

WarmStartStats warm_start(ClusterParams& params,
                          const std::vector<std::vector<double>>& embeddings,
                          uint64_t seed, int epochs, double learning_rate,
                          double weight_decay) {
  if (embeddings.size() < static_cast<size_t>(params.k))
    throw std::invalid_argument("warm_start: need at least k embeddings");

  auto km = kmeans(embeddings, params.k, seed, 100);
  for (int c = 0; c < params.k; ++c) params.centroids[c].value.v = km.centroids[c];

  WarmStartStats stats;
  stats.kmeans_labels = km.labels;

  if (epochs > 0 && params.k > 1) {
    std::vector<Param*> ident = {&params.ident_W1, &params.ident_b1, &params.ident_W2,
                                 &params.ident_b2};
    AdamW opt(learning_rate, weight_decay);
    SeededRng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<size_t> order(embeddings.size());
    std::iota(order.begin(), order.end(), 0);
    const size_t batch = 64;
    for (int e = 0; e < epochs; ++e) {
      rng.shuffle(order);
      for (size_t start = 0; start < order.size(); start += batch) {
        const size_t end = std::min(order.size(), start + batch);
        Tape tape;
        ClusterNodeIds ids = bind(tape, params);
        std::vector<int> losses;
        for (size_t i = start; i < end; ++i) {
          const auto& emb = embeddings[order[i]];
          const int z = tape.constant(emb, emb.size());
          const int pi = assign_graph(tape, ids, z);
          losses.push_back(tape.neg_log_pick(pi, km.labels[order[i]]));
        }
        std::vector<double> w(losses.size(), 1.0 / static_cast<double>(losses.size()));
        const int loss = tape.lin_comb(losses, w);
        for (Param* p : ident) p->zero_grad();
        // Centroids and heads receive no gradient from the warm-up loss.
        tape.backward(loss);
        opt.step(ident);
      }
    }
  }

  size_t correct = 0;
  for (size_t i = 0; i < embeddings.size(); ++i) {
    auto a = assign(embeddings[i], params);
    const int pred = static_cast<int>(
        std::max_element(a.pi.begin(), a.pi.end()) - a.pi.begin());
    if (pred == km.labels[i]) correct++;
  }
  stats.identifier_accuracy =
      static_cast<double>(correct) / static_cast<double>(embeddings.size());
  return stats;
}

}  // namespace emdlot
