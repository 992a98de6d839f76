#include "emdlot/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace emdlot {

double cross_entropy(Label y, std::span<const double> y_hat) {
  const size_t idx = static_cast<size_t>(y);
  if (idx >= y_hat.size()) throw std::invalid_argument("cross_entropy: label out of range");
  return -std::log(std::max(y_hat[idx], Tape::kLogClamp));
}

double distribution_loss(const std::vector<std::vector<double>>& pi_batch) {
  if (pi_batch.empty()) throw std::invalid_argument("distribution_loss: empty batch");
  const size_t k = pi_batch[0].size();
  if (k <= 1) return 0.0;
  std::vector<double> mean(k, 0.0);
  for (const auto& pi : pi_batch) {
    if (pi.size() != k) throw std::invalid_argument("distribution_loss: ragged batch");
    for (size_t i = 0; i < k; ++i) mean[i] += pi[i];
  }
  double neg_entropy = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const double p = mean[i] / static_cast<double>(pi_batch.size());
    if (p >= Tape::kLogClamp) neg_entropy += p * std::log(p);
  }
  return 1.0 + neg_entropy / std::log(static_cast<double>(k));
}

double separation_loss(const std::vector<std::vector<double>>& centroids) {
  const size_t k = centroids.size();
  if (k < 2) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      double sq = 0.0;
      for (size_t d = 0; d < centroids[i].size(); ++d) {
        const double diff = centroids[i][d] - centroids[j][d];
        sq += diff * diff;
      }
      sum += std::sqrt(sq);
    }
  }
  return -2.0 / (static_cast<double>(k) * static_cast<double>(k - 1)) * sum;
}

int distribution_loss_graph(Tape& tape, std::span<const int> pi_nodes) {
  if (pi_nodes.empty()) throw std::invalid_argument("distribution_loss_graph: empty batch");
  const size_t k = tape.dim(pi_nodes[0]);
  if (k <= 1) return tape.constant_scalar(0.0);
  std::vector<double> w(pi_nodes.size(), 1.0 / static_cast<double>(pi_nodes.size()));
  const int pi_bar = tape.weighted_sum_const(pi_nodes, w);
  const int scaled = tape.scale(tape.neg_entropy(pi_bar),
                                1.0 / std::log(static_cast<double>(k)));
  return tape.add_const(scaled, 1.0);
}

int separation_loss_graph(Tape& tape, std::span<const int> centroid_nodes) {
  const size_t k = centroid_nodes.size();
  if (k < 2) return tape.constant_scalar(0.0);
  std::vector<int> dists;
  for (size_t i = 0; i < k; ++i)
    for (size_t j = i + 1; j < k; ++j) {
      const int diff = tape.sub(centroid_nodes[i], centroid_nodes[j]);
      dists.push_back(tape.sqrt(tape.dot(diff, diff)));
    }
  std::vector<double> w(dists.size(),
                        -2.0 / (static_cast<double>(k) * static_cast<double>(k - 1)));
  return tape.lin_comb(dists, w);
}

}  // namespace emdlot
