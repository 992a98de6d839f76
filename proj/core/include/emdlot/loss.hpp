#ifndef EMDLOT_LOSS_HPP
#define EMDLOT_LOSS_HPP

#include <span>
#include <vector>

#include "emdlot/dataset.hpp"
#include "emdlot/tape.hpp"

namespace emdlot {

struct LossWeights {
  double lambda_dist = 0.035;
  double lambda_clus = 0.004;
};

// -log(max(y_hat[y], 1e-12)).
double cross_entropy(Label y, std::span<const double> y_hat);

// Cluster-usage regularizer over the batch-mean assignment pi_bar, expressed
// as 1 - H(pi_bar)/log K: 0 at uniform usage, 1 at collapse, so minimizing
// drives usage toward uniformity. Returns 0 for K = 1.
double distribution_loss(const std::vector<std::vector<double>>& pi_batch);

// Negative mean pairwise Euclidean distance between centroids; 0 for K = 1.
// Unbounded below; the optimizer keeps centroid norms finite via weight decay
// plus a hard norm clip.
double separation_loss(const std::vector<std::vector<double>>& centroids);

// Tape builders used by the training loss. pi_nodes are per-sample simplex
// nodes; centroid_nodes are the bound centroid params.
int distribution_loss_graph(Tape& tape, std::span<const int> pi_nodes);
int separation_loss_graph(Tape& tape, std::span<const int> centroid_nodes);

}  // namespace emdlot

#endif
