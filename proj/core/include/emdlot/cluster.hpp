#ifndef EMDLOT_CLUSTER_HPP
#define EMDLOT_CLUSTER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "emdlot/rng.hpp"
#include "emdlot/tape.hpp"
#include "emdlot/tensor.hpp"

namespace emdlot {

// Soft clustering head: learnable centroids, a 2-layer perceptron that maps
// the fused embedding to K cluster logits, and K independent affine
// prediction heads emitting class probabilities. The final prediction is the
// pi-weighted mixture of head distributions.
struct ClusterParams {
  int k = 0;
  int hidden = 0;
  int classes = 3;
  std::vector<Param> centroids;  // k vectors of size hidden
  Param ident_W1, ident_b1;      // hidden -> hidden, tanh
  Param ident_W2, ident_b2;      // hidden -> k logits
  struct Head {
    Param W, b;  // hidden -> classes
  };
  std::vector<Head> heads;

  ClusterParams() = default;
  ClusterParams(int k, int hidden, int classes = 3);
  void init(SeededRng& rng);
  void collect(std::vector<Param*>& out);
};

struct ClusterNodeIds {
  std::vector<int> centroids;
  int ident_W1, ident_b1, ident_W2, ident_b2;
  std::vector<std::pair<int, int>> heads;  // (W, b)
};
ClusterNodeIds bind(Tape& tape, ClusterParams& p);

// pi = softmax(identifier(z)); hidden_dropout_mask (optional node) is applied
// to the tanh layer during training.
int assign_graph(Tape& tape, const ClusterNodeIds& ids, int z,
                 int hidden_dropout_mask = -1);

// y_hat = sum_k pi_k softmax(head_k(z)).
int mixture_graph(Tape& tape, const ClusterNodeIds& ids, int pi, int z);

struct ClusterAssignment {
  std::vector<double> pi;  // K-simplex
};

ClusterAssignment assign(std::span<const double> z_fusion, ClusterParams& params);
std::vector<double> mixture_predict(const ClusterAssignment& assignment,
                                    std::span<const double> z_fusion,
                                    ClusterParams& params);

struct WarmStartStats {
  double identifier_accuracy = 0.0;  // vs the hard K-Means labels
  std::vector<int> kmeans_labels;
};

// K-Means warm-up: centroids are set to the K-Means centroids of the given
// embeddings and the identifier is trained by cross-entropy against the hard
// K-Means labels for `epochs` passes. Heads are left as initialized;
// epochs = 0 leaves the identifier untouched.
WarmStartStats warm_start(ClusterParams& params,
                          const std::vector<std::vector<double>>& embeddings,
                          uint64_t seed, int epochs, double learning_rate,
                          double weight_decay);

}  // namespace emdlot

#endif
