#ifndef EMDLOT_MODEL_HPP
#define EMDLOT_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emdlot/attention.hpp"
#include "emdlot/cluster.hpp"
#include "emdlot/dataset.hpp"
#include "emdlot/loss.hpp"
#include "emdlot/tape.hpp"
#include "emdlot/tlstm.hpp"

namespace emdlot {

struct ModelConfig {
  int n_features = 0;
  int d_ch = 0;
  int embed = 32;   // feature-embedding width = encoder input size
  int hidden = 512;
  int clusters = 8;
  double dropout = 0.3;
  double tau_modality = 2.6;
  double tau_feature = 0.9;
  double tau_chapter = 0.55;
  // Ablation switches: drop the text pathway, collapse to a single head,
  // replace attention aggregations with unweighted means.
  bool no_text = false;
  bool no_cluster = false;
  bool no_attention = false;
  std::vector<std::string> feature_names;
};

// The full network: per-step feature attention feeding a time-aware LSTM,
// chapter attention over the two text vectors with an affine adapter,
// modality attention fusing the two embeddings, and the soft-cluster
// mixture-of-experts head.
class EmdlotModel {
 public:
  EmdlotModel() = default;
  explicit EmdlotModel(const ModelConfig& cfg);

  void init(uint64_t seed);
  const ModelConfig& config() const { return cfg_; }
  std::vector<Param*> params();

  struct ForwardOptions {
    bool training = false;       // enables dropout (needs dropout_rng)
    bool bypass_decay = false;   // decay gate forced to 1
    SeededRng* dropout_rng = nullptr;
    AttentionSink* sink = nullptr;
  };

  struct SampleNodes {
    int y_hat = -1;
    int pi = -1;
    int z_fusion = -1;
  };

  struct BatchNodes {
    std::vector<SampleNodes> samples;
    int loss = -1;      // set by training_loss
    int cls_loss = -1;
    int dist_loss = -1;
    int sep_loss = -1;
  };

  BatchNodes forward_batch(Tape& tape, std::span<const Sample* const> batch,
                           const ForwardOptions& opts);

  // forward_batch plus the three-term objective: mean cross-entropy +
  // lambda_dist * distribution + lambda_clus * separation.
  BatchNodes training_loss(Tape& tape, std::span<const Sample* const> batch,
                           const ForwardOptions& opts, const LossWeights& weights);

  struct Prediction {
    std::vector<double> probs;
    std::vector<double> pi;
    std::vector<double> z_fusion;
  };
  Prediction predict(const Sample& sample, bool bypass_decay = false,
                     AttentionSink* sink = nullptr);

  // Evaluation-mode total loss over a batch.
  double total_loss(std::span<const Sample* const> batch, const LossWeights& weights);

  // Deep copy / restore of all learnable values (for best-epoch snapshots).
  std::vector<Tensor> snapshot_values();
  void restore_values(const std::vector<Tensor>& values);

  TLstmParams tlstm;
  AttnParams attn;
  ClusterParams cluster;

 private:
  ModelConfig cfg_;
};

}  // namespace emdlot

#endif
