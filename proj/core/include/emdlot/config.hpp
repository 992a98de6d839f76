#ifndef EMDLOT_CONFIG_HPP
#define EMDLOT_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include "emdlot/dataset.hpp"
#include "emdlot/model.hpp"

namespace emdlot {

// Training hyperparameters. Defaults are the tuned operating point; the
// random-search tuner samples the documented ranges around them.
struct TrainConfig {
  int hidden_size = 512;
  double dropout = 0.3;
  double learning_rate = 0.0006175651418191845;
  double weight_decay = 1.0162398945608497e-06;
  int num_clusters = 8;
  double cluster_loss_weight = 0.004;
  double dist_loss_weight = 0.035;
  double modal_temperature = 2.6;
  double numeric_feature_temperature = 0.9;
  double text_feature_temperature = 0.55;
  int patience = 13;
  int batch_size = 8;
  int max_epochs = 200;
  uint64_t seed = 86;

  // Artifact-side knobs outside the search space.
  int embed_size = 32;       // feature-embedding / encoder-input width
  int warmup_epochs = 20;    // cluster-identifier warm-up passes
  double val_fraction = 0.1; // validation share carved from original samples
  double train_frac = 0.8;   // train share used by pipeline drivers

  // Any subset of {"no_text","no_cluster","no_attention"}.
  std::set<std::string> ablation;

  void validate() const;
  static TrainConfig from_json_text(const std::string& text);
  static TrainConfig from_json_file(const std::filesystem::path& path);
  std::string to_json_text() const;
};

// Derives the network shape for a dataset.
ModelConfig model_config(const TrainConfig& config, int n_features, int d_ch,
                         std::vector<std::string> feature_names);

}  // namespace emdlot

#endif
