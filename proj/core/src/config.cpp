#include "emdlot/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace emdlot {

void TrainConfig::validate() const {
  if (hidden_size < 1) throw std::invalid_argument("config: hidden_size must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw std::invalid_argument("config: dropout must be in [0,1)");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate > 0");
  if (weight_decay < 0.0) throw std::invalid_argument("config: weight_decay >= 0");
  if (num_clusters < 1) throw std::invalid_argument("config: num_clusters >= 1");
  if (cluster_loss_weight < 0.0 || dist_loss_weight < 0.0)
    throw std::invalid_argument("config: loss weights must be non-negative");
  for (double tau : {modal_temperature, numeric_feature_temperature,
                     text_feature_temperature})
    if (!(tau > 0.0)) throw std::invalid_argument("config: temperatures must be positive");
  if (patience < 1) throw std::invalid_argument("config: patience >= 1");
  if (batch_size < 1) throw std::invalid_argument("config: batch_size >= 1");
  if (max_epochs < 1) throw std::invalid_argument("config: max_epochs >= 1");
  if (embed_size < 1) throw std::invalid_argument("config: embed_size >= 1");
  if (warmup_epochs < 0) throw std::invalid_argument("config: warmup_epochs >= 0");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw std::invalid_argument("config: val_fraction in (0,1)");
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw std::invalid_argument("config: train_frac in (0,1)");
  for (const auto& a : ablation)
    if (a != "no_text" && a != "no_cluster" && a != "no_attention")
      throw std::invalid_argument("config: unknown ablation '" + a + "'");
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TrainConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "hidden_size") c.hidden_size = it.value().get<int>();
    else if (key == "dropout") c.dropout = it.value().get<double>();
    else if (key == "learning_rate") c.learning_rate = it.value().get<double>();
    else if (key == "weight_decay") c.weight_decay = it.value().get<double>();
    else if (key == "num_clusters") c.num_clusters = it.value().get<int>();
    else if (key == "cluster_loss_weight") c.cluster_loss_weight = it.value().get<double>();
    else if (key == "dist_loss_weight") c.dist_loss_weight = it.value().get<double>();
    else if (key == "modal_temperature") c.modal_temperature = it.value().get<double>();
    else if (key == "numeric_feature_temperature")
      c.numeric_feature_temperature = it.value().get<double>();
    else if (key == "text_feature_temperature")
      c.text_feature_temperature = it.value().get<double>();
    else if (key == "patience") c.patience = it.value().get<int>();
    else if (key == "batch_size") c.batch_size = it.value().get<int>();
    else if (key == "max_epochs") c.max_epochs = it.value().get<int>();
    else if (key == "seed") c.seed = it.value().get<uint64_t>();
    else if (key == "embed_size") c.embed_size = it.value().get<int>();
    else if (key == "warmup_epochs") c.warmup_epochs = it.value().get<int>();
    else if (key == "val_fraction") c.val_fraction = it.value().get<double>();
    else if (key == "train_frac") c.train_frac = it.value().get<double>();
    else if (key == "ablation") {
      for (const auto& a : it.value()) c.ablation.insert(a.get<std::string>());
    } else
      throw std::invalid_argument("train config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string TrainConfig::to_json_text() const {
  nlohmann::json j;
  j["hidden_size"] = hidden_size;
  j["dropout"] = dropout;
  j["learning_rate"] = learning_rate;
  j["weight_decay"] = weight_decay;
  j["num_clusters"] = num_clusters;
  j["cluster_loss_weight"] = cluster_loss_weight;
  j["dist_loss_weight"] = dist_loss_weight;
  j["modal_temperature"] = modal_temperature;
  j["numeric_feature_temperature"] = numeric_feature_temperature;
  j["text_feature_temperature"] = text_feature_temperature;
  j["patience"] = patience;
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["seed"] = seed;
  j["embed_size"] = embed_size;
  j["warmup_epochs"] = warmup_epochs;
  j["val_fraction"] = val_fraction;
  j["train_frac"] = train_frac;
  j["ablation"] = ablation;
  return j.dump(2);
}

ModelConfig model_config(const TrainConfig& config, int n_features, int d_ch,
                         std::vector<std::string> feature_names) {
  ModelConfig mc;
  mc.n_features = n_features;
  mc.d_ch = d_ch;
  mc.embed = config.embed_size;
  mc.hidden = config.hidden_size;
  mc.clusters = config.num_clusters;
  mc.dropout = config.dropout;
  mc.tau_modality = config.modal_temperature;
  mc.tau_feature = config.numeric_feature_temperature;
  mc.tau_chapter = config.text_feature_temperature;
  mc.no_text = config.ablation.count("no_text") > 0;
  mc.no_cluster = config.ablation.count("no_cluster") > 0;
  mc.no_attention = config.ablation.count("no_attention") > 0;
  mc.feature_names = std::move(feature_names);
  return mc;
}

}  // namespace emdlot
