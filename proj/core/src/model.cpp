#include "emdlot/model.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace emdlot {

EmdlotModel::EmdlotModel(const ModelConfig& cfg) : cfg_(cfg) {
  if (cfg.n_features < 1 || cfg.d_ch < 1)
    throw std::invalid_argument("model: n_features and d_ch must be positive");
  if (cfg.embed < 1 || cfg.hidden < 1)
    throw std::invalid_argument("model: embed and hidden must be positive");
  const int k = cfg.no_cluster ? 1 : cfg.clusters;
  if (k < 1) throw std::invalid_argument("model: clusters must be >= 1");
  cfg_.clusters = k;
  tlstm = TLstmParams(cfg.hidden, cfg.embed);
  attn = AttnParams(cfg.d_ch, cfg.n_features, cfg.embed, cfg.hidden);
  attn.tau_chapter = cfg.tau_chapter;
  attn.tau_feature = cfg.tau_feature;
  attn.tau_modality = cfg.tau_modality;
  cluster = ClusterParams(k, cfg.hidden);
}

void EmdlotModel::init(uint64_t seed) {
  SeededRng rng(seed);
  tlstm.init(rng);
  attn.init(rng);
  cluster.init(rng);
}

std::vector<Param*> EmdlotModel::params() {
  std::vector<Param*> out;
  tlstm.collect(out);
  attn.collect(out);
  cluster.collect(out);
  return out;
}

namespace {

struct BoundIds {
  TLstmNodeIds tlstm;
  AttnNodeIds attn;
  ClusterNodeIds cluster;
};

int dropout_mask_node(Tape& tape, size_t n, double rate, SeededRng& rng) {
  std::vector<double> mask(n);
  const double keep = 1.0 - rate;
  for (auto& m : mask) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return tape.constant(mask, n);
}

}  // namespace

EmdlotModel::BatchNodes EmdlotModel::forward_batch(Tape& tape,
                                                   std::span<const Sample* const> batch,
                                                   const ForwardOptions& opts) {
  if (batch.empty()) throw std::invalid_argument("forward_batch: empty batch");
  if (opts.training && cfg_.dropout > 0.0 && opts.dropout_rng == nullptr)
    throw std::invalid_argument("forward_batch: dropout requires a dropout rng");

  BoundIds ids{bind(tape, tlstm), bind(tape, attn), bind(tape, cluster)};
  const AggMode agg = cfg_.no_attention ? AggMode::kUniform : AggMode::kAttention;

  BatchNodes out;
  for (const Sample* sp : batch) {
    const Sample& s = *sp;
    if (static_cast<int>(s.text.notice.size()) != cfg_.d_ch ||
        static_cast<int>(s.text.risk.size()) != cfg_.d_ch)
      throw std::invalid_argument("forward_batch: text width mismatch for " +
                                  s.series.firm_id);

    // Numeric pathway: feature attention per step, then the encoder.
    const size_t n_steps = s.series.steps.size();
    std::vector<EncodeStep> steps;
    steps.reserve(n_steps);
    for (size_t t = 0; t < n_steps; ++t) {
      const auto& step = s.series.steps[t];
      if (static_cast<int>(step.values.size()) != cfg_.n_features)
        throw std::invalid_argument("forward_batch: feature count mismatch for " +
                                    s.series.firm_id);
      auto fa = feature_attention_graph(tape, ids.attn, step.values, cfg_.tau_feature, agg);
      if (opts.sink) {
        auto w = tape.values(fa.weights);
        opts.sink->push_back({AttnLevel::kFeature,
                              {w.begin(), w.end()},
                              step.quarter_index,
                              static_cast<int>(n_steps - t),
                              s.series.firm_id});
      }
      steps.push_back({fa.aggregate, step.delta_t, true});
    }
    const auto enc =
        tlstm_encode_graph(tape, ids.tlstm, steps, opts.bypass_decay, s.series.firm_id);
    const int z_num = enc.h_last;

    // Text pathway and modality fusion.
    int z_fusion;
    if (cfg_.no_text) {
      z_fusion = z_num;
      if (opts.sink)
        opts.sink->push_back({AttnLevel::kModality, {0.0, 1.0}, -1, 0, s.series.firm_id});
    } else {
      const int notice = tape.constant(s.text.notice, s.text.notice.size());
      const int risk = tape.constant(s.text.risk, s.text.risk.size());
      auto ch = chapter_attention_graph(tape, ids.attn, notice, risk, cfg_.tau_chapter, agg);
      if (opts.sink) {
        auto w = tape.values(ch.weights);
        opts.sink->push_back(
            {AttnLevel::kChapter, {w.begin(), w.end()}, -1, 0, s.series.firm_id});
      }
      const int z_text =
          tape.affine(ids.attn.adapter_W, ch.aggregate, ids.attn.adapter_b);
      auto mo =
          modality_attention_graph(tape, ids.attn, z_text, z_num, cfg_.tau_modality, agg);
      if (opts.sink) {
        auto w = tape.values(mo.weights);
        opts.sink->push_back(
            {AttnLevel::kModality, {w.begin(), w.end()}, -1, 0, s.series.firm_id});
      }
      z_fusion = mo.aggregate;
    }

    int z_for_heads = z_fusion;
    int hidden_mask = -1;
    if (opts.training && cfg_.dropout > 0.0) {
      z_for_heads = tape.hadamard(
          z_fusion, dropout_mask_node(tape, tape.dim(z_fusion), cfg_.dropout,
                                      *opts.dropout_rng));
      hidden_mask = dropout_mask_node(tape, static_cast<size_t>(cfg_.hidden),
                                      cfg_.dropout, *opts.dropout_rng);
    }

    SampleNodes sn;
    sn.z_fusion = z_fusion;
    sn.pi = assign_graph(tape, ids.cluster, z_for_heads, hidden_mask);
    sn.y_hat = mixture_graph(tape, ids.cluster, sn.pi, z_for_heads);
    out.samples.push_back(sn);
  }
  return out;
}

EmdlotModel::BatchNodes EmdlotModel::training_loss(Tape& tape,
                                                   std::span<const Sample* const> batch,
                                                   const ForwardOptions& opts,
                                                   const LossWeights& weights) {
  BatchNodes nodes = forward_batch(tape, batch, opts);

  std::vector<int> ce;
  ce.reserve(batch.size());
  for (size_t i = 0; i < batch.size(); ++i)
    ce.push_back(tape.neg_log_pick(nodes.samples[i].y_hat,
                                   static_cast<size_t>(batch[i]->label)));
  std::vector<double> mean_w(ce.size(), 1.0 / static_cast<double>(ce.size()));
  nodes.cls_loss = tape.lin_comb(ce, mean_w);

  std::vector<int> pis;
  pis.reserve(batch.size());
  for (const auto& sn : nodes.samples) pis.push_back(sn.pi);
  nodes.dist_loss = distribution_loss_graph(tape, pis);

  std::vector<int> centroid_nodes;
  centroid_nodes.reserve(cluster.centroids.size());
  for (auto& c : cluster.centroids) centroid_nodes.push_back(tape.param(c));
  nodes.sep_loss = separation_loss_graph(tape, centroid_nodes);

  const std::array<int, 3> parts = {nodes.cls_loss, nodes.dist_loss, nodes.sep_loss};
  const std::array<double, 3> part_w = {1.0, weights.lambda_dist, weights.lambda_clus};
  nodes.loss = tape.lin_comb(parts, part_w);
  return nodes;
}

EmdlotModel::Prediction EmdlotModel::predict(const Sample& sample, bool bypass_decay,
                                             AttentionSink* sink) {
  Tape tape;
  ForwardOptions opts;
  opts.bypass_decay = bypass_decay;
  opts.sink = sink;
  const Sample* ptr = &sample;
  auto nodes = forward_batch(tape, {&ptr, 1}, opts);
  Prediction p;
  auto yv = tape.values(nodes.samples[0].y_hat);
  auto pv = tape.values(nodes.samples[0].pi);
  auto zv = tape.values(nodes.samples[0].z_fusion);
  p.probs.assign(yv.begin(), yv.end());
  p.pi.assign(pv.begin(), pv.end());
  p.z_fusion.assign(zv.begin(), zv.end());
  return p;
}

double EmdlotModel::total_loss(std::span<const Sample* const> batch,
                               const LossWeights& weights) {
  Tape tape;
  ForwardOptions opts;
  auto nodes = training_loss(tape, batch, opts, weights);
  return tape.value(nodes.loss);
}

std::vector<Tensor> EmdlotModel::snapshot_values() {
  std::vector<Tensor> out;
  for (Param* p : params()) out.push_back(p->value);
  return out;
}

void EmdlotModel::restore_values(const std::vector<Tensor>& values) {
  auto ps = params();
  if (values.size() != ps.size())
    throw std::invalid_argument("restore_values: snapshot size mismatch");
  for (size_t i = 0; i < ps.size(); ++i) ps[i]->value = values[i];
}

}  // namespace emdlot
