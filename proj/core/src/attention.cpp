#include "emdlot/attention.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace emdlot {

namespace {

void init_uniform(Param& p, SeededRng& rng, double bound) {
  for (double& v : p.value.v) v = rng.uniform(-bound, bound);
}

}  // namespace

AttnParams::AttnParams(int d_ch, int n_features, int embed, int hidden)
    : d_ch(d_ch),
      n_features(n_features),
      embed(embed),
      hidden(hidden),
      w_chapter("attn.w_chapter", {static_cast<size_t>(d_ch)}),
      E("attn.E", {static_cast<size_t>(n_features), static_cast<size_t>(embed)}),
      w_feature("attn.w_feature", {static_cast<size_t>(embed)}),
      adapter_W("attn.adapter_W", {static_cast<size_t>(hidden), static_cast<size_t>(d_ch)}),
      adapter_b("attn.adapter_b", {static_cast<size_t>(hidden)}),
      w_text("attn.w_text", {static_cast<size_t>(hidden)}),
      w_num("attn.w_num", {static_cast<size_t>(hidden)}) {}

void AttnParams::init(SeededRng& rng) {
  init_uniform(w_chapter, rng, 1.0 / std::sqrt(static_cast<double>(d_ch)));
  init_uniform(E, rng, 1.0 / std::sqrt(static_cast<double>(embed)));
  init_uniform(w_feature, rng, 1.0 / std::sqrt(static_cast<double>(embed)));
  init_uniform(adapter_W, rng, 1.0 / std::sqrt(static_cast<double>(d_ch)));
  init_uniform(w_text, rng, 1.0 / std::sqrt(static_cast<double>(hidden)));
  init_uniform(w_num, rng, 1.0 / std::sqrt(static_cast<double>(hidden)));
}

void AttnParams::collect(std::vector<Param*>& out) {
  for (Param* p : {&w_chapter, &E, &w_feature, &adapter_W, &adapter_b, &w_text, &w_num})
    out.push_back(p);
}

AttnNodeIds bind(Tape& tape, AttnParams& p) {
  AttnNodeIds ids;
  ids.w_chapter = tape.param(p.w_chapter);
  ids.E = tape.param(p.E);
  ids.w_feature = tape.param(p.w_feature);
  ids.adapter_W = tape.param(p.adapter_W);
  ids.adapter_b = tape.param(p.adapter_b);
  ids.w_text = tape.param(p.w_text);
  ids.w_num = tape.param(p.w_num);
  return ids;
}

AttnNodes chapter_attention_graph(Tape& tape, const AttnNodeIds& ids, int notice,
                                  int risk, double tau, AggMode mode) {
  if (tape.dim(notice) == 0 || tape.dim(risk) == 0)
    throw std::invalid_argument("chapter_attention: zero-length chapter vector");
  const std::array<int, 2> chapters = {notice, risk};
  AttnNodes out;
  if (mode == AggMode::kUniform) {
    const std::array<double, 2> half = {0.5, 0.5};
    out.weights = tape.constant(half, 2);
    out.aggregate = tape.weighted_sum_const(chapters, half);
    return out;
  }
  std::array<int, 2> scores;
  for (size_t j = 0; j < 2; ++j)
    scores[j] = tape.dot(ids.w_chapter, tape.tanh(chapters[j]));
  out.weights = tape.softmax_t(tape.stack(scores), tau);
  out.aggregate = tape.weighted_sum(out.weights, chapters);
  return out;
}

AttnNodes feature_attention_graph(Tape& tape, const AttnNodeIds& ids,
                                  std::span<const double> x_raw, double tau,
                                  AggMode mode) {
  const size_t nf = x_raw.size();
  if (nf == 0) throw std::invalid_argument("feature_attention: no features");
  std::vector<int> embeds(nf);
  for (size_t i = 0; i < nf; ++i)
    embeds[i] = tape.row_scale(ids.E, i, x_raw[i]);
  AttnNodes out;
  if (mode == AggMode::kUniform) {
    std::vector<double> w(nf, 1.0 / static_cast<double>(nf));
    out.weights = tape.constant(w, nf);
    out.aggregate = tape.weighted_sum_const(embeds, w);
    return out;
  }
  std::vector<int> scores(nf);
  for (size_t i = 0; i < nf; ++i)
    scores[i] = tape.dot(ids.w_feature, tape.tanh(embeds[i]));
  out.weights = tape.softmax_t(tape.stack(scores), tau);
  out.aggregate = tape.weighted_sum(out.weights, embeds);
  return out;
}

AttnNodes modality_attention_graph(Tape& tape, const AttnNodeIds& ids, int z_text,
                                   int z_num, double tau, AggMode mode) {
  if (tape.dim(z_text) != tape.dim(z_num))
    throw std::invalid_argument("modality_attention: dimension mismatch");
  const std::array<int, 2> modalities = {z_text, z_num};
  AttnNodes out;
  if (mode == AggMode::kUniform) {
    const std::array<double, 2> half = {0.5, 0.5};
    out.weights = tape.constant(half, 2);
    out.aggregate = tape.weighted_sum_const(modalities, half);
    return out;
  }
  const std::array<int, 2> scores = {tape.dot(ids.w_text, z_text),
                                     tape.dot(ids.w_num, z_num)};
  out.weights = tape.softmax_t(tape.stack(scores), tau);
  out.aggregate = tape.weighted_sum(out.weights, modalities);
  return out;
}

namespace {

std::vector<double> copy_values(const Tape& tape, int node) {
  auto v = tape.values(node);
  return {v.begin(), v.end()};
}

}  // namespace

ChapterAttention chapter_attention(std::span<const double> h_notice,
                                   std::span<const double> h_risk, AttnParams& params) {
  if (h_notice.empty() || h_risk.empty())
    throw std::invalid_argument("chapter_attention: zero-length chapter vector");
  if (h_notice.size() != h_risk.size())
    throw std::invalid_argument("chapter_attention: chapter size mismatch");
  Tape tape;
  auto ids = bind(tape, params);
  const int n = tape.constant(h_notice, h_notice.size());
  const int r = tape.constant(h_risk, h_risk.size());
  auto nodes = chapter_attention_graph(tape, ids, n, r, params.tau_chapter,
                                       AggMode::kAttention);
  return {copy_values(tape, nodes.weights), copy_values(tape, nodes.aggregate)};
}

FeatureAttention feature_attention(std::span<const double> x_raw, AttnParams& params) {
  if (x_raw.size() != static_cast<size_t>(params.n_features))
    throw std::invalid_argument("feature_attention: feature count mismatch");
  Tape tape;
  auto ids = bind(tape, params);
  auto nodes =
      feature_attention_graph(tape, ids, x_raw, params.tau_feature, AggMode::kAttention);
  return {copy_values(tape, nodes.weights), copy_values(tape, nodes.aggregate)};
}

ModalityAttention modality_attention(std::span<const double> z_text,
                                     std::span<const double> z_num, AttnParams& params) {
  if (z_text.size() != z_num.size())
    throw std::invalid_argument("modality_attention: dimension mismatch");
  Tape tape;
  auto ids = bind(tape, params);
  const int zt = tape.constant(z_text, z_text.size());
  const int zn = tape.constant(z_num, z_num.size());
  auto nodes =
      modality_attention_graph(tape, ids, zt, zn, params.tau_modality, AggMode::kAttention);
  return {copy_values(tape, nodes.weights), copy_values(tape, nodes.aggregate)};
}

}  // namespace emdlot
