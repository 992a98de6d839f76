#ifndef EMDLOT_ATTENTION_HPP
#define EMDLOT_ATTENTION_HPP

#include <span>
#include <string>
#include <vector>

#include "emdlot/rng.hpp"
#include "emdlot/tape.hpp"
#include "emdlot/tensor.hpp"

namespace emdlot {

// The three attention levels share one parameter bundle:
//   chapter:  scores w_chapter . tanh(h_j) over the two text vectors
//   feature:  each raw feature value scales its learned embedding row of E;
//             scores w_feature . tanh(f_i) over the per-feature embeddings
//   modality: scores w_text . z_text and w_num . z_num (no tanh)
// plus the affine adapter mapping the aggregated text vector to hidden size.
// Temperatures are hyperparameters, not learned.
struct AttnParams {
  int d_ch = 0;
  int n_features = 0;
  int embed = 0;   // feature-embedding width, equals the encoder input size
  int hidden = 0;  // modality embedding width, equals the encoder hidden size
  Param w_chapter;           // d_ch
  Param E;                   // n_features × embed
  Param w_feature;           // embed
  Param adapter_W;           // hidden × d_ch
  Param adapter_b;           // hidden
  Param w_text, w_num;       // hidden

  double tau_chapter = 0.55;
  double tau_feature = 0.9;
  double tau_modality = 2.6;

  AttnParams() = default;
  AttnParams(int d_ch, int n_features, int embed, int hidden);
  void init(SeededRng& rng);
  void collect(std::vector<Param*>& out);
};

struct AttnNodeIds {
  int w_chapter, E, w_feature, adapter_W, adapter_b, w_text, w_num;
};
AttnNodeIds bind(Tape& tape, AttnParams& p);

enum class AggMode { kAttention, kUniform };  // kUniform: unweighted means

struct AttnNodes {
  int weights = -1;    // simplex vector node
  int aggregate = -1;  // weighted combination node
};

AttnNodes chapter_attention_graph(Tape& tape, const AttnNodeIds& ids, int notice,
                                  int risk, double tau, AggMode mode);
AttnNodes feature_attention_graph(Tape& tape, const AttnNodeIds& ids,
                                  std::span<const double> x_raw, double tau,
                                  AggMode mode);
AttnNodes modality_attention_graph(Tape& tape, const AttnNodeIds& ids, int z_text,
                                   int z_num, double tau, AggMode mode);

// Interpretability records.
enum class AttnLevel { kFeature, kChapter, kModality };

struct AttentionRecord {
  AttnLevel level;
  std::vector<double> weights;
  long step = -1;           // quarter index (feature level only)
  int offset_from_end = 0;  // 1 = last valid step (feature level only)
  std::string sample_id;
};

using AttentionSink = std::vector<AttentionRecord>;

// Eager wrappers.
struct ChapterAttention {
  std::vector<double> alpha;   // 2-simplex (notice, risk)
  std::vector<double> h_text;  // d_ch
};
ChapterAttention chapter_attention(std::span<const double> h_notice,
                                   std::span<const double> h_risk, AttnParams& params);

struct FeatureAttention {
  std::vector<double> alpha;  // n_features simplex
  std::vector<double> x_t;    // embed
};
FeatureAttention feature_attention(std::span<const double> x_raw, AttnParams& params);

struct ModalityAttention {
  std::vector<double> beta;      // 2-simplex (text, numeric)
  std::vector<double> z_fusion;  // hidden
};
ModalityAttention modality_attention(std::span<const double> z_text,
                                     std::span<const double> z_num, AttnParams& params);

}  // namespace emdlot

#endif
