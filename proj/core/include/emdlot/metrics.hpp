#ifndef EMDLOT_METRICS_HPP
#define EMDLOT_METRICS_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "emdlot/dataset.hpp"

namespace emdlot {

struct ScoredPrediction {
  std::vector<double> probs;  // C-simplex
  int predicted = 0;          // argmax of probs, ties to the lowest class index
  int truth = 0;
};

ScoredPrediction make_scored(std::vector<double> probs, int truth);

struct MetricReport {
  double recall = 0, precision = 0, f1 = 0, auc_ovr = 0, map = 0;
  std::array<double, kNumClasses> recall_per_class{};
  std::array<double, kNumClasses> precision_per_class{};
  std::array<double, kNumClasses> f1_per_class{};
  std::array<double, kNumClasses> auc_per_class{};
  std::array<double, kNumClasses> ap_per_class{};
  // A class AUC is undefined without both positives and negatives in the
  // truth; an AP without positives. Undefined classes are excluded from the
  // macro mean and flagged.
  std::array<bool, kNumClasses> auc_defined{};
  std::array<bool, kNumClasses> ap_defined{};
  int unique_preds = 0;

  bool any_auc_excluded() const;
  bool any_ap_excluded() const;

  std::string to_json() const;
  static MetricReport from_json_text(const std::string& text);
};

struct PrfResult {
  double precision = 0, recall = 0, f1 = 0;
  std::array<double, kNumClasses> precision_per_class{};
  std::array<double, kNumClasses> recall_per_class{};
  std::array<double, kNumClasses> f1_per_class{};
};

// Per-class precision/recall with 0/0 defined as 0, F1 as their harmonic
// mean, macro means over all classes.
PrfResult macro_prf(std::span<const ScoredPrediction> preds);

struct AucResult {
  double auc = 0;
  std::array<double, kNumClasses> per_class{};
  std::array<bool, kNumClasses> defined{};
};

// One-vs-rest AUC per class via the rank statistic with ties credited 0.5;
// macro mean over the defined classes.
AucResult auc_ovr(std::span<const ScoredPrediction> preds);

struct ApResult {
  double map = 0;
  std::array<double, kNumClasses> per_class{};
  std::array<bool, kNumClasses> defined{};
};

// Step-wise average precision: precision summed at each positive rank under
// a descending stable sort of scores, divided by the positive count.
ApResult mean_ap(std::span<const ScoredPrediction> preds);

MetricReport compute_metrics(std::span<const ScoredPrediction> preds);

// 0.4*recall + 0.25*f1 + 0.25*auc + 0.1*map.
double composite_score(const MetricReport& report);

// Tuning objective: the composite score when all three classes are
// predicted, else half of it plus 0.3 * unique_preds / 3.
double objective_score(const MetricReport& report);

}  // namespace emdlot

#endif
