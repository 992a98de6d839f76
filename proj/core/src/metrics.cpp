#include "emdlot/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace emdlot {

ScoredPrediction make_scored(std::vector<double> probs, int truth) {
  if (probs.empty()) throw std::invalid_argument("make_scored: empty probs");
  ScoredPrediction p;
  p.predicted = 0;
  for (size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[p.predicted]) p.predicted = static_cast<int>(i);
  p.probs = std::move(probs);
  p.truth = truth;
  return p;
}

PrfResult macro_prf(std::span<const ScoredPrediction> preds) {
  if (preds.empty()) throw std::invalid_argument("macro_prf: empty predictions");
  PrfResult r;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    size_t tp = 0, fp = 0, fn = 0;
    for (const auto& p : preds) {
      if (p.predicted == cls && p.truth == cls) tp++;
      else if (p.predicted == cls) fp++;
      else if (p.truth == cls) fn++;
    }
    const double prec = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double rec = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    const double f1 = prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec);
    r.precision_per_class[cls] = prec;
    r.recall_per_class[cls] = rec;
    r.f1_per_class[cls] = f1;
    r.precision += prec / kNumClasses;
    r.recall += rec / kNumClasses;
    r.f1 += f1 / kNumClasses;
  }
  return r;
}

AucResult auc_ovr(std::span<const ScoredPrediction> preds) {
  if (preds.empty()) throw std::invalid_argument("auc_ovr: empty predictions");
  AucResult r;
  int defined_count = 0;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    size_t npos = 0;
    for (const auto& p : preds)
      if (p.truth == cls) npos++;
    const size_t nneg = preds.size() - npos;
    if (npos == 0 || nneg == 0) {
      r.defined[cls] = false;
      continue;
    }
    // Rank statistic with average ranks for ties.
    std::vector<size_t> idx(preds.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return preds[a].probs[cls] < preds[b].probs[cls];
    });
    std::vector<double> rank(preds.size());
    size_t i = 0;
    while (i < idx.size()) {
      size_t j = i;
      while (j + 1 < idx.size() &&
             preds[idx[j + 1]].probs[cls] == preds[idx[i]].probs[cls])
        j++;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (size_t t = i; t <= j; ++t) rank[idx[t]] = avg;
      i = j + 1;
    }
    double rank_sum = 0.0;
    for (size_t t = 0; t < preds.size(); ++t)
      if (preds[t].truth == cls) rank_sum += rank[t];
    const double auc =
        (rank_sum - static_cast<double>(npos) * (npos + 1) / 2.0) /
        (static_cast<double>(npos) * static_cast<double>(nneg));
    r.per_class[cls] = auc;
    r.defined[cls] = true;
    r.auc += auc;
    defined_count++;
  }
  if (defined_count > 0) r.auc /= defined_count;
  return r;
}

ApResult mean_ap(std::span<const ScoredPrediction> preds) {
  if (preds.empty()) throw std::invalid_argument("mean_ap: empty predictions");
  ApResult r;
  int defined_count = 0;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    size_t npos = 0;
    for (const auto& p : preds)
      if (p.truth == cls) npos++;
    if (npos == 0) {
      r.defined[cls] = false;
      continue;
    }
    std::vector<size_t> idx(preds.size());
    std::iota(idx.begin(), idx.end(), 0);
    // Descending by score, ties kept in sample order.
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return preds[a].probs[cls] > preds[b].probs[cls];
    });
    double ap = 0.0;
    size_t tp = 0;
    for (size_t rank = 0; rank < idx.size(); ++rank) {
      if (preds[idx[rank]].truth != cls) continue;
      tp++;
      ap += static_cast<double>(tp) / static_cast<double>(rank + 1);
    }
    ap /= static_cast<double>(npos);
    r.per_class[cls] = ap;
    r.defined[cls] = true;
    r.map += ap;
    defined_count++;
  }
  if (defined_count > 0) r.map /= defined_count;
  return r;
}

MetricReport compute_metrics(std::span<const ScoredPrediction> preds) {
  MetricReport rep;
  const auto prf = macro_prf(preds);
  rep.precision = prf.precision;
  rep.recall = prf.recall;
  rep.f1 = prf.f1;
  rep.precision_per_class = prf.precision_per_class;
  rep.recall_per_class = prf.recall_per_class;
  rep.f1_per_class = prf.f1_per_class;
  const auto auc = auc_ovr(preds);
  rep.auc_ovr = auc.auc;
  rep.auc_per_class = auc.per_class;
  rep.auc_defined = auc.defined;
  const auto ap = mean_ap(preds);
  rep.map = ap.map;
  rep.ap_per_class = ap.per_class;
  rep.ap_defined = ap.defined;
  std::set<int> seen;
  for (const auto& p : preds) seen.insert(p.predicted);
  rep.unique_preds = static_cast<int>(seen.size());
  return rep;
}

double composite_score(const MetricReport& report) {
  return 0.4 * report.recall + 0.25 * report.f1 + 0.25 * report.auc_ovr +
         0.1 * report.map;
}

double objective_score(const MetricReport& report) {
  const double composite = composite_score(report);
  if (report.unique_preds == kNumClasses) return composite;
  return 0.5 * composite + 0.3 * (static_cast<double>(report.unique_preds) / 3.0);
}

bool MetricReport::any_auc_excluded() const {
  for (bool d : auc_defined)
    if (!d) return true;
  return false;
}

bool MetricReport::any_ap_excluded() const {
  for (bool d : ap_defined)
    if (!d) return true;
  return false;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["recall"] = recall;
  j["precision"] = precision;
  j["f1"] = f1;
  j["auc_ovr"] = auc_ovr;
  j["map"] = map;
  j["unique_preds"] = unique_preds;
  j["recall_per_class"] = recall_per_class;
  j["precision_per_class"] = precision_per_class;
  j["f1_per_class"] = f1_per_class;
  j["auc_per_class"] = auc_per_class;
  j["ap_per_class"] = ap_per_class;
  j["auc_defined"] = auc_defined;
  j["ap_defined"] = ap_defined;
  return j.dump(2);
}

MetricReport MetricReport::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MetricReport r;
  r.recall = j.at("recall").get<double>();
  r.precision = j.at("precision").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.auc_ovr = j.at("auc_ovr").get<double>();
  r.map = j.at("map").get<double>();
  r.unique_preds = j.at("unique_preds").get<int>();
  j.at("recall_per_class").get_to(r.recall_per_class);
  j.at("precision_per_class").get_to(r.precision_per_class);
  j.at("f1_per_class").get_to(r.f1_per_class);
  j.at("auc_per_class").get_to(r.auc_per_class);
  j.at("ap_per_class").get_to(r.ap_per_class);
  j.at("auc_defined").get_to(r.auc_defined);
  j.at("ap_defined").get_to(r.ap_defined);
  return r;
}

}  // namespace emdlot
