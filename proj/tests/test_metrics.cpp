#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "emdlot/metrics.hpp"
#include "emdlot/rng.hpp"
#include "emdlot/tensor.hpp"

using namespace emdlot;

namespace {

std::vector<ScoredPrediction> from_table(const std::vector<int>& truth,
                                         const std::vector<int>& predicted) {
  std::vector<ScoredPrediction> out;
  for (size_t i = 0; i < truth.size(); ++i) {
    ScoredPrediction p;
    p.probs = {0.0, 0.0, 0.0};
    p.probs[predicted[i]] = 1.0;
    p.predicted = predicted[i];
    p.truth = truth[i];
    out.push_back(p);
  }
  return out;
}

// Independent oracle: direct confusion counting.
void oracle_prf(const std::vector<ScoredPrediction>& preds, int cls, double& prec,
                double& rec, double& f1) {
  int tp = 0, fp = 0, fn = 0;
  for (const auto& p : preds) {
    const bool pred_c = p.predicted == cls;
    const bool true_c = p.truth == cls;
    tp += pred_c && true_c;
    fp += pred_c && !true_c;
    fn += !pred_c && true_c;
  }
  prec = tp + fp > 0 ? double(tp) / (tp + fp) : 0.0;
  rec = tp + fn > 0 ? double(tp) / (tp + fn) : 0.0;
  f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
}

// Independent oracle: enumerate every positive-negative pair.
bool oracle_auc(const std::vector<ScoredPrediction>& preds, int cls, double& auc) {
  double wins = 0.0;
  long pairs = 0;
  for (const auto& pos : preds) {
    if (pos.truth != cls) continue;
    for (const auto& neg : preds) {
      if (neg.truth == cls) continue;
      pairs++;
      if (pos.probs[cls] > neg.probs[cls]) wins += 1.0;
      else if (pos.probs[cls] == neg.probs[cls]) wins += 0.5;
    }
  }
  if (pairs == 0) return false;
  auc = wins / double(pairs);
  return true;
}

// Independent oracle: walk the descending ranking, precision at each positive.
bool oracle_ap(const std::vector<ScoredPrediction>& preds, int cls, double& ap) {
  std::vector<size_t> idx(preds.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return preds[a].probs[cls] > preds[b].probs[cls];
  });
  int npos = 0;
  for (const auto& p : preds) npos += p.truth == cls;
  if (npos == 0) return false;
  double sum = 0.0;
  int seen_pos = 0;
  for (size_t r = 0; r < idx.size(); ++r) {
    if (preds[idx[r]].truth == cls) {
      seen_pos++;
      sum += double(seen_pos) / double(r + 1);
    }
  }
  ap = sum / npos;
  return true;
}

}  // namespace

TEST_CASE("macro_prf hand cases") {
  SUBCASE("perfect predictions") {
    auto preds = from_table({0, 1, 2, 0, 1, 2}, {0, 1, 2, 0, 1, 2});
    auto r = macro_prf(preds);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
  }
  SUBCASE("everything predicted as class 0") {
    auto preds = from_table({0, 1, 2}, {0, 0, 0});
    auto r = macro_prf(preds);
    CHECK(r.recall == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(r.precision == doctest::Approx(1.0 / 9).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(1.0 / 6).epsilon(1e-12));
    CHECK(r.recall_per_class[0] == 1.0);
    CHECK(r.precision_per_class[0] == doctest::Approx(1.0 / 3));
    CHECK(r.f1_per_class[0] == doctest::Approx(0.5));
  }
  SUBCASE("a class absent everywhere contributes zeros but stays in the mean") {
    auto preds = from_table({0, 1, 0, 1}, {0, 1, 1, 0});
    auto r = macro_prf(preds);
    CHECK(r.precision_per_class[2] == 0.0);
    CHECK(r.recall_per_class[2] == 0.0);
    CHECK(r.f1_per_class[2] == 0.0);
    CHECK(r.recall ==
          doctest::Approx((r.recall_per_class[0] + r.recall_per_class[1]) / 3.0));
  }
}

TEST_CASE("auc_ovr hand cases") {
  SUBCASE("perfect ordering gives 1") {
    std::vector<ScoredPrediction> preds;
    for (int i = 0; i < 6; ++i) {
      ScoredPrediction p;
      const bool pos = i < 3;
      p.truth = pos ? 0 : 1;
      p.probs = {pos ? 0.9 - 0.01 * i : 0.2 - 0.01 * i, 0.0, 0.0};
      p.predicted = 0;
      preds.push_back(p);
    }
    auto r = auc_ovr(preds);
    CHECK(r.per_class[0] == 1.0);
  }
  SUBCASE("identical scores give 0.5") {
    std::vector<ScoredPrediction> preds;
    for (int i = 0; i < 5; ++i) {
      ScoredPrediction p;
      p.truth = i % 2;
      p.probs = {0.4, 0.6, 0.0};
      p.predicted = 1;
      preds.push_back(p);
    }
    auto r = auc_ovr(preds);
    CHECK(r.per_class[0] == 0.5);
    CHECK(r.per_class[1] == 0.5);
  }
  SUBCASE("four-sample pair enumeration gives 0.75") {
    // scores for class 0: 0.9, 0.8, 0.3, 0.1; truth +,-,+,-
    std::vector<double> scores = {0.9, 0.8, 0.3, 0.1};
    std::vector<int> truth = {0, 1, 0, 1};
    std::vector<ScoredPrediction> preds;
    for (int i = 0; i < 4; ++i) {
      ScoredPrediction p;
      p.truth = truth[i];
      p.probs = {scores[i], 1.0 - scores[i], 0.0};
      p.predicted = 0;
      preds.push_back(p);
    }
    auto r = auc_ovr(preds);
    CHECK(r.per_class[0] == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("single-class truth marks the others undefined") {
    auto preds = from_table({1, 1, 1}, {1, 1, 1});
    auto r = auc_ovr(preds);
    CHECK_FALSE(r.defined[0]);
    CHECK_FALSE(r.defined[1]);  // no negatives for class 1 either
    CHECK_FALSE(r.defined[2]);
  }
}

TEST_CASE("mean_ap hand cases") {
  SUBCASE("positives ranked first give 1") {
    std::vector<ScoredPrediction> preds;
    for (int i = 0; i < 6; ++i) {
      ScoredPrediction p;
      p.truth = i < 2 ? 0 : 1;
      p.probs = {i < 2 ? 0.9 : 0.1, 0.0, 0.0};
      p.predicted = 0;
      preds.push_back(p);
    }
    auto r = mean_ap(preds);
    CHECK(r.per_class[0] == 1.0);
  }
  SUBCASE("single positive ranked second gives 0.5") {
    std::vector<ScoredPrediction> preds(2);
    preds[0].truth = 1;
    preds[0].probs = {0.8, 0.0, 0.0};
    preds[0].predicted = 0;
    preds[1].truth = 0;
    preds[1].probs = {0.3, 0.0, 0.0};
    preds[1].predicted = 0;
    auto r = mean_ap(preds);
    CHECK(r.per_class[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("metric implementations match brute-force oracles on 200 random instances") {
  SeededRng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 2 + rng.uniform_int(19);  // up to 20 samples
    std::vector<ScoredPrediction> preds(n);
    for (auto& p : preds) {
      std::vector<double> logits(3);
      for (auto& l : logits) l = rng.uniform(-2.0, 2.0);
      // Quantize occasionally to force score ties.
      if (rng.uniform() < 0.4)
        for (auto& l : logits) l = std::round(l * 2.0) / 2.0;
      p = make_scored(softmax_t(logits, 1.0), static_cast<int>(rng.uniform_int(3)));
    }

    auto prf = macro_prf(preds);
    double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0;
    for (int cls = 0; cls < 3; ++cls) {
      double pr, rc, f1;
      oracle_prf(preds, cls, pr, rc, f1);
      CHECK(std::abs(prf.precision_per_class[cls] - pr) <= 1e-12);
      CHECK(std::abs(prf.recall_per_class[cls] - rc) <= 1e-12);
      CHECK(std::abs(prf.f1_per_class[cls] - f1) <= 1e-12);
      macro_p += pr / 3;
      macro_r += rc / 3;
      macro_f += f1 / 3;
    }
    CHECK(std::abs(prf.precision - macro_p) <= 1e-12);
    CHECK(std::abs(prf.recall - macro_r) <= 1e-12);
    CHECK(std::abs(prf.f1 - macro_f) <= 1e-12);

    auto auc = auc_ovr(preds);
    for (int cls = 0; cls < 3; ++cls) {
      double expect;
      const bool defined = oracle_auc(preds, cls, expect);
      CHECK(auc.defined[cls] == defined);
      if (defined) CHECK(std::abs(auc.per_class[cls] - expect) <= 1e-12);
    }

    auto ap = mean_ap(preds);
    for (int cls = 0; cls < 3; ++cls) {
      double expect;
      const bool defined = oracle_ap(preds, cls, expect);
      CHECK(ap.defined[cls] == defined);
      if (defined) CHECK(std::abs(ap.per_class[cls] - expect) <= 1e-12);
    }
  }
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
  SeededRng rng(7);
  std::vector<ScoredPrediction> preds(15);
  for (auto& p : preds) {
    std::vector<double> logits(3);
    for (auto& l : logits) l = rng.uniform(-2.0, 2.0);
    p = make_scored(softmax_t(logits, 1.0), static_cast<int>(rng.uniform_int(3)));
  }
  auto base = auc_ovr(preds);
  auto transformed = preds;
  for (auto& p : transformed)
    for (auto& v : p.probs) v = v * v * v + 2.0 * v;  // strictly increasing
  auto after = auc_ovr(transformed);
  for (int cls = 0; cls < 3; ++cls)
    CHECK(std::abs(base.per_class[cls] - after.per_class[cls]) <= 1e-12);
}

TEST_CASE("class relabeling permutes per-class metrics, macro unchanged") {
  SeededRng rng(19);
  std::vector<ScoredPrediction> preds(18);
  for (auto& p : preds) {
    std::vector<double> logits(3);
    for (auto& l : logits) l = rng.uniform(-2.0, 2.0);
    p = make_scored(softmax_t(logits, 1.0), static_cast<int>(rng.uniform_int(3)));
  }
  const int perm[3] = {2, 0, 1};  // new = perm[old]
  auto renamed = preds;
  for (auto& p : renamed) {
    std::vector<double> probs(3);
    for (int c = 0; c < 3; ++c) probs[perm[c]] = p.probs[c];
    p = make_scored(probs, perm[p.truth]);
  }
  auto a = compute_metrics(preds);
  auto b = compute_metrics(renamed);
  CHECK(std::abs(a.recall - b.recall) <= 1e-12);
  CHECK(std::abs(a.precision - b.precision) <= 1e-12);
  CHECK(std::abs(a.f1 - b.f1) <= 1e-12);
  CHECK(std::abs(a.auc_ovr - b.auc_ovr) <= 1e-12);
  CHECK(std::abs(a.map - b.map) <= 1e-12);
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(a.recall_per_class[c] - b.recall_per_class[perm[c]]) <= 1e-12);
    CHECK(std::abs(a.auc_per_class[c] - b.auc_per_class[perm[c]]) <= 1e-12);
    CHECK(std::abs(a.ap_per_class[c] - b.ap_per_class[perm[c]]) <= 1e-12);
  }
}

TEST_CASE("all metric outputs live in [0,1]") {
  SeededRng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 3 + rng.uniform_int(12);
    std::vector<ScoredPrediction> preds(n);
    for (auto& p : preds) {
      std::vector<double> logits(3);
      for (auto& l : logits) l = rng.uniform(-3.0, 3.0);
      p = make_scored(softmax_t(logits, 1.0), static_cast<int>(rng.uniform_int(3)));
    }
    auto rep = compute_metrics(preds);
    for (double v : {rep.recall, rep.precision, rep.f1, rep.auc_ovr, rep.map}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("objective_score") {
  MetricReport r;
  r.recall = r.f1 = r.auc_ovr = r.map = 1.0;
  r.unique_preds = 3;
  CHECK(objective_score(r) == doctest::Approx(1.0).epsilon(1e-15));
  r.unique_preds = 2;
  CHECK(objective_score(r) == doctest::Approx(0.7).epsilon(1e-15));

  MetricReport zero;
  zero.unique_preds = 3;
  CHECK(objective_score(zero) == 0.0);

  MetricReport mixed;
  mixed.recall = 0.5;
  mixed.f1 = 0.4;
  mixed.auc_ovr = 0.9;
  mixed.map = 0.6;
  mixed.unique_preds = 3;
  CHECK(objective_score(mixed) ==
        doctest::Approx(0.4 * 0.5 + 0.25 * 0.4 + 0.25 * 0.9 + 0.1 * 0.6).epsilon(1e-15));
  CHECK(composite_score(mixed) == objective_score(mixed));
}

TEST_CASE("argmax ties break to the lowest class index") {
  auto p = make_scored({0.4, 0.4, 0.2}, 1);
  CHECK(p.predicted == 0);
}

TEST_CASE("report JSON round trip") {
  SeededRng rng(31);
  std::vector<ScoredPrediction> preds(12);
  for (auto& p : preds) {
    std::vector<double> logits(3);
    for (auto& l : logits) l = rng.uniform(-2.0, 2.0);
    p = make_scored(softmax_t(logits, 1.0), static_cast<int>(rng.uniform_int(3)));
  }
  auto rep = compute_metrics(preds);
  auto round = MetricReport::from_json_text(rep.to_json());
  CHECK(round.recall == rep.recall);
  CHECK(round.precision == rep.precision);
  CHECK(round.f1 == rep.f1);
  CHECK(round.auc_ovr == rep.auc_ovr);
  CHECK(round.map == rep.map);
  CHECK(round.unique_preds == rep.unique_preds);
  CHECK(round.auc_per_class == rep.auc_per_class);
}
