#include "emdlot/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "emdlot/rng.hpp"

namespace emdlot {

ExcludeResult exclude_pre_default(const Dataset& ds, int n_quarters) {
  if (n_quarters < 0) throw std::invalid_argument("exclude_pre_default: n_quarters >= 0");
  ExcludeResult res;
  res.dataset.feature_names = ds.feature_names;
  res.dataset.d_ch = ds.d_ch;
  for (const auto& s : ds.samples) {
    if (s.label == Label::kPerforming || n_quarters == 0) {
      res.dataset.samples.push_back(s);
      continue;
    }
    const size_t n = s.series.steps.size();
    const size_t removed = std::min<size_t>(n, static_cast<size_t>(n_quarters));
    res.removed_steps += removed;
    if (n <= static_cast<size_t>(n_quarters)) {
      res.dropped_samples++;
      continue;
    }
    Sample trimmed = s;
    trimmed.series.steps.resize(n - removed);
    res.dataset.samples.push_back(std::move(trimmed));
  }
  return res;
}

SplitResult split(const Dataset& ds, double train_frac, uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw std::invalid_argument("split: train_frac must be in (0,1)");
  SplitResult res;
  res.train.feature_names = res.test.feature_names = ds.feature_names;
  res.train.d_ch = res.test.d_ch = ds.d_ch;

  SeededRng rng(seed);
  for (int cls = 0; cls < kNumClasses; ++cls) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < ds.samples.size(); ++i)
      if (static_cast<int>(ds.samples[i].label) == cls) idx.push_back(i);
    if (idx.empty()) continue;
    if (idx.size() == 1) {
      res.train.samples.push_back(ds.samples[idx[0]]);
      res.warnings.push_back("class " + std::to_string(cls) +
                             " has a single sample; assigned to train");
      continue;
    }
    rng.shuffle(idx);
    size_t n_train = static_cast<size_t>(
        std::llround(train_frac * static_cast<double>(idx.size())));
    n_train = std::min(n_train, idx.size() - 1);  // keep >= 1 test sample
    n_train = std::max<size_t>(n_train, 1);
    for (size_t i = 0; i < idx.size(); ++i) {
      (i < n_train ? res.train : res.test).samples.push_back(ds.samples[idx[i]]);
    }
  }
  return res;
}

ImputeResult impute(const Dataset& ds, uint64_t seed) {
  ImputeResult res;
  res.dataset = ds;
  const int nf = ds.num_features();
  std::vector<double> sum(nf, 0.0), sum_sq(nf, 0.0);
  std::vector<size_t> count(nf, 0);
  for (const auto& s : ds.samples) {
    for (const auto& step : s.series.steps) {
      for (int f = 0; f < nf; ++f) {
        if (!step.observed[f]) continue;
        sum[f] += step.values[f];
        sum_sq[f] += step.values[f] * step.values[f];
        count[f]++;
      }
    }
  }
  std::vector<double> mean(nf, 0.0), sd(nf, 0.0);
  for (int f = 0; f < nf; ++f) {
    if (count[f] == 0) {
      res.warnings.push_back("feature '" + ds.feature_names[f] +
                             "' never observed; filling with 0");
      continue;
    }
    mean[f] = sum[f] / static_cast<double>(count[f]);
    const double var =
        std::max(0.0, sum_sq[f] / static_cast<double>(count[f]) - mean[f] * mean[f]);
    sd[f] = std::sqrt(var);
  }

  SeededRng rng(seed);
  for (auto& s : res.dataset.samples) {
    for (auto& step : s.series.steps) {
      for (int f = 0; f < nf; ++f) {
        if (step.observed[f]) continue;
        step.values[f] = count[f] == 0 ? 0.0 : mean[f] + rng.normal() * 0.1 * sd[f];
      }
    }
  }
  return res;
}

std::vector<double> flatten_sample(const Sample& s, int num_features) {
  const int nf = num_features;
  std::vector<double> flat;
  flat.reserve(2 * nf + s.text.notice.size() + s.text.risk.size());

  for (int f = 0; f < nf; ++f) {
    double acc = 0.0;
    size_t n = 0;
    for (const auto& step : s.series.steps) {
      if (step.observed[f] && !std::isnan(step.values[f])) {
        acc += step.values[f];
        n++;
      }
    }
    if (n == 0) {
      // Fall back to imputed values, then to 0.
      for (const auto& step : s.series.steps) {
        if (!std::isnan(step.values[f])) {
          acc += step.values[f];
          n++;
        }
      }
    }
    flat.push_back(n == 0 ? 0.0 : acc / static_cast<double>(n));
  }
  for (int f = 0; f < nf; ++f) {
    double last = 0.0;
    bool found = false;
    for (auto it = s.series.steps.rbegin(); it != s.series.steps.rend(); ++it) {
      if (it->observed[f] && !std::isnan(it->values[f])) {
        last = it->values[f];
        found = true;
        break;
      }
    }
    if (!found) {
      for (auto it = s.series.steps.rbegin(); it != s.series.steps.rend(); ++it) {
        if (!std::isnan(it->values[f])) {
          last = it->values[f];
          found = true;
          break;
        }
      }
    }
    flat.push_back(last);
  }
  flat.insert(flat.end(), s.text.notice.begin(), s.text.notice.end());
  flat.insert(flat.end(), s.text.risk.begin(), s.text.risk.end());
  return flat;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Sample make_synthetic(const Sample& base, const Sample& neighbor, double t) {
  Sample out = base;
  out.synthetic = true;
  const size_t common = std::min(base.series.steps.size(), neighbor.series.steps.size());
  for (size_t i = 0; i < out.series.steps.size(); ++i) {
    auto& step = out.series.steps[i];
    if (i < common) {
      const auto& nstep = neighbor.series.steps[i];
      for (size_t f = 0; f < step.values.size(); ++f)
        step.values[f] = (1.0 - t) * base.series.steps[i].values[f] + t * nstep.values[f];
    }
    std::fill(step.observed.begin(), step.observed.end(), 1);
  }
  for (size_t d = 0; d < out.text.notice.size(); ++d)
    out.text.notice[d] = (1.0 - t) * base.text.notice[d] + t * neighbor.text.notice[d];
  for (size_t d = 0; d < out.text.risk.size(); ++d)
    out.text.risk[d] = (1.0 - t) * base.text.risk[d] + t * neighbor.text.risk[d];
  return out;
}

}  // namespace

SmoteResult smote(const Dataset& train, int k_neighbors, uint64_t seed) {
  if (k_neighbors < 1) throw std::invalid_argument("smote: k_neighbors >= 1");
  SmoteResult res;
  res.dataset = train;

  auto counts = train.class_counts();
  const size_t majority = *std::max_element(counts.begin(), counts.end());
  SeededRng rng(seed);
  const int nf = train.num_features();

  std::vector<std::vector<double>> flats(train.samples.size());
  for (size_t i = 0; i < train.samples.size(); ++i)
    flats[i] = flatten_sample(train.samples[i], nf);

  for (int cls = 0; cls < kNumClasses; ++cls) {
    const size_t have = counts[cls];
    if (have == 0 || have == majority) continue;
    std::vector<size_t> members;
    for (size_t i = 0; i < train.samples.size(); ++i)
      if (static_cast<int>(train.samples[i].label) == cls) members.push_back(i);

    size_t need = majority - have;
    if (members.size() == 1) {
      // No neighbor to interpolate with: duplicate with small noise.
      res.warnings.push_back("class " + std::to_string(cls) +
                             " has one sample; duplicating with noise");
      for (size_t s = 0; s < need; ++s) {
        Sample dup = train.samples[members[0]];
        dup.synthetic = true;
        for (auto& step : dup.series.steps) {
          for (auto& v : step.values) v += rng.normal() * 1e-3;
          std::fill(step.observed.begin(), step.observed.end(), 1);
        }
        res.dataset.samples.push_back(std::move(dup));
        res.synthetics.push_back({members[0], members[0], 0.0, cls});
      }
      continue;
    }

    // k nearest same-class neighbors per member, in flattened space.
    const size_t k = std::min<size_t>(k_neighbors, members.size() - 1);
    std::vector<std::vector<size_t>> neighbors(members.size());
    for (size_t a = 0; a < members.size(); ++a) {
      std::vector<std::pair<double, size_t>> dists;
      for (size_t b = 0; b < members.size(); ++b) {
        if (a == b) continue;
        dists.emplace_back(sq_dist(flats[members[a]], flats[members[b]]), members[b]);
      }
      std::stable_sort(dists.begin(), dists.end());
      for (size_t j = 0; j < k; ++j) neighbors[a].push_back(dists[j].second);
    }

    for (size_t s = 0; s < need; ++s) {
      const size_t a = s % members.size();
      const size_t base = members[a];
      const size_t nb = neighbors[a][rng.uniform_int(neighbors[a].size())];
      double t;
      do {
        t = rng.uniform();
      } while (t == 0.0);  // open interval (0,1)
      res.dataset.samples.push_back(make_synthetic(train.samples[base],
                                                   train.samples[nb], t));
      res.synthetics.push_back({base, nb, t, cls});
    }
  }
  return res;
}

}  // namespace emdlot
