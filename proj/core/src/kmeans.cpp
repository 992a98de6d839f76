#include "emdlot/kmeans.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "emdlot/rng.hpp"

namespace emdlot {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    uint64_t seed, int max_iter) {
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (points.size() < static_cast<size_t>(k))
    throw std::invalid_argument("kmeans: need at least k points");
  if (max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be >= 1");

  const size_t n = points.size();
  SeededRng rng(seed);
  KMeansResult res;

  // k-means++ seeding.
  res.centroids.push_back(points[rng.uniform_int(n)]);
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  while (res.centroids.size() < static_cast<size_t>(k)) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      min_sq[i] = std::min(min_sq[i], sq_dist(points[i], res.centroids.back()));
      total += min_sq[i];
    }
    size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (size_t i = 0; i < n; ++i) {
        acc += min_sq[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      // All points coincide with existing centroids; any choice is fine.
      pick = rng.uniform_int(n);
    }
    res.centroids.push_back(points[pick]);
  }

  res.labels.assign(n, 0);
  std::vector<int> prev_labels(n, -1);

  for (int iter = 0; iter < max_iter; ++iter) {
    // Assignment step.
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_k = 0;
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(points[i], res.centroids[c]);
        if (d < best) {
          best = d;
          best_k = c;
        }
      }
      res.labels[i] = best_k;
    }

    // Empty clusters re-seed at the point farthest from its assigned centroid.
    std::vector<size_t> counts(k, 0);
    for (int l : res.labels) counts[l]++;
    bool reseeded = false;
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      double far = -1.0;
      size_t far_i = 0;
      for (size_t i = 0; i < n; ++i) {
        if (counts[res.labels[i]] <= 1) continue;  // do not strand another cluster
        const double d = sq_dist(points[i], res.centroids[res.labels[i]]);
        if (d > far) {
          far = d;
          far_i = i;
        }
      }
      if (far < 0.0) continue;  // degenerate: every cluster holds one point
      res.centroids[c] = points[far_i];
      counts[res.labels[far_i]]--;
      res.labels[far_i] = c;
      counts[c] = 1;
      reseeded = true;
    }

    // Update step.
    const size_t dim = points[0].size();
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      std::vector<double> mean(dim, 0.0);
      for (size_t i = 0; i < n; ++i) {
        if (res.labels[i] != c) continue;
        for (size_t j = 0; j < dim; ++j) mean[j] += points[i][j];
      }
      for (size_t j = 0; j < dim; ++j) mean[j] /= static_cast<double>(counts[c]);
      res.centroids[c] = std::move(mean);
    }

    double wcss = 0.0;
    for (size_t i = 0; i < n; ++i) wcss += sq_dist(points[i], res.centroids[res.labels[i]]);
    res.wcss_history.push_back(wcss);
    res.iterations = iter + 1;

    if (!reseeded && res.labels == prev_labels) break;
    prev_labels = res.labels;
  }
  return res;
}

}  // namespace emdlot
