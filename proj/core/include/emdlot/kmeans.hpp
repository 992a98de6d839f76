#ifndef EMDLOT_KMEANS_HPP
#define EMDLOT_KMEANS_HPP

#include <cstdint>
#include <vector>

namespace emdlot {

struct KMeansResult {
  std::vector<std::vector<double>> centroids;  // k rows
  std::vector<int> labels;                     // nearest-centroid assignment
  std::vector<double> wcss_history;            // within-cluster SS per iteration
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. A cluster that empties during an
// iteration is re-seeded at the point farthest from its current centroid.
// Deterministic for a given seed.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    uint64_t seed, int max_iter = 100);

}  // namespace emdlot

#endif
