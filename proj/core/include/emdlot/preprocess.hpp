#ifndef EMDLOT_PREPROCESS_HPP
#define EMDLOT_PREPROCESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "emdlot/dataset.hpp"

namespace emdlot {

struct ExcludeResult {
  Dataset dataset;
  size_t removed_steps = 0;
  size_t dropped_samples = 0;  // non-performing samples with too few steps
};

// Removes the last n_quarters steps from every non-performing sample;
// performing samples pass through untouched. Samples left with no steps are
// dropped and counted.
ExcludeResult exclude_pre_default(const Dataset& ds, int n_quarters = 2);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::string> warnings;
};

// Stratified split: per class, round(train_frac * n) samples go to train
// (half away from zero), adjusted so every class with >= 2 samples keeps at
// least 1 test sample. Singleton classes go to train with a warning.
SplitResult split(const Dataset& ds, double train_frac, uint64_t seed);

struct ImputeResult {
  Dataset dataset;
  std::vector<std::string> warnings;
};

// Fills each missing cell with the per-feature mean of observed values plus
// Gaussian noise scaled by 0.1 * per-feature standard deviation. Features
// never observed anywhere are filled with 0 and flagged. Observed masks are
// retained.
ImputeResult impute(const Dataset& ds, uint64_t seed);

// Flattened sample representation used by SMOTE neighbor search and
// interpolation: [per-feature mean over observed steps | per-feature last
// observed value | notice | risk]. Length 2F + 2*d_ch.
std::vector<double> flatten_sample(const Sample& s, int num_features);

struct SmoteRecord {
  size_t base_index;      // index into the input dataset
  size_t neighbor_index;  // same-class neighbor it interpolates toward
  double t;               // interpolation weight in (0,1)
  int cls;
};

struct SmoteResult {
  Dataset dataset;
  std::vector<SmoteRecord> synthetics;  // aligned with appended samples
  std::vector<std::string> warnings;
};

// Oversamples every minority class up to the majority count. Each synthetic
// sample interpolates a base sample with one of its k nearest same-class
// neighbors (distance in flatten_sample space) at uniform t in (0,1). Series
// are rebuilt by blending the base's steps with the neighbor's, position by
// position over the steps both have, keeping the base's delta_t; synthetic
// samples are marked fully observed.
SmoteResult smote(const Dataset& train, int k_neighbors = 5, uint64_t seed = 0);

}  // namespace emdlot

#endif
