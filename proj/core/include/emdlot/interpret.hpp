#ifndef EMDLOT_INTERPRET_HPP
#define EMDLOT_INTERPRET_HPP

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "emdlot/attention.hpp"
#include "emdlot/dataset.hpp"

namespace emdlot {

struct ModalityReport {
  double text = 0.0;
  double numeric = 0.0;
  size_t n_records = 0;
  // Two percentages to 2 decimals, numeric first, e.g. "78.10 / 21.90".
  std::string format() const;
};

// Mean modality weights over all recorded samples (and runs, if records from
// several runs are concatenated). Throws if no modality records are present.
ModalityReport modality_report(std::span<const AttentionRecord> records);

struct ChapterReport {
  double notice = 0.0;
  double risk = 0.0;
  size_t n_records = 0;
  std::string format() const;  // risk first, e.g. "59.17 / 40.83"
};

ChapterReport chapter_report(std::span<const AttentionRecord> records);

struct HeatmapGrid {
  int cluster_id = -1;  // -1 = population level (macro group)
  std::vector<std::string> rows;          // top-N feature names
  std::vector<int> offsets;               // quarters before sequence end, window..1
  std::vector<std::vector<double>> cells; // rows x offsets, mean attention
  size_t n_samples = 0;
  bool truncated = false;  // window exceeded every sequence length
};

enum class FeatureGroup { kFinancial, kMacro };

// Per-cluster mean feature-attention maps over the last `window` observed
// quarters. Samples are hard-assigned to their argmax cluster. Features whose
// name starts with "macro_" form the macro group, which is reported as a
// single population-level grid; all other features are the financial group.
std::vector<HeatmapGrid> feature_heatmaps(std::span<const AttentionRecord> records,
                                          std::span<const std::string> sample_ids,
                                          std::span<const int> assignments,
                                          const std::vector<std::string>& feature_names,
                                          int num_clusters, FeatureGroup group,
                                          int window = 8, int top_n = 10);

struct CompositionTable {
  // counts[cluster][class]
  std::vector<std::array<size_t, kNumClasses>> counts;
  size_t total() const;
  std::string to_csv() const;
};

CompositionTable composition_table(std::span<const int> assignments,
                                   std::span<const int> labels, int num_clusters);

void write_heatmap_csv(const HeatmapGrid& grid, const std::filesystem::path& path);

}  // namespace emdlot

#endif
