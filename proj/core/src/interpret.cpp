#include "emdlot/interpret.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "emdlot/dataset.hpp"

namespace emdlot {

namespace {

std::string two_decimals(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", pct);
  return buf;
}

bool is_macro_feature(const std::string& name) { return name.rfind("macro_", 0) == 0; }

}  // namespace

std::string ModalityReport::format() const {
  return two_decimals(numeric * 100.0) + " / " + two_decimals(text * 100.0);
}

std::string ChapterReport::format() const {
  return two_decimals(risk * 100.0) + " / " + two_decimals(notice * 100.0);
}

ModalityReport modality_report(std::span<const AttentionRecord> records) {
  ModalityReport rep;
  for (const auto& r : records) {
    if (r.level != AttnLevel::kModality) continue;
    rep.text += r.weights[0];
    rep.numeric += r.weights[1];
    rep.n_records++;
  }
  if (rep.n_records == 0) throw std::invalid_argument("modality_report: no records");
  rep.text /= static_cast<double>(rep.n_records);
  rep.numeric /= static_cast<double>(rep.n_records);
  return rep;
}

ChapterReport chapter_report(std::span<const AttentionRecord> records) {
  ChapterReport rep;
  for (const auto& r : records) {
    if (r.level != AttnLevel::kChapter) continue;
    rep.notice += r.weights[0];
    rep.risk += r.weights[1];
    rep.n_records++;
  }
  if (rep.n_records == 0) throw std::invalid_argument("chapter_report: no records");
  rep.notice /= static_cast<double>(rep.n_records);
  rep.risk /= static_cast<double>(rep.n_records);
  return rep;
}

std::vector<HeatmapGrid> feature_heatmaps(std::span<const AttentionRecord> records,
                                          std::span<const std::string> sample_ids,
                                          std::span<const int> assignments,
                                          const std::vector<std::string>& feature_names,
                                          int num_clusters, FeatureGroup group,
                                          int window, int top_n) {
  if (sample_ids.size() != assignments.size())
    throw std::invalid_argument("feature_heatmaps: ids/assignments mismatch");
  std::map<std::string, int> cluster_of;
  for (size_t i = 0; i < sample_ids.size(); ++i)
    cluster_of[sample_ids[i]] = assignments[i];

  std::vector<size_t> group_features;
  for (size_t f = 0; f < feature_names.size(); ++f) {
    const bool macro = is_macro_feature(feature_names[f]);
    if ((group == FeatureGroup::kMacro) == macro) group_features.push_back(f);
  }

  // The macro group is population level: one pseudo-cluster holding everyone.
  const bool population = group == FeatureGroup::kMacro;
  const int n_grids = population ? 1 : num_clusters;

  int max_offset_seen = 0;
  for (const auto& r : records)
    if (r.level == AttnLevel::kFeature) max_offset_seen = std::max(max_offset_seen, r.offset_from_end);
  const int effective_window = std::min(window, max_offset_seen);

  std::vector<HeatmapGrid> grids;
  for (int c = 0; c < n_grids; ++c) {
    // sums[f][o] over records with offset o+1.
    std::vector<std::vector<double>> sums(feature_names.size(),
                                          std::vector<double>(effective_window, 0.0));
    std::vector<std::vector<size_t>> counts(feature_names.size(),
                                            std::vector<size_t>(effective_window, 0));
    std::set<std::string> members;
    for (const auto& r : records) {
      if (r.level != AttnLevel::kFeature) continue;
      if (r.offset_from_end < 1 || r.offset_from_end > effective_window) continue;
      auto it = cluster_of.find(r.sample_id);
      if (it == cluster_of.end()) continue;
      if (!population && it->second != c) continue;
      members.insert(r.sample_id);
      const int o = r.offset_from_end - 1;
      for (size_t f = 0; f < feature_names.size(); ++f) {
        sums[f][o] += r.weights[f];
        counts[f][o]++;
      }
    }

    std::vector<std::vector<double>> means(group_features.size(),
                                           std::vector<double>(effective_window, 0.0));
    std::vector<double> totals(group_features.size(), 0.0);
    for (size_t gi = 0; gi < group_features.size(); ++gi) {
      const size_t f = group_features[gi];
      for (int o = 0; o < effective_window; ++o) {
        if (counts[f][o] > 0)
          means[gi][o] = sums[f][o] / static_cast<double>(counts[f][o]);
        totals[gi] += means[gi][o];
      }
    }

    std::vector<size_t> order(group_features.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return totals[a] > totals[b]; });
    const size_t keep = std::min<size_t>(top_n, order.size());

    HeatmapGrid grid;
    grid.cluster_id = population ? -1 : c;
    grid.truncated = effective_window < window;
    grid.n_samples = members.size();
    // Columns run oldest to newest: Q-window .. Q-1.
    for (int o = effective_window; o >= 1; --o) grid.offsets.push_back(o);
    for (size_t i = 0; i < keep; ++i) {
      const size_t gi = order[i];
      grid.rows.push_back(feature_names[group_features[gi]]);
      std::vector<double> row;
      for (int o = effective_window - 1; o >= 0; --o) row.push_back(means[gi][o]);
      grid.cells.push_back(std::move(row));
    }
    grids.push_back(std::move(grid));
  }
  return grids;
}

CompositionTable composition_table(std::span<const int> assignments,
                                   std::span<const int> labels, int num_clusters) {
  if (assignments.size() != labels.size())
    throw std::invalid_argument("composition_table: size mismatch");
  CompositionTable table;
  table.counts.assign(num_clusters, {0, 0, 0});
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] < 0 || assignments[i] >= num_clusters)
      throw std::invalid_argument("composition_table: assignment out of range");
    table.counts[assignments[i]][labels[i]]++;
  }
  return table;
}

size_t CompositionTable::total() const {
  size_t t = 0;
  for (const auto& row : counts)
    for (size_t c : row) t += c;
  return t;
}

std::string CompositionTable::to_csv() const {
  std::string out = "cluster,performing,extended,defaulted\n";
  for (size_t c = 0; c < counts.size(); ++c) {
    out += std::to_string(c);
    for (size_t cls = 0; cls < kNumClasses; ++cls)
      out += "," + std::to_string(counts[c][cls]);
    out += "\n";
  }
  return out;
}

void write_heatmap_csv(const HeatmapGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "feature";
  for (int o : grid.offsets) out << ",Q-" << o;
  out << "\n";
  for (size_t r = 0; r < grid.rows.size(); ++r) {
    out << grid.rows[r];
    for (double v : grid.cells[r]) out << "," << format_double(v);
    out << "\n";
  }
}

}  // namespace emdlot
