#ifndef EMDLOT_DATASET_HPP
#define EMDLOT_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace emdlot {

// Class codes are fixed for file round-tripping.
enum class Label : int { kPerforming = 0, kExtended = 1, kDefaulted = 2 };

constexpr int kNumClasses = 3;

// Months per quarter gap; quarterly data makes delta_t a multiple of 3.
constexpr double kMonthsPerQuarter = 3.0;

struct SeriesStep {
  long quarter_index = 0;
  // One value per feature; NaN means missing and not yet imputed.
  std::vector<double> values;
  // Originally observed in the source data (imputation does not flip this).
  std::vector<uint8_t> observed;
  // Months since the previous step; 0 for the first step.
  double delta_t = 0.0;
};

struct FirmSeries {
  std::string firm_id;
  std::vector<SeriesStep> steps;  // strictly increasing quarter_index
};

// Chapter feature vectors, both of width d_ch.
struct TextFeatures {
  std::vector<double> notice;
  std::vector<double> risk;
};

struct Sample {
  FirmSeries series;
  TextFeatures text;
  Label label = Label::kPerforming;
  bool synthetic = false;  // set only on SMOTE-generated records
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> feature_names;
  int d_ch = 0;

  size_t size() const { return samples.size(); }
  int num_features() const { return static_cast<int>(feature_names.size()); }
  std::vector<size_t> class_counts() const;
};

// Loads the three-file CSV layout:
//   series: firm_id,quarter_index,<feature_1>,...,<feature_F>  (empty = missing)
//   text:   firm_id,section,dim_0..dim_{D-1} with section in {notice,risk}
//   labels: firm_id,label with label in {0,1,2}
// Rows are grouped by firm and sorted by quarter_index; delta_t is derived as
// 3 months per quarter gap. Malformed input raises std::runtime_error with
// the file and line number.
Dataset load_dataset(const std::filesystem::path& series_path,
                     const std::filesystem::path& text_path,
                     const std::filesystem::path& labels_path);

// Inverse of load_dataset; writes canonical CSV (LF line endings, shortest
// round-trip float formatting, empty cell for NaN values).
void save_dataset(const Dataset& ds, const std::filesystem::path& series_path,
                  const std::filesystem::path& text_path,
                  const std::filesystem::path& labels_path);

// Convenience: <dir>/series.csv, <dir>/text.csv, <dir>/labels.csv.
Dataset load_dataset_dir(const std::filesystem::path& dir);
void save_dataset_dir(const Dataset& ds, const std::filesystem::path& dir);

// Canonical float formatting shared by all writers (shortest representation
// that round-trips to the same double).
std::string format_double(double x);

}  // namespace emdlot

#endif
