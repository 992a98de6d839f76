#include "emdlot/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace emdlot {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& file, size_t line,
                             const std::string& what) {
  throw std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

double parse_double(const std::string& s, const std::filesystem::path& file, size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    parse_fail(file, line, "bad numeric value '" + s + "'");
  return v;
}

long parse_long(const std::string& s, const std::filesystem::path& file, size_t line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    parse_fail(file, line, "bad integer value '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::vector<size_t> Dataset::class_counts() const {
  std::vector<size_t> counts(kNumClasses, 0);
  for (const auto& s : samples) counts[static_cast<int>(s.label)]++;
  return counts;
}

Dataset load_dataset(const std::filesystem::path& series_path,
                     const std::filesystem::path& text_path,
                     const std::filesystem::path& labels_path) {
  Dataset ds;

  // --- series ---
  auto series_lines = read_lines(series_path);
  std::vector<std::string> order;                      // firms by first appearance
  std::map<std::string, FirmSeries> series_by_firm;
  std::set<std::pair<std::string, long>> seen_quarters;
  if (!series_lines.empty()) {
    auto header = split_csv(series_lines[0]);
    if (header.size() < 2 || header[0] != "firm_id" || header[1] != "quarter_index")
      parse_fail(series_path, 1, "expected header firm_id,quarter_index,<features>");
    ds.feature_names.assign(header.begin() + 2, header.end());
    const size_t nf = ds.feature_names.size();
    for (size_t li = 1; li < series_lines.size(); ++li) {
      if (series_lines[li].empty()) continue;
      auto cells = split_csv(series_lines[li]);
      if (cells.size() != nf + 2)
        parse_fail(series_path, li + 1,
                   "expected " + std::to_string(nf + 2) + " cells, got " +
                       std::to_string(cells.size()));
      SeriesStep step;
      const std::string& firm = cells[0];
      step.quarter_index = parse_long(cells[1], series_path, li + 1);
      if (!seen_quarters.insert({firm, step.quarter_index}).second)
        parse_fail(series_path, li + 1,
                   "duplicate (firm, quarter): " + firm + ", " +
                       std::to_string(step.quarter_index));
      step.values.resize(nf);
      step.observed.resize(nf);
      for (size_t f = 0; f < nf; ++f) {
        if (cells[f + 2].empty()) {
          step.values[f] = std::nan("");
          step.observed[f] = 0;
        } else {
          step.values[f] = parse_double(cells[f + 2], series_path, li + 1);
          step.observed[f] = 1;
        }
      }
      auto it = series_by_firm.find(firm);
      if (it == series_by_firm.end()) {
        order.push_back(firm);
        it = series_by_firm.emplace(firm, FirmSeries{firm, {}}).first;
      }
      it->second.steps.push_back(std::move(step));
    }
  }
  for (auto& [firm, fs] : series_by_firm) {
    std::sort(fs.steps.begin(), fs.steps.end(),
              [](const SeriesStep& a, const SeriesStep& b) {
                return a.quarter_index < b.quarter_index;
              });
    for (size_t i = 0; i < fs.steps.size(); ++i) {
      fs.steps[i].delta_t =
          i == 0 ? 0.0
                 : kMonthsPerQuarter * static_cast<double>(fs.steps[i].quarter_index -
                                                           fs.steps[i - 1].quarter_index);
    }
  }

  // --- text ---
  auto text_lines = read_lines(text_path);
  std::map<std::string, TextFeatures> text_by_firm;
  std::set<std::pair<std::string, std::string>> seen_sections;
  if (!text_lines.empty()) {
    auto header = split_csv(text_lines[0]);
    if (header.size() < 2 || header[0] != "firm_id" || header[1] != "section")
      parse_fail(text_path, 1, "expected header firm_id,section,dim_0..");
    ds.d_ch = static_cast<int>(header.size()) - 2;
    for (size_t li = 1; li < text_lines.size(); ++li) {
      if (text_lines[li].empty()) continue;
      auto cells = split_csv(text_lines[li]);
      if (cells.size() != static_cast<size_t>(ds.d_ch) + 2)
        parse_fail(text_path, li + 1, "ragged text row");
      const std::string& firm = cells[0];
      const std::string& section = cells[1];
      if (section != "notice" && section != "risk")
        parse_fail(text_path, li + 1, "unknown section '" + section + "'");
      if (!seen_sections.insert({firm, section}).second)
        parse_fail(text_path, li + 1, "duplicate section for firm " + firm);
      std::vector<double> vec(ds.d_ch);
      for (int d = 0; d < ds.d_ch; ++d)
        vec[d] = parse_double(cells[d + 2], text_path, li + 1);
      auto& tf = text_by_firm[firm];
      (section == "notice" ? tf.notice : tf.risk) = std::move(vec);
    }
  }

  // --- labels ---
  auto label_lines = read_lines(labels_path);
  std::map<std::string, Label> label_by_firm;
  if (!label_lines.empty()) {
    auto header = split_csv(label_lines[0]);
    if (header.size() != 2 || header[0] != "firm_id" || header[1] != "label")
      parse_fail(labels_path, 1, "expected header firm_id,label");
    for (size_t li = 1; li < label_lines.size(); ++li) {
      if (label_lines[li].empty()) continue;
      auto cells = split_csv(label_lines[li]);
      if (cells.size() != 2) parse_fail(labels_path, li + 1, "expected 2 cells");
      if (!series_by_firm.count(cells[0]))
        parse_fail(labels_path, li + 1, "unknown firm in labels: " + cells[0]);
      long code = parse_long(cells[1], labels_path, li + 1);
      if (code < 0 || code > 2)
        parse_fail(labels_path, li + 1, "label must be 0, 1 or 2");
      label_by_firm[cells[0]] = static_cast<Label>(code);
    }
  }

  // --- assemble, one sample per firm ---
  for (const auto& firm : order) {
    Sample s;
    s.series = series_by_firm.at(firm);
    auto ti = text_by_firm.find(firm);
    if (ti == text_by_firm.end())
      throw std::runtime_error(text_path.string() + ": no text rows for firm " + firm);
    if (ti->second.notice.empty() || ti->second.risk.empty())
      throw std::runtime_error(text_path.string() + ": firm " + firm +
                               " must have both notice and risk rows");
    s.text = ti->second;
    auto lb = label_by_firm.find(firm);
    if (lb == label_by_firm.end())
      throw std::runtime_error(labels_path.string() + ": no label for firm " + firm);
    s.label = lb->second;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& series_path,
                  const std::filesystem::path& text_path,
                  const std::filesystem::path& labels_path) {
  std::ofstream series(series_path, std::ios::binary);
  if (!series) throw std::runtime_error("cannot write " + series_path.string());
  series << "firm_id,quarter_index";
  for (const auto& f : ds.feature_names) series << "," << f;
  series << "\n";
  for (const auto& s : ds.samples) {
    for (const auto& step : s.series.steps) {
      series << s.series.firm_id << "," << step.quarter_index;
      for (double v : step.values) {
        series << ",";
        if (!std::isnan(v)) series << format_double(v);
      }
      series << "\n";
    }
  }

  std::ofstream text(text_path, std::ios::binary);
  if (!text) throw std::runtime_error("cannot write " + text_path.string());
  text << "firm_id,section";
  for (int d = 0; d < ds.d_ch; ++d) text << ",dim_" << d;
  text << "\n";
  for (const auto& s : ds.samples) {
    text << s.series.firm_id << ",notice";
    for (double v : s.text.notice) text << "," << format_double(v);
    text << "\n";
    text << s.series.firm_id << ",risk";
    for (double v : s.text.risk) text << "," << format_double(v);
    text << "\n";
  }

  std::ofstream labels(labels_path, std::ios::binary);
  if (!labels) throw std::runtime_error("cannot write " + labels_path.string());
  labels << "firm_id,label\n";
  for (const auto& s : ds.samples)
    labels << s.series.firm_id << "," << static_cast<int>(s.label) << "\n";
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  return load_dataset(dir / "series.csv", dir / "text.csv", dir / "labels.csv");
}

void save_dataset_dir(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_dataset(ds, dir / "series.csv", dir / "text.csv", dir / "labels.csv");
}

}  // namespace emdlot
