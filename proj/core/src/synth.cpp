#include "emdlot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "emdlot/rng.hpp"

namespace emdlot {

namespace {

const char* kFinancialNames[] = {"cfo",      "cff", "cash_ratio",     "short_term_debt",
                                 "leverage", "roa", "revenue_growth", "interest_cover"};
const char* kMacroNames[] = {"macro_gdp_growth", "macro_cpi", "macro_m2_growth",
                             "macro_trade_balance"};

constexpr int kRampQuarters = 4;

}  // namespace

void SynthConfig::validate() const {
  if (firms < 1) throw std::invalid_argument("synth: firms must be positive");
  if (quarters < 2) throw std::invalid_argument("synth: quarters must be >= 2");
  if (n_financial < 4) throw std::invalid_argument("synth: n_financial must be >= 4");
  if (n_macro < 0) throw std::invalid_argument("synth: n_macro must be >= 0");
  if (d_ch < 1) throw std::invalid_argument("synth: d_ch must be positive");
  const double sum = class_priors[0] + class_priors[1] + class_priors[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("synth: class_priors must sum to 1");
  for (double p : class_priors)
    if (p < 0.0) throw std::invalid_argument("synth: negative class prior");
  if (!(quarter_dropout >= 0.0 && quarter_dropout < 1.0))
    throw std::invalid_argument("synth: quarter_dropout must be in [0,1)");
  if (!class_quarter_dropout.empty() && class_quarter_dropout.size() != 3)
    throw std::invalid_argument("synth: class_quarter_dropout needs 3 entries");
  for (double p : class_quarter_dropout)
    if (!(p >= 0.0 && p < 1.0))
      throw std::invalid_argument("synth: class_quarter_dropout entries in [0,1)");
}

SynthConfig SynthConfig::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SynthConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "firms") c.firms = it.value().get<int>();
    else if (key == "quarters") c.quarters = it.value().get<int>();
    else if (key == "n_financial") c.n_financial = it.value().get<int>();
    else if (key == "n_macro") c.n_macro = it.value().get<int>();
    else if (key == "d_ch") c.d_ch = it.value().get<int>();
    else if (key == "class_priors") {
      auto v = it.value().get<std::vector<double>>();
      if (v.size() != 3) throw std::invalid_argument("synth: class_priors needs 3 entries");
      std::copy(v.begin(), v.end(), c.class_priors.begin());
    } else if (key == "quarter_dropout") c.quarter_dropout = it.value().get<double>();
    else if (key == "class_quarter_dropout")
      c.class_quarter_dropout = it.value().get<std::vector<double>>();
    else if (key == "regime_amplitude") c.regime_amplitude = it.value().get<double>();
    else if (key == "extension_amplitude") c.extension_amplitude = it.value().get<double>();
    else if (key == "text_shift") c.text_shift = it.value().get<double>();
    else if (key == "notice_noise_sd") c.notice_noise_sd = it.value().get<double>();
    else if (key == "noise") c.noise = it.value().get<double>();
    else if (key == "gap_signal") c.gap_signal = it.value().get<bool>();
    else throw std::invalid_argument("synth config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

SynthConfig SynthConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string SynthConfig::to_json_text() const {
  nlohmann::json j;
  j["firms"] = firms;
  j["quarters"] = quarters;
  j["n_financial"] = n_financial;
  j["n_macro"] = n_macro;
  j["d_ch"] = d_ch;
  j["class_priors"] = class_priors;
  j["quarter_dropout"] = quarter_dropout;
  j["class_quarter_dropout"] = class_quarter_dropout;
  j["regime_amplitude"] = regime_amplitude;
  j["extension_amplitude"] = extension_amplitude;
  j["text_shift"] = text_shift;
  j["notice_noise_sd"] = notice_noise_sd;
  j["noise"] = noise;
  j["gap_signal"] = gap_signal;
  return j.dump(2);
}

Dataset synthesize(const SynthConfig& config, uint64_t seed) {
  config.validate();
  SeededRng rng(seed);

  Dataset ds;
  ds.d_ch = config.d_ch;
  for (int f = 0; f < config.n_financial; ++f)
    ds.feature_names.push_back(f < 8 ? kFinancialNames[f] : "fin_" + std::to_string(f));
  for (int m = 0; m < config.n_macro; ++m)
    ds.feature_names.push_back(m < 4 ? kMacroNames[m] : "macro_" + std::to_string(m));

  // Macro indicators are economy-wide: one smooth series per indicator,
  // shared by every firm.
  std::vector<std::vector<double>> macro(config.n_macro,
                                         std::vector<double>(config.quarters));
  for (int m = 0; m < config.n_macro; ++m) {
    const double period = rng.uniform(8.0, 16.0);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    for (int q = 0; q < config.quarters; ++q)
      macro[m][q] = std::sin(2.0 * M_PI * q / period + phase);
  }

  // Fixed unit direction for the defaulted risk-text shift.
  const int shift_dims = std::min(config.d_ch, 8);
  const double shift_coord = 1.0 / std::sqrt(static_cast<double>(shift_dims));

  const int q_total = config.quarters;
  for (int firm = 0; firm < config.firms; ++firm) {
    Sample s;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "F%05d", firm);
    s.series.firm_id = buf;

    const double u = rng.uniform();
    int cls = u < config.class_priors[0] ? 0
              : (u < config.class_priors[0] + config.class_priors[1] ? 1 : 2);
    s.label = static_cast<Label>(cls);

    // Which quarters the firm reports.
    std::vector<uint8_t> keep(q_total, 0);
    keep[0] = keep[q_total - 1] = 1;
    if (config.gap_signal) {
      const int target = std::max(2, q_total / 2);
      if (cls == 0) {
        std::vector<int> middle(q_total - 2);
        std::iota(middle.begin(), middle.end(), 1);
        rng.shuffle(middle);
        for (int i = 0; i < target - 2 && i < static_cast<int>(middle.size()); ++i)
          keep[middle[i]] = 1;
      } else if (cls == 1) {
        // Regular six-month cadence.
        int added = 0;
        for (int q = 2; q < q_total - 1 && added < target - 2; q += 2, ++added) keep[q] = 1;
      } else {
        // Silent stretch before the final quarter.
        for (int q = 1; q < target - 1; ++q) keep[q] = 1;
      }
    } else {
      const double p = config.class_quarter_dropout.empty()
                           ? config.quarter_dropout
                           : config.class_quarter_dropout[cls];
      // Drop-out spares the final ramp window: the regime signal must survive
      // the pre-default exclusion of the last reported quarters.
      const int last_droppable = q_total - 1 - kRampQuarters;
      for (int q = 1; q <= last_droppable; ++q) keep[q] = rng.uniform() >= p;
      for (int q = std::max(1, last_droppable + 1); q < q_total - 1; ++q) keep[q] = 1;
    }

    std::vector<double> base(config.n_financial);
    for (auto& b : base) b = rng.normal();
    // Cash-flow deterioration intensity varies by firm and feature.
    std::vector<double> severity(3, 0.0);
    if (cls == 2 && !config.gap_signal)
      for (auto& w : severity) w = rng.uniform(0.8, 1.3);

    for (int q = 0; q < q_total; ++q) {
      if (!keep[q]) continue;
      SeriesStep step;
      step.quarter_index = q + 1;
      const int nf = config.n_financial + config.n_macro;
      step.values.resize(nf);
      step.observed.assign(nf, 1);
      // Ramp fraction over the final 4 quarters: 0 before, up to 1 at the end.
      const int from_end = q_total - 1 - q;
      const double ramp = from_end < kRampQuarters
                              ? static_cast<double>(kRampQuarters - from_end) / kRampQuarters
                              : 0.0;
      for (int f = 0; f < config.n_financial; ++f) {
        double v = base[f] + config.noise * rng.normal();
        if (!config.gap_signal && ramp > 0.0) {
          if (cls == 1 && f == 3) v += config.extension_amplitude * ramp;
          if (cls == 2 && f < 3) v -= config.regime_amplitude * ramp * severity[f];
        }
        step.values[f] = v;
      }
      for (int m = 0; m < config.n_macro; ++m)
        step.values[config.n_financial + m] = macro[m][q];
      s.series.steps.push_back(std::move(step));
    }
    for (size_t i = 0; i < s.series.steps.size(); ++i) {
      s.series.steps[i].delta_t =
          i == 0 ? 0.0
                 : kMonthsPerQuarter * static_cast<double>(s.series.steps[i].quarter_index -
                                                           s.series.steps[i - 1].quarter_index);
    }

    s.text.notice.resize(config.d_ch);
    s.text.risk.resize(config.d_ch);
    for (auto& v : s.text.notice) v = config.notice_noise_sd * rng.normal();
    for (auto& v : s.text.risk) v = rng.normal();
    if (cls == 2 && !config.gap_signal) {
      for (int d = 0; d < shift_dims; ++d)
        s.text.risk[d] += config.text_shift * shift_coord;
    }

    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace emdlot
