#ifndef EMDLOT_SYNTH_HPP
#define EMDLOT_SYNTH_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emdlot/dataset.hpp"

namespace emdlot {

// Configuration for the synthetic bond-issuer generator. Three planted
// regimes drive the labels:
//   Performing: stationary features throughout.
//   Extended:   the short-term-debt feature ramps up over the final 4 quarters.
//   Defaulted:  cash-flow features deteriorate over the final 4 quarters and
//               the risk-chapter text vector shifts along a fixed direction.
// Random quarter drop-out creates irregular delta_t gaps. With gap_signal
// set, regimes are disabled and the label is encoded purely in the gap
// pattern (same observed-step count per firm, different gap placement).
struct SynthConfig {
  int firms = 2000;
  int quarters = 12;
  int n_financial = 8;  // >= 4; indices 0..2 are cash-flow-like, 3 ramps
  int n_macro = 4;
  int d_ch = 40;
  std::array<double, 3> class_priors = {0.96, 0.025, 0.015};
  double quarter_dropout = 0.15;
  // Optional per-class drop-out probabilities; empty means use quarter_dropout.
  std::vector<double> class_quarter_dropout;
  // Peak size of the defaulted cash-flow deterioration ramp.
  double regime_amplitude = 3.0;
  // Peak size of the extended short-term-debt ramp.
  double extension_amplitude = 6.0;
  double text_shift = 6.0;
  // Scale of the Important Notice chapter vectors. Notice sections are
  // boilerplate: loud but uninformative, so they default to a wider spread
  // than the risk chapter.
  double notice_noise_sd = 3.5;
  double noise = 0.4;
  bool gap_signal = false;

  void validate() const;

  // Parses a JSON document; unknown keys are rejected, missing keys keep
  // their defaults.
  static SynthConfig from_json_text(const std::string& text);
  static SynthConfig from_json_file(const std::filesystem::path& path);
  std::string to_json_text() const;
};

Dataset synthesize(const SynthConfig& config, uint64_t seed);

}  // namespace emdlot

#endif
