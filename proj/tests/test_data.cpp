#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "emdlot/dataset.hpp"
#include "emdlot/preprocess.hpp"
#include "emdlot/rng.hpp"
#include "emdlot/synth.hpp"

using namespace emdlot;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("emdlot_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// One-feature sample with the given number of single-quarter steps.
Sample tiny_sample(const std::string& id, Label label, int steps, double value = 1.0) {
  Sample s;
  s.series.firm_id = id;
  for (int q = 0; q < steps; ++q) {
    SeriesStep st;
    st.quarter_index = q + 1;
    st.values = {value};
    st.observed = {1};
    st.delta_t = q == 0 ? 0.0 : 3.0;
    s.series.steps.push_back(st);
  }
  s.text.notice = {0.0};
  s.text.risk = {0.0};
  s.label = label;
  return s;
}

Dataset tiny_dataset(const std::vector<std::pair<Label, int>>& specs) {
  Dataset ds;
  ds.feature_names = {"f0"};
  ds.d_ch = 1;
  int i = 0;
  for (auto [label, steps] : specs)
    ds.samples.push_back(tiny_sample("T" + std::to_string(i++), label, steps));
  return ds;
}

}  // namespace

TEST_CASE("load_dataset: quarter gaps become months") {
  auto dir = temp_dir("load");
  write_file(dir / "series.csv",
             "firm_id,quarter_index,roa,leverage\n"
             "A,1,0.5,1\n"
             "A,2,0.6,2\n"
             "A,4,0.7,3\n"
             "B,3,1.5,\n");
  write_file(dir / "text.csv",
             "firm_id,section,dim_0,dim_1\n"
             "A,notice,0.1,0.2\nA,risk,0.3,0.4\n"
             "B,notice,1,2\nB,risk,3,4\n");
  write_file(dir / "labels.csv", "firm_id,label\nA,0\nB,2\n");

  auto ds = load_dataset_dir(dir);
  REQUIRE(ds.size() == 2);
  CHECK(ds.feature_names == std::vector<std::string>{"roa", "leverage"});
  CHECK(ds.d_ch == 2);

  const auto& a = ds.samples[0];
  CHECK(a.series.firm_id == "A");
  REQUIRE(a.series.steps.size() == 3);
  CHECK(a.series.steps[0].delta_t == 0.0);
  CHECK(a.series.steps[1].delta_t == 3.0);
  CHECK(a.series.steps[2].delta_t == 6.0);
  CHECK(a.label == Label::kPerforming);

  const auto& b = ds.samples[1];
  CHECK(b.label == Label::kDefaulted);
  CHECK(b.series.steps[0].observed[0] == 1);
  CHECK(b.series.steps[0].observed[1] == 0);
  CHECK(std::isnan(b.series.steps[0].values[1]));
}

TEST_CASE("load_dataset: header-only files give an empty dataset") {
  auto dir = temp_dir("empty");
  write_file(dir / "series.csv", "firm_id,quarter_index,roa\n");
  write_file(dir / "text.csv", "firm_id,section,dim_0\n");
  write_file(dir / "labels.csv", "firm_id,label\n");
  auto ds = load_dataset_dir(dir);
  CHECK(ds.size() == 0);
  CHECK(ds.feature_names == std::vector<std::string>{"roa"});
}

TEST_CASE("load_dataset: malformed input names file and line") {
  auto dir = temp_dir("bad");
  write_file(dir / "text.csv",
             "firm_id,section,dim_0\nA,notice,1\nA,risk,1\n");
  write_file(dir / "labels.csv", "firm_id,label\nA,0\n");

  SUBCASE("ragged feature row") {
    write_file(dir / "series.csv", "firm_id,quarter_index,roa\nA,1,1\nA,2,1,9\n");
    try {
      load_dataset_dir(dir);
      FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("series.csv:3") != std::string::npos);
    }
  }
  SUBCASE("duplicate firm-quarter") {
    write_file(dir / "series.csv", "firm_id,quarter_index,roa\nA,1,1\nA,1,2\n");
    try {
      load_dataset_dir(dir);
      FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("duplicate") != std::string::npos);
      CHECK(msg.find(":3") != std::string::npos);
    }
  }
  SUBCASE("unknown firm in labels") {
    write_file(dir / "series.csv", "firm_id,quarter_index,roa\nA,1,1\n");
    write_file(dir / "labels.csv", "firm_id,label\nA,0\nZ,1\n");
    try {
      load_dataset_dir(dir);
      FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("unknown firm") != std::string::npos);
      CHECK(msg.find("Z") != std::string::npos);
    }
  }
}

TEST_CASE("save/load round trip is byte identical on canonical files") {
  SynthConfig cfg;
  cfg.firms = 25;
  cfg.quarters = 6;
  cfg.d_ch = 3;
  auto ds = synthesize(cfg, 99);
  auto dir1 = temp_dir("rt1");
  auto dir2 = temp_dir("rt2");
  save_dataset_dir(ds, dir1);
  auto loaded = load_dataset_dir(dir1);
  save_dataset_dir(loaded, dir2);
  for (const char* f : {"series.csv", "text.csv", "labels.csv"})
    CHECK(read_file(dir1 / f) == read_file(dir2 / f));
}

TEST_CASE("exclude_pre_default") {
  auto ds = tiny_dataset({{Label::kDefaulted, 8},
                          {Label::kPerforming, 8},
                          {Label::kExtended, 2},
                          {Label::kExtended, 5}});
  SUBCASE("default two quarters") {
    auto res = exclude_pre_default(ds, 2);
    REQUIRE(res.dataset.size() == 3);
    CHECK(res.dataset.samples[0].series.steps.size() == 6);  // defaulted 8 -> 6
    CHECK(res.dataset.samples[1].series.steps.size() == 8);  // performing untouched
    CHECK(res.dataset.samples[2].series.steps.size() == 3);  // extended 5 -> 3
    CHECK(res.dropped_samples == 1);                         // extended with 2 steps
    CHECK(res.removed_steps == 2 + 2 + 2);
  }
  SUBCASE("n=0 leaves everything") {
    auto res = exclude_pre_default(ds, 0);
    CHECK(res.dataset.size() == 4);
    CHECK(res.removed_steps == 0);
    CHECK(res.dropped_samples == 0);
  }
}

TEST_CASE("split: stratified counts and determinism") {
  SUBCASE("1565/19/11 at 0.8") {
    std::vector<std::pair<Label, int>> specs;
    for (int i = 0; i < 1565; ++i) specs.push_back({Label::kPerforming, 1});
    for (int i = 0; i < 19; ++i) specs.push_back({Label::kExtended, 1});
    for (int i = 0; i < 11; ++i) specs.push_back({Label::kDefaulted, 1});
    auto ds = tiny_dataset(specs);
    auto res = split(ds, 0.8, 1);
    auto train_counts = res.train.class_counts();
    auto test_counts = res.test.class_counts();
    CHECK(train_counts[0] == 1252);
    CHECK(train_counts[1] == 15);
    CHECK(train_counts[2] == 9);
    CHECK(test_counts[0] == 313);
    CHECK(test_counts[1] == 4);
    CHECK(test_counts[2] == 2);
  }
  SUBCASE("10 single-class samples -> 8/2") {
    std::vector<std::pair<Label, int>> specs(10, {Label::kPerforming, 1});
    auto res = split(tiny_dataset(specs), 0.8, 5);
    CHECK(res.train.size() == 8);
    CHECK(res.test.size() == 2);
  }
  SUBCASE("deterministic and exact partition") {
    std::vector<std::pair<Label, int>> specs;
    for (int i = 0; i < 40; ++i)
      specs.push_back({static_cast<Label>(i % 3), 1});
    auto ds = tiny_dataset(specs);
    auto r1 = split(ds, 0.8, 7);
    auto r2 = split(ds, 0.8, 7);
    auto ids = [](const Dataset& d) {
      std::set<std::string> s;
      for (const auto& x : d.samples) s.insert(x.series.firm_id);
      return s;
    };
    CHECK(ids(r1.train) == ids(r2.train));
    CHECK(ids(r1.test) == ids(r2.test));
    auto train_ids = ids(r1.train);
    auto test_ids = ids(r1.test);
    CHECK(train_ids.size() + test_ids.size() == ds.size());
    for (const auto& id : test_ids) CHECK(train_ids.count(id) == 0);
  }
  SUBCASE("singleton class goes to train with warning") {
    auto ds = tiny_dataset({{Label::kPerforming, 1},
                            {Label::kPerforming, 1},
                            {Label::kPerforming, 1},
                            {Label::kDefaulted, 1}});
    auto res = split(ds, 0.8, 3);
    CHECK(res.train.class_counts()[2] == 1);
    CHECK(res.test.class_counts()[2] == 0);
    CHECK_FALSE(res.warnings.empty());
  }
}

TEST_CASE("impute") {
  SUBCASE("no missing entries -> unchanged") {
    auto ds = tiny_dataset({{Label::kPerforming, 4}, {Label::kExtended, 3}});
    auto res = impute(ds, 9);
    CHECK(res.warnings.empty());
    for (size_t i = 0; i < ds.size(); ++i)
      for (size_t t = 0; t < ds.samples[i].series.steps.size(); ++t)
        CHECK(res.dataset.samples[i].series.steps[t].values[0] ==
              ds.samples[i].series.steps[t].values[0]);
  }
  SUBCASE("zero-variance feature fills with the exact mean") {
    auto ds = tiny_dataset({{Label::kPerforming, 3}});
    for (auto& st : ds.samples[0].series.steps) st.values[0] = 5.0;
    ds.samples[0].series.steps[1].values[0] = std::nan("");
    ds.samples[0].series.steps[1].observed[0] = 0;
    auto res = impute(ds, 1);
    CHECK(res.dataset.samples[0].series.steps[1].values[0] == 5.0);
    // Mask is retained.
    CHECK(res.dataset.samples[0].series.steps[1].observed[0] == 0);
  }
  SUBCASE("fills stay near the mean and reproduce under seed") {
    auto ds = tiny_dataset({{Label::kPerforming, 6}});
    double vals[6] = {1.0, 3.0, 5.0, 7.0, 9.0, 11.0};
    for (int t = 0; t < 6; ++t) ds.samples[0].series.steps[t].values[0] = vals[t];
    for (int t : {1, 3, 4}) {
      ds.samples[0].series.steps[t].values[0] = std::nan("");
      ds.samples[0].series.steps[t].observed[0] = 0;
    }
    // Observed: 1, 5, 11 -> mean 17/3, sd of {1,5,11}.
    const double mean = 17.0 / 3.0;
    double var = ((1 - mean) * (1 - mean) + (5 - mean) * (5 - mean) +
                  (11 - mean) * (11 - mean)) / 3.0;
    const double sd = std::sqrt(var);
    auto r1 = impute(ds, 21);
    auto r2 = impute(ds, 21);
    for (int t : {1, 3, 4}) {
      const double v = r1.dataset.samples[0].series.steps[t].values[0];
      CHECK(std::abs(v - mean) <= 0.5 * sd);
      CHECK(v == r2.dataset.samples[0].series.steps[t].values[0]);
    }
  }
  SUBCASE("never-observed feature fills 0 with warning") {
    auto ds = tiny_dataset({{Label::kPerforming, 2}});
    for (auto& st : ds.samples[0].series.steps) {
      st.values[0] = std::nan("");
      st.observed[0] = 0;
    }
    auto res = impute(ds, 2);
    CHECK(res.warnings.size() == 1);
    for (auto& st : res.dataset.samples[0].series.steps) CHECK(st.values[0] == 0.0);
  }
}

TEST_CASE("smote") {
  SUBCASE("balances to the majority count with convex synthetics") {
    SynthConfig cfg;
    cfg.firms = 60;
    cfg.quarters = 5;
    cfg.d_ch = 2;
    cfg.class_priors = {0.7, 0.2, 0.1};
    cfg.quarter_dropout = 0.0;  // equal lengths so flattening commutes
    auto ds = synthesize(cfg, 4);
    auto counts = ds.class_counts();
    REQUIRE(counts[1] >= 2);
    REQUIRE(counts[2] >= 2);
    auto res = smote(ds, 5, 8);
    auto after = res.dataset.class_counts();
    const size_t majority = *std::max_element(counts.begin(), counts.end());
    CHECK(after[0] == majority);
    CHECK(after[1] == majority);
    CHECK(after[2] == majority);

    const int nf = ds.num_features();
    for (size_t i = 0; i < res.synthetics.size(); ++i) {
      const auto& rec = res.synthetics[i];
      const auto& synth = res.dataset.samples[ds.size() + i];
      CHECK(synth.synthetic);
      CHECK(static_cast<int>(synth.label) == rec.cls);
      auto flat_s = flatten_sample(synth, nf);
      auto flat_a = flatten_sample(ds.samples[rec.base_index], nf);
      auto flat_b = flatten_sample(ds.samples[rec.neighbor_index], nf);
      for (size_t d = 0; d < flat_s.size(); ++d) {
        const double expect = (1.0 - rec.t) * flat_a[d] + rec.t * flat_b[d];
        CHECK(std::abs(flat_s[d] - expect) <= 1e-9);
      }
    }
  }
  SUBCASE("already balanced input returned unchanged") {
    auto ds = tiny_dataset({{Label::kPerforming, 2},
                            {Label::kExtended, 2},
                            {Label::kDefaulted, 2}});
    auto res = smote(ds, 5, 3);
    CHECK(res.dataset.size() == ds.size());
    CHECK(res.synthetics.empty());
  }
  SUBCASE("two-sample minority interpolates strictly inside") {
    Dataset ds;
    ds.feature_names = {"f0"};
    ds.d_ch = 1;
    for (int i = 0; i < 4; ++i)
      ds.samples.push_back(tiny_sample("P" + std::to_string(i), Label::kPerforming, 1,
                                       static_cast<double>(i)));
    ds.samples.push_back(tiny_sample("E0", Label::kExtended, 1, 0.0));
    ds.samples.push_back(tiny_sample("E1", Label::kExtended, 1, 1.0));
    auto res = smote(ds, 5, 12);
    for (size_t i = 0; i < res.synthetics.size(); ++i) {
      const auto& synth = res.dataset.samples[ds.size() + i];
      if (synth.label != Label::kExtended) continue;
      const double v = synth.series.steps[0].values[0];
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
  SUBCASE("minority of size 1 duplicates with noise and warns") {
    auto ds = tiny_dataset({{Label::kPerforming, 1},
                            {Label::kPerforming, 1},
                            {Label::kPerforming, 1},
                            {Label::kDefaulted, 1}});
    auto res = smote(ds, 5, 2);
    CHECK_FALSE(res.warnings.empty());
    CHECK(res.dataset.class_counts()[2] == 3);
  }
}

TEST_CASE("synthesize") {
  SUBCASE("no drop-out means quarterly cadence") {
    SynthConfig cfg;
    cfg.firms = 20;
    cfg.quarters = 8;
    cfg.d_ch = 2;
    cfg.quarter_dropout = 0.0;
    auto ds = synthesize(cfg, 3);
    for (const auto& s : ds.samples) {
      CHECK(s.series.steps.size() == 8);
      CHECK(s.series.steps[0].delta_t == 0.0);
      for (size_t t = 1; t < s.series.steps.size(); ++t)
        CHECK(s.series.steps[t].delta_t == 3.0);
    }
  }
  SUBCASE("degenerate priors give one class") {
    SynthConfig cfg;
    cfg.firms = 50;
    cfg.quarters = 4;
    cfg.d_ch = 2;
    cfg.class_priors = {1.0, 0.0, 0.0};
    auto ds = synthesize(cfg, 5);
    for (const auto& s : ds.samples) CHECK(s.label == Label::kPerforming);
  }
  SUBCASE("priors must sum to one") {
    SynthConfig cfg;
    cfg.class_priors = {0.9, 0.2, 0.1};
    CHECK_THROWS_AS(synthesize(cfg, 1), std::invalid_argument);
  }
  SUBCASE("default config class counts within 3 sigma of the multinomial") {
    SynthConfig cfg;  // 2000 firms, priors 0.96/0.025/0.015
    auto ds = synthesize(cfg, 2024);
    auto counts = ds.class_counts();
    const double n = static_cast<double>(cfg.firms);
    const double priors[3] = {cfg.class_priors[0], cfg.class_priors[1],
                              cfg.class_priors[2]};
    for (int c = 0; c < 3; ++c) {
      const double expect = n * priors[c];
      const double sigma = std::sqrt(n * priors[c] * (1.0 - priors[c]));
      CHECK(std::abs(static_cast<double>(counts[c]) - expect) <= 3.0 * sigma);
    }
  }
  SUBCASE("unknown json keys rejected") {
    CHECK_THROWS_AS(SynthConfig::from_json_text("{\"firms\": 10, \"bogus\": 1}"),
                    std::invalid_argument);
    auto cfg = SynthConfig::from_json_text("{\"firms\": 10}");
    CHECK(cfg.firms == 10);
    CHECK(cfg.quarters == 12);
  }
  SUBCASE("deterministic under seed") {
    SynthConfig cfg;
    cfg.firms = 30;
    auto a = synthesize(cfg, 77);
    auto b = synthesize(cfg, 77);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a.samples[i].label == b.samples[i].label);
      REQUIRE(a.samples[i].series.steps.size() == b.samples[i].series.steps.size());
      for (size_t t = 0; t < a.samples[i].series.steps.size(); ++t)
        CHECK(a.samples[i].series.steps[t].values ==
              b.samples[i].series.steps[t].values);
    }
  }
}
