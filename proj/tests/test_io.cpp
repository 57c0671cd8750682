#include <gtest/gtest.h>

#include <algorithm>
#include <clocale>
#include <filesystem>

#include "fixtures.hpp"
#include "mtri/experiment.hpp"
#include "mtri/io.hpp"
#include "mtri/synthetic.hpp"

using namespace mtri;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mtri_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Io, ConfigRoundTrip) {
  auto c = mtri::testing::certify_base();
  c.sources[1].tasks[0].initial_aoi = 4;
  c.sources[2].tasks[0].penalty = TabulatedPenalty{{0.1, 0.2}};
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(back.sources[1].tasks[0].initial_aoi, 4);
}

TEST(Io, LoadsShippedInstances) {
  const fs::path dir = MTRI_CONFIG_DIR;
  const auto fig4 = load_instance(dir / "fig4_base.json");
  EXPECT_EQ(fig4.config.num_tasks(), 60u);
  EXPECT_EQ(config_to_json(fig4.config), config_to_json(synthetic_instance()));
  const auto tab = load_instance(dir / "tabulated_example.json");
  const auto& pen = std::get<TabulatedPenalty>(tab.config.sources[0].tasks[0].penalty);
  EXPECT_EQ(pen.values.size(), 20u);
}

TEST(Io, MgfBlock) {
  nlohmann::json j = config_to_json(mtri::testing::certify_base());
  j["mgf"] = {{"iterations", 7}, {"reoptimize_every", 3}, {"step_source", 0.5}, {"step_channel", 2.0}};
  const auto p = mgf_settings_from_json(j);
  EXPECT_EQ(p.dual.iterations, 7);
  EXPECT_EQ(p.reoptimize_every, 3);
  EXPECT_EQ(p.dual.base_step_source, (std::vector<double>{0.5, 0.5, 0.5}));
  EXPECT_EQ(p.dual.base_step_channel, 2.0);
}

TEST(Io, InvalidInstanceListsViolations) {
  const auto dir = scratch("invalid");
  nlohmann::json j = config_to_json(mtri::testing::certify_base());
  j["discount"] = 1.0;
  j["sources"][0]["compute_budget"] = -1;
  j["mgf"] = {{"iterations", 0}};
  write_file(dir / "bad.json", j.dump());
  try {
    load_instance(dir / "bad.json");
    FAIL();
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.violations().size(), 3u);
    EXPECT_NE(e.violations()[0].find("discount must lie in (0,1)"), std::string::npos);
  }
}

TEST(Io, ErrorKinds) {
  const auto dir = scratch("errors");
  EXPECT_THROW(load_instance(dir / "missing.json"), IoError);
  write_file(dir / "broken.json", "{\"num_sources\": ");
  EXPECT_THROW(load_instance(dir / "broken.json"), ConfigError);
  nlohmann::json j = config_to_json(mtri::testing::certify_base());
  j["sources"][0]["tasks"][0]["penalty"] = {{"type", "tabulated"}, {"csv", "nope.csv"}};
  write_file(dir / "tab.json", j.dump());
  try {
    load_instance(dir / "tab.json");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.csv"), std::string::npos);
  }
  j["sources"][0]["tasks"][0]["penalty"] = {{"type", "quadratic"}};
  write_file(dir / "type.json", j.dump());
  EXPECT_THROW(load_instance(dir / "type.json"), ConfigError);
}

TEST(Io, PenaltyCsv) {
  const auto dir = scratch("csv");
  write_file(dir / "ok.csv", "aoi,error\r\n1,0.5\r\n2,0.75\r\n");
  EXPECT_EQ(load_penalty_csv(dir / "ok.csv").values, (std::vector<double>{0.5, 0.75}));
  write_file(dir / "gap.csv", "aoi,error\n1,0.5\n3,0.75\n");
  EXPECT_THROW(load_penalty_csv(dir / "gap.csv"), ConfigError);
  write_file(dir / "header.csv", "age,err\n1,0.5\n");
  EXPECT_THROW(load_penalty_csv(dir / "header.csv"), ConfigError);
  write_file(dir / "junk.csv", "aoi,error\n1,abc\n");
  EXPECT_THROW(load_penalty_csv(dir / "junk.csv"), ConfigError);
}

TEST(Io, NumbersIgnoreLocale) {
  const char* prev = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = prev ? prev : "C";
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  EXPECT_EQ(format_double(1234.5), "1234.5");
  EXPECT_EQ(format_double(0.1), "0.1");
  std::setlocale(LC_NUMERIC, saved.c_str());
  CsvWriter w({"a", "b"});
  w.add_row({"1", format_double(2.25)});
  EXPECT_EQ(w.str(), "a,b\n1,2.25\n");
}

TEST(Experiment, SpecValidation) {
  const auto dir = scratch("spec");
  write_file(dir / "empty.json", R"({"base_config": "x.json", "sweep": {"channels": []}, "policies": ["maf"]})");
  try {
    load_experiment_spec(dir / "empty.json");
    FAIL();
  } catch (const ConfigError& e) {
    ASSERT_FALSE(e.violations().empty());
    EXPECT_NE(e.violations()[0].find("nonempty"), std::string::npos);
  }
  write_file(dir / "seeds.json", R"({"base_config": "x.json", "sweep": {"channels": [1]}, "policies": ["random"]})");
  EXPECT_THROW(load_experiment_spec(dir / "seeds.json"), ConfigError);
  write_file(dir / "var.json", R"({"base_config": "x.json", "sweep": {"widths": [1]}})");
  EXPECT_THROW(load_experiment_spec(dir / "var.json"), ConfigError);
  write_file(dir / "ok.json", R"({"base_config": "x.json", "sweep": {"sources": [2, 4]}, "policies": ["mgf"],
                                  "output_dir": "out"})");
  const auto spec = load_experiment_spec(dir / "ok.json");
  EXPECT_EQ(spec.variable, SweepVariable::kSources);
  EXPECT_EQ(spec.base_config_path, dir / "x.json");
  EXPECT_EQ(spec.output_dir, dir / "out");
}

TEST(Experiment, SweepPoints) {
  const auto base = mtri::testing::certify_base();
  auto p = sweep_point(base, SweepVariable::kTasksPerSource, 3, false);
  EXPECT_EQ(p.config.num_tasks(), 9u);
  EXPECT_EQ(p.config.num_channels, 1);
  EXPECT_EQ(p.config.sources[0].compute_budget, 1);
  p = sweep_point(base, SweepVariable::kTasksPerSource, 3, true);
  EXPECT_EQ(p.config.num_channels, 3);
  EXPECT_EQ(p.bound_r, 3);
  EXPECT_EQ(p.bound_base.num_tasks(), 3u);
  p = sweep_point(base, SweepVariable::kChannels, 5, false);
  EXPECT_EQ(p.config.num_channels, 5);
  p = sweep_point(base, SweepVariable::kSources, 5, false);
  EXPECT_EQ(p.config.num_sources, 5);
  EXPECT_EQ(p.config.sources[4].tasks[0].penalty, base.sources[1].tasks[0].penalty);
  EXPECT_TRUE(validate_config(p.config).empty());
}

TEST(Experiment, SweepIsIndependentOfWorkerCount) {
  ExperimentSpec spec;
  spec.variable = SweepVariable::kChannels;
  spec.values = {1, 2};
  spec.policies = {"mgf", "maf", "random"};
  spec.random_seeds = {1, 2};
  const auto base = mtri::testing::certify_base(12, 20);
  const auto a = sweep_csv(spec.variable, run_sweep(base, {}, spec, 1)).str();
  const auto b = sweep_csv(spec.variable, run_sweep(base, {}, spec, 3)).str();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "sweep_var,sweep_value,policy,seed,discounted_cost,gap,theorem1_rhs");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 2 * 4);
}
