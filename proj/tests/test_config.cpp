#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcm/config.hpp"
#include "mcm/report.hpp"

using namespace mcm;
namespace fs = std::filesystem;

namespace {

std::string error_path(const nlohmann::json& j) {
  try {
    RunConfig::from_json(j).check();
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mcm_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RunConfigTest, DefaultsValidate) {
  const RunConfig c;
  EXPECT_NO_THROW(c.check());
  EXPECT_EQ(c.execution.shots, 10000);
  EXPECT_FALSE(c.noise.sigma.has_value());
}

TEST(RunConfigTest, JsonRoundTripIsAFixedPoint) {
  RunConfig c;
  c.noise.sigma = 2 * 3.141592653589793 * 50.0;
  c.execution.seed = 77;
  c.sequence.echoes = 6;
  const std::string once = c.to_json().dump();
  const RunConfig back = RunConfig::from_json(nlohmann::json::parse(once));
  EXPECT_EQ(back.to_json().dump(), once);
  EXPECT_EQ(back.execution.seed, 77u);
  EXPECT_EQ(back.sequence.echoes, 6);
  EXPECT_NEAR(*back.noise.sigma / *c.noise.sigma, 1.0, 1e-12);
  EXPECT_NEAR(back.sequence.env.bias_field / c.sequence.env.bias_field, 1.0, 1e-12);
}

TEST(RunConfigTest, ErrorsCarryTheFieldPath) {
  EXPECT_EQ(error_path({{"execution", {{"shots", 0}}}}), "execution.shots");
  EXPECT_EQ(error_path({{"execution", {{"shotz", 5}}}}), "execution.shotz");
  EXPECT_EQ(error_path({{"bogus", 1}}), "bogus");
  EXPECT_EQ(error_path({{"noise", {{"t2star", "3.2 kg"}}}}), "noise.t2star");
  EXPECT_EQ(error_path({{"noise", {{"t2star", 3.2e-3}}}}), "noise.t2star");  // bare numbers need a unit
  EXPECT_EQ(error_path({{"readout", {{"eta", "high"}}}}), "readout.eta");
  EXPECT_EQ(error_path({{"noise", {{"t2star", "3.2 ms"}}}}), "<none>");
}

TEST(RunConfigTest, UnitsAreParsed) {
  const RunConfig c = RunConfig::from_json({{"noise", {{"t2star", "1.5 ms"}}}, {"sequence", {{"readout_time", "2 ms"}}}});
  EXPECT_DOUBLE_EQ(c.noise.t2star, 1.5e-3);
  EXPECT_DOUBLE_EQ(c.sequence.readout_time, 2e-3);
}

TEST(RunConfigTest, LoadHonoursEnvironment) {
  const fs::path d = scratch("config");
  const fs::path file = d / "c.json";
  std::ofstream(file) << R"({"execution": {"shots": 123, "seed": 9}})";
  EXPECT_EQ(RunConfig::load(file.string()).execution.shots, 123);
  ::setenv(kConfigEnv, file.c_str(), 1);
  EXPECT_EQ(load_config(std::nullopt).execution.seed, 9u);
  ::unsetenv(kConfigEnv);
  EXPECT_EQ(load_config(std::nullopt).execution.shots, 10000);
  std::ofstream(d / "broken.json") << "{ not json";
  EXPECT_THROW(RunConfig::load((d / "broken.json").string()), ConfigError);
  EXPECT_THROW(RunConfig::load((d / "missing.json").string()), ConfigError);
}

TEST(Report, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Report, ManifestListsArtifactsInOrder) {
  const fs::path d = scratch("rundir");
  RunDirectory run(d);
  run.write("b.txt", "abc");
  run.write_json("a.json", nlohmann::ordered_json{{"x", 1}});
  EXPECT_THROW(run.write("manifest.json", "{}"), std::invalid_argument);
  run.finalize({{"seed", 4}});
  EXPECT_THROW(run.write("late.txt", "x"), std::logic_error);
  EXPECT_EQ(slurp(d / "b.txt"), "abc");
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(m["meta"]["seed"], 4);
  ASSERT_EQ(m["artifacts"].size(), 2u);
  EXPECT_EQ(m["artifacts"][0]["name"], "b.txt");
  EXPECT_EQ(m["artifacts"][0]["bytes"], 3);
  EXPECT_EQ(m["artifacts"][0]["sha256"], sha256_hex("abc"));
  EXPECT_EQ(m["artifacts"][1]["sha256"], sha256_hex(slurp(d / "a.json")));
  EXPECT_EQ(json_text(nlohmann::ordered_json{{"x", 1}}).back(), '\n');
}
