#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nld/cli/config.hpp"
#include "nld/cli/dispatch.hpp"

using namespace nld;
using namespace nld::cli;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = NLD_CONFIG_DIR;

const char* kMinimal = R"({
  "problem": "sis",
  "grid": {"bounds": [0, 1]},
  "sis": {"kernel": {"family": "uniform", "radius": 1}, "beta": 2, "gamma": 1, "m": 1, "K": 1}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nld_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig load(const std::string& name, const fs::path& out) {
  RunConfig cfg = parse_config(kConfigs + "/" + name);
  cfg.out_dir = out.string();
  return cfg;
}

std::string config_error_path(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, MinimalDefaults) {
  const RunConfig cfg = parse_config_text(kMinimal);
  EXPECT_EQ(cfg.kind, ProblemKind::sis);
  EXPECT_EQ(cfg.grid.size(), 64);
  EXPECT_EQ(cfg.solver.tol, 1e-10);
  ASSERT_TRUE(cfg.sis);
  EXPECT_EQ(cfg.sis->k, 1.0);
  EXPECT_EQ(cfg.config_hash.size(), 64u);
}

TEST(Config, NonpositiveMuRejectedWithPath) {
  std::string text = kMinimal;
  text.replace(text.find("\"K\": 1"), 6, "\"K\": 1, \"mu\": -0.5");
  EXPECT_NE(config_error_path(text).find("/sis/mu"), std::string::npos);
  text = kMinimal;
  text.replace(text.find("\"K\": 1"), 6, "\"K\": 1, \"mu\": 0");
  EXPECT_NE(config_error_path(text).find("/sis/mu"), std::string::npos);
}

TEST(Config, UnknownKeyRejectedWithLocation) {
  std::string text = kMinimal;
  text.replace(text.find("\"beta\""), 6, "\"betta\": 1, \"beta\"");
  EXPECT_NE(config_error_path(text).find("/sis/betta"), std::string::npos);
}

TEST(Config, MissingKeyAndTypeMismatch) {
  std::string text = kMinimal;
  text.replace(text.find("\"gamma\": 1, "), 12, "");
  EXPECT_NE(config_error_path(text).find("/sis/gamma"), std::string::npos);
  text = kMinimal;
  text.replace(text.find("\"K\": 1"), 6, "\"K\": \"one\"");
  EXPECT_NE(config_error_path(text).find("/sis/K"), std::string::npos);
  EXPECT_THROW(parse_config(kConfigs + "/does_not_exist.json"), InvalidArgument);
}

TEST(Config, ToleranceRange) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), ", \"solver\": {\"tol\": 0.5}");
  EXPECT_NE(config_error_path(text).find("/solver/tol"), std::string::npos);
}

TEST(Config, ThreeDecadeSweepHas25Points) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), ", \"sweeps\": [{\"parameter\": \"d_I\", \"from\": 0.001, \"to\": 1}]");
  const RunConfig cfg = parse_config_text(text);
  ASSERT_EQ(cfg.sweeps.size(), 1u);
  EXPECT_EQ(cfg.sweeps[0].values.size(), 25u);
}

TEST(Config, HashTracksContent) {
  const RunConfig a = parse_config_text(kMinimal);
  std::string text = kMinimal;
  text.replace(text.find("\"beta\": 2"), 9, "\"beta\": 3");
  EXPECT_NE(a.config_hash, parse_config_text(text).config_hash);
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Dispatch, R0OnConstantSisIsOne) {
  const auto out = scratch("r0");
  std::ostringstream log, err;
  ASSERT_EQ(dispatch("r0", load("sis_constant.json", out), log, err), kExitOk) << err.str();
  const json j = json::parse(slurp(out / "report.json"));
  EXPECT_NEAR(j["report"]["mu0_next_generation"].get<double>(), 1.0, 1e-10);
  EXPECT_NEAR(j["report"]["mu0_bisection"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(j["report"]["mu0_rayleigh"].get<double>(), 1.0, 1e-10);
}

TEST(Dispatch, VerifyPassesOnShippedConfigs) {
  for (const char* name : {"sis_constant.json", "sis_bump.json", "sis_degenerate.json", "two_species.json",
                           "partially_degenerate.json", "cw_refusal.json"}) {
    const auto out = scratch(std::string("verify_") + name);
    std::ostringstream log, err;
    EXPECT_EQ(dispatch("verify", load(name, out), log, err), kExitOk) << name << "\n" << log.str() << err.str();
    EXPECT_EQ(log.str().find("FAIL"), std::string::npos) << name;
  }
}

TEST(Dispatch, CwRefusalExitsTwo) {
  const auto out = scratch("refusal");
  std::ostringstream log, err;
  EXPECT_EQ(dispatch("spectral", load("cw_refusal.json", out), log, err), kExitRefused);
  const json j = json::parse(slurp(out / "error.json"));
  EXPECT_EQ(j["status"], "refused");
  EXPECT_NE(j["message"].get<std::string>().find("CW characterization not guaranteed"), std::string::npos);
}

TEST(Dispatch, DegenerateSweepPopulatesSandwich) {
  const auto out = scratch("sweep");
  std::ostringstream log, err;
  ASSERT_EQ(dispatch("sweep", load("sis_degenerate.json", out), log, err), kExitOk) << err.str();
  std::istringstream csv(slurp(out / "sweep_K.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("# config_hash=", 0), 0u);
  std::getline(csv, line);
  EXPECT_EQ(line, "K,R0,target_small,target_large,sandwich_lower,sandwich_upper");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(line.find("nan"), std::string::npos) << line;
    std::vector<double> v;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 6u);
    EXPECT_NEAR(v[4], 2.0 / 1.5, 1e-12);
    EXPECT_LE(v[4], v[5]);
  }
  EXPECT_EQ(rows, 9);
}

TEST(Dispatch, DeterministicOutputs) {
  for (const char* cmd : {"r0", "sweep", "simulate"}) {
    const auto a = scratch(std::string("det_a_") + cmd), b = scratch(std::string("det_b_") + cmd);
    std::ostringstream log, err;
    RunConfig ca = load("sis_bump.json", a), cb = load("sis_bump.json", b);
    cb.threads = 3;
    ASSERT_EQ(dispatch(cmd, ca, log, err), kExitOk) << err.str();
    ASSERT_EQ(dispatch(cmd, cb, log, err), kExitOk) << err.str();
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      std::string ta = slurp(entry.path()), tb = slurp(b / name);
      if (name == "report.json") {
        // The output directory is not part of the report; only numbers and stamps.
        EXPECT_EQ(json::parse(ta), json::parse(tb)) << cmd;
      } else {
        EXPECT_EQ(ta, tb) << cmd << " " << name;
      }
    }
  }
}

TEST(Dispatch, OutputsEmbedHashAndSeed) {
  const auto out = scratch("stamp");
  RunConfig cfg = load("sis_bump.json", out);
  std::ostringstream log, err;
  ASSERT_EQ(dispatch("simulate", cfg, log, err), kExitOk);
  ASSERT_EQ(dispatch("sweep", cfg, log, err), kExitOk);
  const std::string tag = "# config_hash=" + cfg.config_hash + " seed=" + std::to_string(cfg.seed);
  EXPECT_EQ(slurp(out / "trajectory.csv").rfind(tag, 0), 0u);
  EXPECT_EQ(slurp(out / "sweep_d_I.csv").rfind(tag, 0), 0u);
  const json j = json::parse(slurp(out / "report.json"));
  EXPECT_EQ(j["config_hash"], cfg.config_hash);
  EXPECT_EQ(j["seed"], cfg.seed);
}

TEST(Dispatch, UnknownCommandIsError) {
  const auto out = scratch("unknown");
  std::ostringstream log, err;
  EXPECT_EQ(dispatch("plot", load("sis_constant.json", out), log, err), kExitError);
}
