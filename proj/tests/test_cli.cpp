#include "arousal/cli.hpp"
#include "arousal/image.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using arousal::testing::TempDir;
namespace cli = arousal::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Six short sessions at 36x48, shared by every test in this file.
class CliDataset : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    const Result r = run({"synth", "--out", (dir_->path() / "data").string(), "--sessions", "6", "--duration", "16",
                          "--height", "36", "--width", "48", "--seed", "3"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    manifest_ = (dir_->path() / "data" / "manifest.json").string();
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static std::vector<std::string> crossval(const fs::path& out) {
    return {"crossval", "--manifest", manifest_, "--out", out.string(), "--mode", "classify", "--epsilon", "0.2",
            "--window", "0.5", "--modality", "both", "--seed", "7", "--max-epochs", "2", "--patience", "1"};
  }

  static TempDir* dir_;
  static std::string manifest_;
};

TempDir* CliDataset::dir_ = nullptr;
std::string CliDataset::manifest_;

}  // namespace

TEST(Cli, NoCommandIsUsageError) { EXPECT_EQ(run({}).code, cli::kExitUsage); }

TEST(Cli, UnknownCommandIsUsageError) { EXPECT_EQ(run({"fly"}).code, cli::kExitUsage); }

TEST(Cli, HelpSucceeds) { EXPECT_EQ(run({"--help"}).code, cli::kExitOk); }

TEST(Cli, SweepWithoutDatasetIsUsageError) {
  TempDir d;
  const Result r = run({"sweep", "--axis", "epsilon", "--out", (d / "o").string()});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--manifest"), std::string::npos);
}

TEST(Cli, MissingManifestIsDataErrorNamingTheFile) {
  TempDir d;
  const std::string missing = (d / "nowhere" / "m.json").string();
  const Result r = run({"crossval", "--manifest", missing, "--out", (d / "o").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST(Cli, UnknownFlagIsUsageError) {
  TempDir d;
  EXPECT_EQ(run({"crossval", "--manifest", "m.json", "--out", (d / "o").string(), "--gamma", "1"}).code,
            cli::kExitUsage);
}

TEST(Cli, BadFlagValuesAreUsageErrors) {
  TempDir d;
  const std::string out = (d / "o").string();
  EXPECT_EQ(run({"crossval", "--manifest", "m.json", "--out", out, "--mode", "regress"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"crossval", "--manifest", "m.json", "--out", out, "--window", "-1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"crossval", "--manifest", "m.json", "--out", out, "--patience", "0"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"synth", "--out", out, "--duration", "10"}).code, cli::kExitUsage);
}

TEST(Cli, InvalidSeedEnvironmentIsUsageError) {
  TempDir d;
  ::setenv("AROUSAL_FORGE_SEED", "twelve", 1);
  const Result r = run({"synth", "--out", (d / "o").string(), "--sessions", "1", "--height", "36", "--width", "48",
                        "--duration", "15"});
  ::unsetenv("AROUSAL_FORGE_SEED");
  EXPECT_EQ(r.code, cli::kExitUsage);
}

TEST(Cli, SeedEnvironmentFallback) {
  TempDir d;
  const std::vector<std::string> base{"--sessions", "1", "--height", "36", "--width", "48", "--duration", "15"};
  auto with = [&](const std::string& out, std::vector<std::string> extra) {
    std::vector<std::string> a{"synth", "--out", (d / out).string()};
    a.insert(a.end(), base.begin(), base.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a);
  };
  ::setenv("AROUSAL_FORGE_SEED", "41", 1);
  ASSERT_EQ(with("env", {}).code, 0);
  ::unsetenv("AROUSAL_FORGE_SEED");
  ASSERT_EQ(with("flag", {"--seed", "41"}).code, 0);
  ASSERT_EQ(with("zero", {}).code, 0);
  EXPECT_EQ(slurp(d / "env" / "syn000" / "trace.csv"), slurp(d / "flag" / "syn000" / "trace.csv"));
  EXPECT_NE(slurp(d / "env" / "syn000" / "trace.csv"), slurp(d / "zero" / "syn000" / "trace.csv"));
}

TEST_F(CliDataset, CrossvalWritesReportAndSnapshot) {
  TempDir d;
  const Result r = run(crossval(d / "cv"));
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto report = nlohmann::json::parse(slurp(d / "cv" / "report.json"));
  EXPECT_EQ(report["folds"].size(), 6u);
  EXPECT_TRUE(report.contains("summary"));
  EXPECT_EQ(report["config"]["seed"], 7);
  EXPECT_TRUE(fs::exists(d / "cv" / "config.json"));
  EXPECT_TRUE(fs::exists(d / "cv" / "run_info.json"));
  EXPECT_NE(r.out.find("mean accuracy"), std::string::npos);
}

TEST_F(CliDataset, ReportsAreByteIdenticalAcrossRuns) {
  TempDir d;
  ASSERT_EQ(run(crossval(d / "a")).code, 0);
  ASSERT_EQ(run(crossval(d / "b")).code, 0);
  EXPECT_EQ(slurp(d / "a" / "report.json"), slurp(d / "b" / "report.json"));
}

TEST_F(CliDataset, SnapshotRerunReproducesTheReport) {
  TempDir d;
  ASSERT_EQ(run(crossval(d / "a")).code, 0);
  const Result r = run({"crossval", "--from", (d / "a" / "config.json").string(), "--out", (d / "b").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(d / "a" / "report.json"), slurp(d / "b" / "report.json"));
  EXPECT_EQ(slurp(d / "a" / "config.json"), slurp(d / "b" / "config.json"));
}

TEST_F(CliDataset, NonEmptyOutputNeedsForce) {
  TempDir d;
  fs::create_directories(d / "o");
  std::ofstream(d / "o" / "keep.txt") << "x";
  auto args = crossval(d / "o");
  EXPECT_EQ(run(args).code, cli::kExitUsage);
  args.push_back("--force");
  EXPECT_EQ(run(args).code, cli::kExitOk);
}

TEST_F(CliDataset, SweepWritesCurve) {
  TempDir d;
  const Result r = run({"sweep", "--manifest", manifest_, "--out", (d / "s").string(), "--axis", "epsilon",
                        "--values", "0.1,0.3", "--max-epochs", "1", "--seed", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(d / "s" / "curve.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "value,mean_acc,ci,baseline,mean_tau");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(nlohmann::json::parse(slurp(d / "s" / "sweep.json"))["reports"].size(), 2u);
}

TEST_F(CliDataset, PreprocessListsVerdicts) {
  TempDir d;
  const Result r = run({"preprocess", "--manifest", manifest_, "--out", (d / "p").string(), "--dtw-threshold", "0.4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(d / "p" / "preprocess.json"));
  ASSERT_EQ(j["sessions"].size(), 6u);
  for (const auto& v : j["sessions"]) EXPECT_TRUE(v.contains("dtw_distance"));
  EXPECT_NE(r.out.find("syn000"), std::string::npos);
}

TEST_F(CliDataset, TrainThenGradCam) {
  TempDir d;
  Result r = run({"train", "--manifest", manifest_, "--out", (d / "t").string(), "--test", "syn002", "--max-epochs",
                  "1", "--modality", "visual"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(d / "t" / "model.ckpt"));
  EXPECT_TRUE(fs::exists(d / "t" / "train_report.json"));

  r = run({"gcam", "--checkpoint", (d / "t" / "model.ckpt").string(), "--manifest", manifest_, "--session", "syn002",
           "--segments", "0,3", "--out", (d / "g").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const std::string stem : {"syn002_seg0", "syn002_seg3"}) {
    const arousal::GrayImage img = arousal::read_pnm(d / "g" / (stem + ".pgm"));
    EXPECT_EQ(img.rows(), 36);
    EXPECT_EQ(img.cols(), 48);
    const auto side = nlohmann::json::parse(slurp(d / "g" / (stem + ".json")));
    EXPECT_EQ(side["target"], 1);
    EXPECT_EQ(side["frames"], 15);
  }

  r = run({"gcam", "--checkpoint", (d / "t" / "model.ckpt").string(), "--manifest", manifest_, "--segments", "9999",
           "--out", (d / "h").string()});
  EXPECT_EQ(r.code, cli::kExitData);
}

TEST_F(CliDataset, GradCamOnAudioModelIsDataError) {
  TempDir d;
  ASSERT_EQ(run({"train", "--manifest", manifest_, "--out", (d / "t").string(), "--max-epochs", "1", "--modality",
                 "audio"})
                .code,
            0);
  EXPECT_EQ(run({"gcam", "--checkpoint", (d / "t" / "model.ckpt").string(), "--manifest", manifest_, "--segments",
                 "0", "--out", (d / "g").string()})
                .code,
            cli::kExitData);
}
