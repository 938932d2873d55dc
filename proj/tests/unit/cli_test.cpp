/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "boxmend/coco.hpp"
#include "boxmend/synth.hpp"
#include "cli.hpp"
#include "golden.hpp"
#include "manifest.hpp"

namespace boxmend {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("boxmend-cli-" + std::string(info->name()) + "-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(std::move(args), out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string make_truth() {
    SceneSpec spec;
    spec.dims = {64, 64};
    spec.num_objects = 3;
    spec.min_size = 10;
    spec.max_size = 24;
    spec.seed = 3;
    save_coco(scenes_to_dataset(generate_scenes(spec, 4)), path("truth.json"));
    return path("truth.json");
  }

  static nlohmann::json load(const std::string& p) { return nlohmann::json::parse(read_text_file(p)); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), cli::kExitUsage);
  EXPECT_EQ(run({"inject-noise", "--in", "x.json", "--out", "y.json", "--level", "0.1", "--bogus"}), cli::kExitUsage);
  EXPECT_EQ(run({"inject-noise", "--in", "x.json", "--out", "y.json"}), cli::kExitUsage);
  const auto truth = make_truth();
  EXPECT_EQ(run({"inject-noise", "--in", truth, "--out", path("n.json"), "--level", "1.5"}), cli::kExitUsage);
  EXPECT_EQ(run({"--help"}), cli::kExitOk);
}

TEST_F(CliTest, DataErrors) {
  EXPECT_EQ(run({"inject-noise", "--in", path("missing.json"), "--out", path("n.json"), "--level", "0.1"}), cli::kExitData);
  write_text_file(path("broken.json"), "{");
  EXPECT_EQ(run({"validate", "--in", path("broken.json")}), cli::kExitData);
}

TEST_F(CliTest, ValidateReportsProblems) {
  const auto truth = make_truth();
  EXPECT_EQ(run({"validate", "--in", truth, "--out", path("report.json")}), cli::kExitOk);
  auto j = load(truth);
  j["annotations"].push_back(j["annotations"][0]);
  write_text_file(path("dup.json"), j.dump());
  EXPECT_EQ(run({"validate", "--in", path("dup.json")}), cli::kExitData);
  EXPECT_NE(err_.str().find("duplicate annotation id"), std::string::npos);
}

TEST_F(CliTest, ConfigFileWithFlagsWinning) {
  const auto truth = make_truth();
  write_text_file(path("cfg.json"), R"({"in":")" + truth + R"(","out":")" + path("n.json") + R"(","level":0.8,"seed":5})");
  ASSERT_EQ(run({"inject-noise", "--config", path("cfg.json")}), cli::kExitOk) << err_.str();
  const Dataset clean = load_coco(truth);
  const Dataset by_config = load_coco(path("n.json"));
  EXPECT_NE(by_config.annotations[0].box, clean.annotations[0].box);
  EXPECT_EQ(by_config.provenance["noise_level"], 0.8);

  ASSERT_EQ(run({"inject-noise", "--config", path("cfg.json"), "--level", "0"}), cli::kExitOk) << err_.str();
  const Dataset overridden = load_coco(path("n.json"));
  for (std::size_t i = 0; i < clean.annotations.size(); ++i) EXPECT_EQ(overridden.annotations[i].box, clean.annotations[i].box);

  write_text_file(path("bad.json"), "[1]");
  EXPECT_EQ(run({"inject-noise", "--config", path("bad.json")}), cli::kExitUsage);
}

TEST_F(CliTest, ManifestDigestsMatchFiles) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto truth = make_truth();
  ASSERT_EQ(run({"inject-noise", "--in", truth, "--out", path("n.json"), "--level", "0.3", "--seed", "9"}), cli::kExitOk);
  const auto m = load(path("n.json") + ".manifest.json");
  EXPECT_EQ(m["subcommand"], "inject-noise");
  ASSERT_EQ(m["inputs"].size(), 1u);
  ASSERT_EQ(m["outputs"].size(), 1u);
  EXPECT_EQ(m["inputs"][0]["sha256"], cli::sha256_file(truth));
  EXPECT_EQ(m["outputs"][0]["sha256"], cli::sha256_file(path("n.json")));
  EXPECT_EQ(m["seeds"]["noise_seed"], 9);
}

TEST_F(CliTest, RerunIsByteIdentical) {
  const auto truth = make_truth();
  const std::vector<std::string> args{"correct", "--in", "", "--out", "", "--records", "", "--oracle-truth", truth,
                                      "--jitter", "1.5", "--oracle-seed", "4"};
  ASSERT_EQ(run({"inject-noise", "--in", truth, "--out", path("n.json"), "--level", "0.4", "--seed", "2"}), cli::kExitOk);
  for (const char* tag : {"a", "b"}) {
    auto a = args;
    a[2] = path("n.json");
    a[4] = path(std::string("c_") + tag + ".json");
    a[6] = path(std::string("r_") + tag + ".json");
    ASSERT_EQ(run(a), cli::kExitOk) << err_.str();
  }
  EXPECT_EQ(read_text_file(path("c_a.json")), read_text_file(path("c_b.json")));
  EXPECT_EQ(read_text_file(path("r_a.json")), read_text_file(path("r_b.json")));
}

TEST_F(CliTest, PipelineAtLevelZeroKeepsMap) {
  ASSERT_EQ(run({"pipeline", "--count", "3", "--level", "0", "--variant", "all", "--out-dir", path("run")}), cli::kExitOk)
      << err_.str();
  const auto report = load(path("run/report.json"));
  EXPECT_EQ(report["noisy"]["map"], 1.0);
  EXPECT_EQ(report["fmc"]["map"], report["noisy"]["map"]);
  EXPECT_EQ(report["fmc+interp"]["map"], report["noisy"]["map"]);
  EXPECT_TRUE(fs::exists(path("run/manifest.json")));
  EXPECT_TRUE(fs::exists(path("run/images/000001.png")));
}

TEST_F(CliTest, DeadWorkerIsProviderFailure) {
  const auto truth = make_truth();
  const std::string worker = std::string(BOXMEND_TEST_WORKERS_DIR) + "/die_after_handshake.sh";
  EXPECT_EQ(run({"correct", "--in", truth, "--out", path("c.json"), "--provider", "worker:" + worker}), cli::kExitProvider);
  EXPECT_EQ(run({"correct", "--in", truth, "--out", path("c.json"), "--provider", "worker:false"}), cli::kExitProvider);
}

TEST_F(CliTest, WorkerProviderMatchesInProcessOracle) {
  const auto truth = make_truth();
  ASSERT_EQ(run({"inject-noise", "--in", truth, "--out", path("n.json"), "--level", "0.4"}), cli::kExitOk);
  ASSERT_EQ(run({"correct", "--in", path("n.json"), "--out", path("a.json"), "--oracle-truth", truth}), cli::kExitOk)
      << err_.str();
  const std::string worker = std::string(BOXMEND_ORACLE_WORKER) + " --truth " + truth;
  ASSERT_EQ(run({"correct", "--in", path("n.json"), "--out", path("b.json"), "--provider", "worker:" + worker, "--jobs", "2"}),
            cli::kExitOk)
      << err_.str();
  EXPECT_EQ(load_coco(path("a.json")).annotations, load_coco(path("b.json")).annotations);
}

TEST_F(CliTest, RobustnessAndEvaluate) {
  write_text_file(path("perfs.csv"), "level,perf\n0.0,77.3\n0.2,71.9\n0.4,44.3\n0.6,19.3\n0.8,13.5\n1.0,19.0\n");
  ASSERT_EQ(run({"robustness", "--base", "77.3", "--perfs", path("perfs.csv"), "--out", path("p.json"), "--plot-csv",
                 path("plot.csv")}),
            cli::kExitOk);
  EXPECT_NEAR(load(path("p.json"))["mae"].get<double>(), 36.4, 0.06);
  EXPECT_TRUE(fs::exists(path("plot.csv")));

  const auto truth = make_truth();
  ASSERT_EQ(run({"evaluate", "--dets", truth, "--gts", truth}), cli::kExitOk);
  EXPECT_EQ(nlohmann::json::parse(out_.str())["map"], 1.0);
}

}  // namespace
}  // namespace boxmend
