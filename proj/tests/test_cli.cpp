// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "aerotrack/cli.hpp"
#include "aerotrack/io.hpp"

namespace aerotrack::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kSamples = AEROTRACK_SAMPLES;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("aerotrack_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return dispatch(args, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, SynthTrackEvalClosedLoop) {
  ASSERT_EQ(run({"synth", "--seed", "4", "--output", path("seq")}), kExitOk) << err_.str();
  for (const char* f : {"gt.txt", "detections.txt", "embeddings.emb", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "seq" / f)) << f;
  }
  ASSERT_EQ(run({"track", "--detections", path("seq/detections.txt"), "--embeddings", path("seq/embeddings.emb"),
                 "--output", path("tracks.txt")}),
            kExitOk)
      << err_.str();
  ASSERT_EQ(run({"eval-mot", "--tracks", path("tracks.txt"), "--gt", path("seq/gt.txt"), "--format", "json"}),
            kExitOk)
      << err_.str();
  const auto report = nlohmann::json::parse(out_.str());
  EXPECT_DOUBLE_EQ(report["ap"].get<double>(), 1.0);
  EXPECT_EQ(report["manifest"]["command"].get<std::string>().rfind("aerotrack eval-mot", 0), 0u);
}

TEST_F(CliTest, TrackingIsDeterministic) {
  const std::vector<std::string> common = {"--detections", (kSamples / "detections.txt").string(), "--embeddings",
                                           (kSamples / "embeddings.emb").string(), "--config",
                                           (kSamples / "tracker.cfg").string()};
  auto a = common, b = common;
  a.insert(a.begin(), "track");
  b.insert(b.begin(), "track");
  a.insert(a.end(), {"--output", path("a.txt")});
  b.insert(b.end(), {"--output", path("b.txt")});
  ASSERT_EQ(run(a), kExitOk) << err_.str();
  ASSERT_EQ(run(b), kExitOk) << err_.str();
  EXPECT_EQ(io::read_text_file(path("a.txt")), io::read_text_file(path("b.txt")));
  // the shipped sample output was produced by this configuration
  EXPECT_EQ(io::read_text_file(path("a.txt")), io::read_text_file(kSamples / "tracks.txt"));
}

TEST_F(CliTest, ManifestRecordsInputDigests) {
  const auto dets = kSamples / "detections.txt";
  ASSERT_EQ(run({"track", "--detections", dets.string(), "--embeddings", (kSamples / "embeddings.emb").string(),
                 "--set", "n_init=1", "--output", path("t.txt")}),
            kExitOk)
      << err_.str();
  const auto manifest = nlohmann::json::parse(io::read_text_file(path("t.txt.manifest.json")));
  EXPECT_EQ(manifest["tool"], "aerotrack");
  EXPECT_EQ(manifest["version"], tool_version());
  EXPECT_EQ(manifest["config"]["tracker"]["n_init"], 1);
  ASSERT_EQ(manifest["inputs"].size(), 2u);
  EXPECT_EQ(manifest["inputs"][0]["sha256"], file_sha256(dets));
  EXPECT_EQ(manifest["outputs"][0], path("t.txt"));
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex({}), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::string abc = "abc";
  EXPECT_EQ(sha256_hex({reinterpret_cast<const unsigned char*>(abc.data()), abc.size()}),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(CliTest, EvalDetPerfectFixture) {
  ASSERT_EQ(run({"eval-det", "--detections", (kSamples / "det_perfect.txt").string(), "--gt",
                 (kSamples / "det_gt.txt").string(), "--format", "json", "--output", path("r.json")}),
            kExitOk)
      << err_.str();
  const auto report = nlohmann::json::parse(out_.str());
  EXPECT_DOUBLE_EQ(report["ap"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(report["ar"]["500"].get<double>(), 1.0);
  EXPECT_TRUE(report["per_class_ap"]["bicycle"].is_null());
  EXPECT_EQ(io::read_text_file(path("r.json")), out_.str());
  EXPECT_TRUE(fs::exists(path("r.json.manifest.json")));
}

TEST_F(CliTest, AnchorsReportOnTinyBoxes) {
  ASSERT_EQ(run({"anchors", "report", "--gt", (kSamples / "boxes_8x8.txt").string(), "--format", "json"}), kExitOk)
      << err_.str();
  const auto report = nlohmann::json::parse(out_.str());
  EXPECT_EQ(report["buckets"][0]["label"], "<16");
  EXPECT_EQ(report["buckets"][0]["total"], 60);
  EXPECT_DOUBLE_EQ(report["buckets"][0]["coverage"].get<double>(), 0.0);
  ASSERT_EQ(run({"anchors", "report", "--preset", "dense", "--gt", (kSamples / "boxes_8x8.txt").string(),
                 "--format", "json"}),
            kExitOk);
  EXPECT_GT(nlohmann::json::parse(out_.str())["coverage"].get<double>(), 0.0);
}

TEST_F(CliTest, BatchDirectoryMode) {
  fs::create_directories(dir_ / "in");
  for (int seed = 1; seed <= 3; ++seed) {
    ASSERT_EQ(run({"synth", "--seed", std::to_string(seed), "--frames", "30", "--output", path("s")}), kExitOk);
    fs::copy_file(dir_ / "s" / "detections.txt", dir_ / "in" / ("seq" + std::to_string(seed) + ".txt"));
    fs::copy_file(dir_ / "s" / "embeddings.emb", dir_ / "in" / ("seq" + std::to_string(seed) + ".emb"));
    fs::remove_all(dir_ / "s");
  }
  ASSERT_EQ(run({"track", "--detections", path("in"), "--embeddings", path("in"), "--output", path("out"), "--jobs",
                 "2"}),
            kExitOk)
      << err_.str();
  for (int seed = 1; seed <= 3; ++seed) EXPECT_TRUE(fs::exists(dir_ / "out" / ("seq" + std::to_string(seed) + ".txt")));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "manifest.json"));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"--help"}), kExitOk);
  EXPECT_EQ(run({"track", "--help"}), kExitOk);
  EXPECT_EQ(run({"eval-det", "--bogus"}), kExitUsage);
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"eval-det", "--detections", path("missing.txt"), "--gt", path("missing.txt")}), kExitFailure);
  io::write_file(path("bad.txt"), "1,2,3\n");
  EXPECT_EQ(run({"eval-det", "--detections", path("bad.txt"), "--gt", (kSamples / "det_gt.txt").string()}),
            kExitFailure);
  EXPECT_NE(err_.str().find("bad.txt:1"), std::string::npos) << err_.str();
  EXPECT_EQ(run({"track", "--detections", (kSamples / "detections.txt").string(), "--embeddings",
                 (kSamples / "embeddings.emb").string(), "--set", "nope=1", "--output", path("x.txt")}),
            kExitFailure);
}

TEST_F(CliTest, MisalignedEmbeddingsNameTheFrame) {
  io::write_file(path("d.txt"), "1,0,0,5,5,0.9,4\n2,0,0,5,5,0.9,4\n");
  io::write_embeddings({2, {1, 0}}, path("e.emb"));
  EXPECT_EQ(run({"track", "--detections", path("d.txt"), "--embeddings", path("e.emb"), "--output", path("o.txt")}),
            kExitFailure);
  EXPECT_NE(err_.str().find("frame 2"), std::string::npos) << err_.str();
}

}  // namespace
}  // namespace aerotrack::cli
