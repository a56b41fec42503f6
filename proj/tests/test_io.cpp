// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "aerotrack/error.hpp"
#include "aerotrack/io.hpp"
#include "support/oracles.hpp"

namespace aerotrack::io {
namespace {

using aerotrack::testing::Rng;

std::size_t parse_error_line(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError thrown";
  return 0;
}

TEST(Detections, ParsesExampleLine) {
  const auto stream = parse_detections("1,100.5,200,30,40,0.87,4\n");
  ASSERT_EQ(stream.size(), 1u);
  const Detection& d = stream[0].detections[0];
  EXPECT_EQ(d.frame_id, 1);
  EXPECT_EQ(d.box, (BoundingBox{100.5, 200, 30, 40}));
  EXPECT_EQ(d.confidence, 0.87);
  EXPECT_EQ(d.class_id, visdrone::kCar);
  EXPECT_EQ(d.embedding_ref, 0u);
  EXPECT_EQ(serialize_detections(stream), "1,100.5,200,30,40,0.87,4\n");
}

TEST(Detections, EmptyInputAndCrLf) {
  EXPECT_TRUE(parse_detections("").empty());
  const auto stream = parse_detections("2,1,2,3,4,0.5,1\r\n2,5,6,7,8,0.25,1\r\n");
  ASSERT_EQ(stream.size(), 1u);
  EXPECT_EQ(stream[0].detections.size(), 2u);
  EXPECT_EQ(parse_detections("2,1,2,3,4,0.5,1").size(), 1u);
}

TEST(Detections, GroupsByFrameKeepingFileOrder) {
  const auto stream = parse_detections("3,0,0,1,1,0.1,1\n1,0,0,2,2,0.2,1\n3,0,0,3,3,0.3,1\n");
  ASSERT_EQ(stream.size(), 2u);
  EXPECT_EQ(stream[0].frame_id, 1);
  EXPECT_EQ(stream[1].frame_id, 3);
  ASSERT_EQ(stream[1].detections.size(), 2u);
  EXPECT_EQ(stream[1].detections[0].embedding_ref, 0u);
  EXPECT_EQ(stream[1].detections[1].embedding_ref, 2u);
  EXPECT_EQ(stream[0].detections[0].embedding_ref, 1u);
}

TEST(Detections, MalformedLinesReportLineNumber) {
  const std::string good = "1,0,0,1,1,0.5,1\n";
  EXPECT_EQ(parse_error_line([&] { parse_detections(good + "1,0,0,1,1,0.5\n"); }), 2u);
  EXPECT_EQ(parse_error_line([&] { parse_detections(good + good + "1,0,0,1,1,0.5,1,9\n"); }), 3u);
  EXPECT_EQ(parse_error_line([&] { parse_detections("x,0,0,1,1,0.5,1\n"); }), 1u);
  EXPECT_EQ(parse_error_line([&] { parse_detections(good + "\n" + good); }), 2u);
  EXPECT_EQ(parse_error_line([&] { parse_detections("1,0,0,0,1,0.5,1\n"); }), 1u);
  EXPECT_EQ(parse_error_line([&] { parse_detections("1,0,0,1,-1,0.5,1\n"); }), 1u);
  EXPECT_EQ(parse_error_line([&] { parse_detections("-1,0,0,1,1,0.5,1\n"); }), 1u);
  EXPECT_EQ(parse_error_line([&] { parse_detections("1,0,0,1,1,1.5,1\n"); }), 1u);
  EXPECT_EQ(parse_error_line([&] { parse_detections("1,0,0,1,1,nan,1\n"); }), 1u);
  EXPECT_EQ(parse_error_line([&] { parse_detections("1, 0,0,1,1,0.5,1\n"); }), 1u);
  EXPECT_EQ(parse_error_line([&] { parse_detections("1,0,0,1,1,0.5,1.0\n"); }), 1u);
}

DetectionStream random_stream(Rng& rng, std::size_t lines) {
  DetectionStream stream;
  FrameId frame = rng.integer(0, 3);
  for (std::size_t i = 0; i < lines; ++i) {
    if (stream.empty() || rng.chance(0.2)) {
      frame += rng.integer(1, 3);
      stream.push_back({frame, {}});
    }
    Detection d;
    d.frame_id = frame;
    d.box = {rng.uniform(-50, 2000), rng.uniform(-50, 1100), rng.uniform(1e-3, 300), rng.uniform(1e-3, 300)};
    if (rng.chance(0.3)) d.box = {static_cast<double>(rng.integer(0, 1900)), 7, 16, 0.5};
    d.confidence = rng.chance(0.1) ? 1.0 : rng.uniform(0, 1);
    d.class_id = rng.integer(1, 10);
    d.embedding_ref = i;
    stream.back().detections.push_back(d);
  }
  return stream;
}

TEST(DetectionsProperty, RoundTripIsExact) {
  Rng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    const auto stream = random_stream(rng, 1000);
    const std::string text = serialize_detections(stream);
    const auto parsed = parse_detections(text);
    ASSERT_EQ(parsed, stream);
    ASSERT_EQ(serialize_detections(parsed), text);
  }
}

TEST(Annotations, ParseAndConvert) {
  const std::string text =
      "1,5,10,20,30,40,1,4,0,1\n"
      "1,6,0,0,100,100,0,0,0,0\n"
      "1,7,50,50,5,5,1,11,0,0\n"
      "2,5,12,20,30,40,1,4,0,2\n";
  const auto records = parse_annotations(text);
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0].target_id, 5);
  EXPECT_EQ(records[3].occlusion, 2);
  EXPECT_EQ(serialize_annotations(records), text);
  const auto gt = to_detection_ground_truth(records);
  EXPECT_EQ(gt.boxes.size(), 2u);
  ASSERT_EQ(gt.ignore_regions.size(), 1u);
  EXPECT_EQ(gt.ignore_regions[0].box.width, 100.0);
  const auto tracklets = to_gt_tracklets(records);
  ASSERT_EQ(tracklets.size(), 2u);
  for (const auto& r : tracklets) {
    EXPECT_EQ(r.track_id, 5);
    EXPECT_EQ(r.confidence, 1.0);
  }
}

TEST(Annotations, Errors) {
  EXPECT_EQ(parse_error_line([] { parse_annotations("1,5,10,20,30,40,1,12,0,1\n"); }), 1u);
  EXPECT_EQ(parse_error_line([] { parse_annotations("1,5,10,20,30,40,1,4,0\n"); }), 1u);
}

TEST(Tracks, RoundTripAndSentinels) {
  const std::string text = "3,2,1.5,2.5,10,20,0.75,1,-1,-1\n";
  const auto rows = parse_tracks(text);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].track_id, 2);
  EXPECT_EQ(rows[0].class_id, 1);
  EXPECT_EQ(serialize_tracks(rows), text);
  EXPECT_EQ(parse_error_line([] { parse_tracks("3,2,1.5,2.5,10,20,0.75,1,0,-1\n"); }), 1u);
}

TEST(Embeddings, EmptyTableIsHeaderOnly) {
  const EmbeddingTable empty{8, {}};
  const auto bytes = encode_embeddings(empty);
  ASSERT_EQ(bytes.size(), kEmbeddingHeaderSize);
  EXPECT_EQ(std::memcmp(bytes.data(), "AEMB", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 8);
  EXPECT_EQ(bytes[12], 0);
  EXPECT_EQ(decode_embeddings(bytes), empty);
}

TEST(Embeddings, LittleEndianLayout) {
  const EmbeddingTable t{1, {1.0f}};
  const auto bytes = encode_embeddings(t);
  ASSERT_EQ(bytes.size(), 20u);
  // 1.0f is 0x3F800000
  EXPECT_EQ(bytes[16], 0x00);
  EXPECT_EQ(bytes[18], 0x80);
  EXPECT_EQ(bytes[19], 0x3F);
  EXPECT_EQ(bytes[12], 1);
}

TEST(EmbeddingsProperty, RandomRoundTrip) {
  Rng rng(72);
  for (int trial = 0; trial < 50; ++trial) {
    EmbeddingTable t;
    t.dim = static_cast<std::size_t>(rng.integer(1, 64));
    const int n = rng.integer(0, 40);
    for (std::size_t i = 0; i < t.dim * n; ++i) t.data.push_back(static_cast<float>(rng.normal()));
    ASSERT_EQ(decode_embeddings(encode_embeddings(t)), t);
  }
}

EmbeddingFormatError::Kind decode_kind(const std::vector<unsigned char>& bytes) {
  try {
    decode_embeddings(bytes);
  } catch (const EmbeddingFormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no EmbeddingFormatError thrown";
  return EmbeddingFormatError::Kind::kBadMagic;
}

TEST(Embeddings, Errors) {
  using Kind = EmbeddingFormatError::Kind;
  const auto good = encode_embeddings({2, {1, 2, 3, 4}});
  auto bytes = good;
  bytes[0] = 'X';
  EXPECT_EQ(decode_kind(bytes), Kind::kBadMagic);
  bytes = good;
  bytes[4] = 2;
  EXPECT_EQ(decode_kind(bytes), Kind::kUnsupportedVersion);
  bytes = good;
  bytes[8] = 0;
  EXPECT_EQ(decode_kind(bytes), Kind::kZeroDimension);
  bytes = good;
  bytes.pop_back();
  EXPECT_EQ(decode_kind(bytes), Kind::kTruncated);
  EXPECT_EQ(decode_kind({'A', 'E', 'M'}), Kind::kTruncated);
  bytes = good;
  bytes.push_back(0);
  EXPECT_EQ(decode_kind(bytes), Kind::kTrailingBytes);
}

TEST(TrackerConfig, RoundTrip) {
  tracking::TrackerParams p;
  p.n_init = 1;
  p.max_age = 12;
  p.association.lambda_app = 0.35;
  p.motion.std_weight_velocity = 0.01;
  const std::string text = serialize_tracker_config(p);
  const auto back = parse_tracker_config(text);
  EXPECT_EQ(back.n_init, 1);
  EXPECT_EQ(back.max_age, 12);
  EXPECT_EQ(back.association.lambda_app, 0.35);
  EXPECT_EQ(back.motion.std_weight_velocity, 0.01);
  EXPECT_EQ(serialize_tracker_config(back), text);
}

TEST(TrackerConfig, CommentsPartialAndErrors) {
  const auto p = parse_tracker_config("# tuned\n\nmax_age = 5   # short\n");
  EXPECT_EQ(p.max_age, 5);
  EXPECT_EQ(p.n_init, 3);
  EXPECT_EQ(parse_error_line([] { parse_tracker_config("max_age = 5\nmax_agee = 5\n"); }), 2u);
  EXPECT_EQ(parse_error_line([] { parse_tracker_config("max_age = 5\nmax_age = 6\n"); }), 2u);
  EXPECT_EQ(parse_error_line([] { parse_tracker_config("lambda_app = lots\n"); }), 1u);
  EXPECT_EQ(parse_error_line([] { parse_tracker_config("n_init 3\n"); }), 1u);
  EXPECT_THROW(parse_tracker_config("lambda_app = 2\n"), std::exception);
}

TEST(TrackerConfig, Overrides) {
  tracking::TrackerParams p;
  apply_tracker_override(p, "n_init=1");
  apply_tracker_override(p, "lambda_app = 1");
  EXPECT_EQ(p.n_init, 1);
  EXPECT_EQ(p.association.lambda_app, 1.0);
  EXPECT_THROW(apply_tracker_override(p, "bogus=1"), ValidationError);
  EXPECT_THROW(apply_tracker_override(p, "n_init"), ValidationError);
  EXPECT_EQ(tracker_config_keys().size(), 10u);
}

TEST(AnchorConfig, RoundTripAndMissingKeys) {
  for (const auto& c : {anchors::AnchorConfig::baseline(), anchors::AnchorConfig::dense()}) {
    const auto back = parse_anchor_config(serialize_anchor_config(c));
    EXPECT_EQ(back.strides, c.strides);
    EXPECT_EQ(back.base_sizes, c.base_sizes);
    EXPECT_EQ(back.aspect_ratios, c.aspect_ratios);
    EXPECT_EQ(back.scales, c.scales);
  }
  EXPECT_THROW(parse_anchor_config("levels = 3,4\n"), std::exception);
}

TEST(Files, RoundTripThroughDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "aerotrack_test_io";
  std::filesystem::create_directories(dir);
  Rng rng(73);
  const auto stream = random_stream(rng, 50);
  write_detections(stream, dir / "d.txt");
  EXPECT_EQ(read_detections(dir / "d.txt"), stream);
  const EmbeddingTable t{3, {1, 2, 3, 4, 5, 6}};
  write_embeddings(t, dir / "e.emb");
  EXPECT_EQ(read_embeddings(dir / "e.emb"), t);
  EXPECT_THROW(read_text_file(dir / "missing.txt"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(Samples, ShippedFilesParse) {
  const std::filesystem::path samples = AEROTRACK_SAMPLES;
  const auto stream = read_detections(samples / "detections.txt");
  const auto table = read_embeddings(samples / "embeddings.emb");
  std::size_t rows = 0;
  for (const auto& f : stream) rows += f.detections.size();
  EXPECT_EQ(rows, table.size());
  EXPECT_FALSE(read_annotations(samples / "gt.txt").empty());
  EXPECT_NO_THROW(read_tracker_config(samples / "tracker.cfg"));
  EXPECT_NO_THROW(read_anchor_config(samples / "anchors_dense.cfg"));
}

}  // namespace
}  // namespace aerotrack::io
