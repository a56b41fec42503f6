// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aerotrack/anchors.hpp"
#include "aerotrack/detection.hpp"
#include "aerotrack/embedding_table.hpp"
#include "aerotrack/eval.hpp"
#include "aerotrack/tracker.hpp"

// Text formats are comma separated, one record per line, LF line endings (a
// trailing CR is tolerated on input). Reals are written in the shortest form
// that reads back to the same double, so serialize(parse(text)) == text for
// any text this library wrote.
namespace aerotrack::io {

// ---------------------------------------------------------------------------
// Detections: `frame,x,y,w,h,score,class`

/// Groups records by frame (ascending), keeping file order within a frame.
/// Record i of the file gets embedding_ref i.
DetectionStream parse_detections(std::string_view text, const std::string& source = "<detections>");
std::string serialize_detections(const DetectionStream& stream);
DetectionStream read_detections(const std::filesystem::path& path);
void write_detections(const DetectionStream& stream, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// VisDrone MOT annotations:
// `frame,target_id,bbox_left,bbox_top,bbox_width,bbox_height,score,object_category,truncation,occlusion`

struct AnnotationRecord {
  FrameId frame = 0;
  std::int64_t target_id = 0;
  BoundingBox box;
  double score = 1.0;
  int category = 0;
  int truncation = 0;
  int occlusion = 0;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

std::vector<AnnotationRecord> parse_annotations(std::string_view text,
                                                const std::string& source = "<annotations>");
std::string serialize_annotations(std::span<const AnnotationRecord> records);
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);
void write_annotations(std::span<const AnnotationRecord> records, const std::filesystem::path& path);

/// Object classes become gt boxes keyed by frame; category 0 rows become
/// ignore regions; category 11 rows are dropped.
eval::DetectionGroundTruth to_detection_ground_truth(std::span<const AnnotationRecord> records);

/// Object-class rows as gt tracklets keyed by target id, confidence 1.
tracking::TrackletOutput to_gt_tracklets(std::span<const AnnotationRecord> records);

// ---------------------------------------------------------------------------
// Tracker output: `frame,track_id,x,y,w,h,confidence,class,-1,-1`

tracking::TrackletOutput parse_tracks(std::string_view text, const std::string& source = "<tracks>");
std::string serialize_tracks(std::span<const tracking::TrackletRow> rows);
tracking::TrackletOutput read_tracks(const std::filesystem::path& path);
void write_tracks(std::span<const tracking::TrackletRow> rows, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Embeddings: 16-byte header (magic "AEMB", version, D, N as little-endian
// u32) followed by N*D little-endian float32.

inline constexpr char kEmbeddingMagic[4] = {'A', 'E', 'M', 'B'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderSize = 16;

class EmbeddingFormatError : public std::runtime_error {
 public:
  enum class Kind { kBadMagic, kUnsupportedVersion, kZeroDimension, kTruncated, kTrailingBytes };

  EmbeddingFormatError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

EmbeddingTable decode_embeddings(std::span<const unsigned char> bytes,
                                 const std::string& source = "<embeddings>");
std::vector<unsigned char> encode_embeddings(const EmbeddingTable& table);
EmbeddingTable read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Key-value configuration: `key = value` per line, `#` starts a comment.

tracking::TrackerParams parse_tracker_config(std::string_view text,
                                             const std::string& source = "<config>");
std::string serialize_tracker_config(const tracking::TrackerParams& params);
tracking::TrackerParams read_tracker_config(const std::filesystem::path& path);
/// Applies one `key=value` override; same keys as the file format.
void apply_tracker_override(tracking::TrackerParams& params, std::string_view assignment);
std::vector<std::string> tracker_config_keys();

/// Keys levels, strides, base_sizes, aspect_ratios, scales; each a comma list.
anchors::AnchorConfig parse_anchor_config(std::string_view text,
                                          const std::string& source = "<anchors>");
std::string serialize_anchor_config(const anchors::AnchorConfig& config);
anchors::AnchorConfig read_anchor_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
std::vector<unsigned char> read_binary_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Shortest round-trip text for a double.
std::string format_number(double value);

}  // namespace aerotrack::io
