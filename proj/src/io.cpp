// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "aerotrack/error.hpp"

namespace aerotrack::io {

namespace {

struct Line {
  std::size_t number;
  std::string_view text;
};

// Splits into lines; a final newline does not open an empty record.
std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 1;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({number++, line});
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(sep, start);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

class FieldReader {
 public:
  FieldReader(const std::string& source, const Line& line, std::size_t expected)
      : source_(source), line_(line) {
    if (line.text.empty()) fail("blank line");
    fields_ = split_fields(line.text);
    if (fields_.size() != expected) {
      fail("expected " + std::to_string(expected) + " fields, found " +
           std::to_string(fields_.size()));
    }
  }

  template <typename Int>
  Int integer(std::size_t i, const char* name) {
    Int value{};
    const std::string_view f = fields_[i];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
      fail(std::string(name) + " is not an integer: '" + std::string(f) + "'");
    }
    return value;
  }

  double real(std::size_t i, const char* name) {
    double value = 0.0;
    const std::string_view f = fields_[i];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(value)) {
      fail(std::string(name) + " is not a finite number: '" + std::string(f) + "'");
    }
    return value;
  }

  BoundingBox box(std::size_t first) {
    BoundingBox b{real(first, "left"), real(first + 1, "top"), real(first + 2, "width"),
                  real(first + 3, "height")};
    if (!(b.width > 0.0) || !(b.height > 0.0)) fail("width and height must be positive");
    return b;
  }

  std::string_view raw(std::size_t i) const { return fields_[i]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, line_.number, what);
  }

 private:
  const std::string& source_;
  const Line& line_;
  std::vector<std::string_view> fields_;
};

template <typename Int>
std::string format_int(Int value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void append_box(std::string& out, const BoundingBox& box) {
  out += format_number(box.left);
  out += ',';
  out += format_number(box.top);
  out += ',';
  out += format_number(box.width);
  out += ',';
  out += format_number(box.height);
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Key-value files: returns (line, key, value) for every non-comment line.
struct Entry {
  std::size_t line;
  std::string key;
  std::string_view value;
};

std::vector<Entry> parse_key_values(std::string_view text, const std::string& source) {
  std::vector<Entry> entries;
  std::set<std::string> seen;
  for (const Line& line : split_lines(text)) {
    std::string_view body = line.text;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line.number, "expected key = value");
    std::string key(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line.number, "empty key");
    if (value.empty()) throw ParseError(source, line.number, "empty value for '" + key + "'");
    if (!seen.insert(key).second) {
      throw ParseError(source, line.number, "duplicate key '" + key + "'");
    }
    entries.push_back({line.number, std::move(key), value});
  }
  return entries;
}

template <typename T>
T parse_value(std::string_view text, const std::string& key) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  bool ok = ec == std::errc() && ptr == text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) ok = ok && std::isfinite(value);
  if (!ok) throw ValidationError("bad value for '" + key + "': '" + std::string(text) + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, const std::string& key) {
  std::vector<T> out;
  for (const std::string_view item : split_fields(text)) out.push_back(parse_value<T>(trim(item), key));
  return out;
}

using Setter = std::function<void(tracking::TrackerParams&, std::string_view, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& tracker_setters() {
  using P = tracking::TrackerParams;
  static const std::vector<std::pair<std::string, Setter>> setters = {
      {"n_init", [](P& p, std::string_view v, const std::string& k) { p.n_init = parse_value<int>(v, k); }},
      {"max_age", [](P& p, std::string_view v, const std::string& k) { p.max_age = parse_value<int>(v, k); }},
      {"gallery_budget",
       [](P& p, std::string_view v, const std::string& k) { p.gallery_budget = parse_value<std::size_t>(v, k); }},
      {"confidence_floor",
       [](P& p, std::string_view v, const std::string& k) { p.confidence_floor = parse_value<double>(v, k); }},
      {"lambda_app",
       [](P& p, std::string_view v, const std::string& k) { p.association.lambda_app = parse_value<double>(v, k); }},
      {"gate_threshold",
       [](P& p, std::string_view v, const std::string& k) { p.association.gate_threshold = parse_value<double>(v, k); }},
      {"max_app_distance",
       [](P& p, std::string_view v, const std::string& k) { p.association.max_app_distance = parse_value<double>(v, k); }},
      {"max_iou_distance",
       [](P& p, std::string_view v, const std::string& k) { p.association.max_iou_distance = parse_value<double>(v, k); }},
      {"std_weight_position",
       [](P& p, std::string_view v, const std::string& k) { p.motion.std_weight_position = parse_value<double>(v, k); }},
      {"std_weight_velocity",
       [](P& p, std::string_view v, const std::string& k) { p.motion.std_weight_velocity = parse_value<double>(v, k); }},
  };
  return setters;
}

void set_tracker_key(tracking::TrackerParams& params, const std::string& key, std::string_view value) {
  for (const auto& [name, setter] : tracker_setters()) {
    if (name == key) {
      setter(params, value, key);
      return;
    }
  }
  std::string valid;
  for (const auto& name : tracker_config_keys()) valid += (valid.empty() ? "" : ", ") + name;
  throw ValidationError("unknown config key '" + key + "' (valid keys: " + valid + ")");
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

// --- detections ------------------------------------------------------------

DetectionStream parse_detections(std::string_view text, const std::string& source) {
  std::map<FrameId, std::vector<Detection>> frames;
  std::size_t index = 0;
  for (const Line& line : split_lines(text)) {
    FieldReader r(source, line, 7);
    Detection det;
    det.frame_id = r.integer<FrameId>(0, "frame");
    if (det.frame_id < 0) r.fail("frame must be nonnegative");
    det.box = r.box(1);
    det.confidence = r.real(5, "score");
    if (det.confidence < 0.0 || det.confidence > 1.0) r.fail("score must lie in [0, 1]");
    det.class_id = r.integer<int>(6, "class");
    det.embedding_ref = index++;
    frames[det.frame_id].push_back(det);
  }
  DetectionStream stream;
  for (auto& [frame, dets] : frames) stream.push_back({frame, std::move(dets)});
  return stream;
}

std::string serialize_detections(const DetectionStream& stream) {
  std::string out;
  for (const auto& frame : stream) {
    for (const auto& det : frame.detections) {
      out += format_int(det.frame_id);
      out += ',';
      append_box(out, det.box);
      out += ',';
      out += format_number(det.confidence);
      out += ',';
      out += format_int(det.class_id);
      out += '\n';
    }
  }
  return out;
}

DetectionStream read_detections(const std::filesystem::path& path) {
  return parse_detections(read_text_file(path), path.string());
}

void write_detections(const DetectionStream& stream, const std::filesystem::path& path) {
  write_file(path, serialize_detections(stream));
}

// --- annotations -----------------------------------------------------------

std::vector<AnnotationRecord> parse_annotations(std::string_view text, const std::string& source) {
  std::vector<AnnotationRecord> records;
  for (const Line& line : split_lines(text)) {
    FieldReader r(source, line, 10);
    AnnotationRecord rec;
    rec.frame = r.integer<FrameId>(0, "frame");
    if (rec.frame < 0) r.fail("frame must be nonnegative");
    rec.target_id = r.integer<std::int64_t>(1, "target_id");
    rec.box = r.box(2);
    rec.score = r.real(6, "score");
    rec.category = r.integer<int>(7, "object_category");
    if (rec.category < visdrone::kIgnoredRegion || rec.category > visdrone::kOthers) {
      r.fail("object_category must lie in [0, 11]");
    }
    rec.truncation = r.integer<int>(8, "truncation");
    rec.occlusion = r.integer<int>(9, "occlusion");
    records.push_back(rec);
  }
  return records;
}

std::string serialize_annotations(std::span<const AnnotationRecord> records) {
  std::string out;
  for (const auto& rec : records) {
    out += format_int(rec.frame);
    out += ',';
    out += format_int(rec.target_id);
    out += ',';
    append_box(out, rec.box);
    out += ',';
    out += format_number(rec.score);
    out += ',';
    out += format_int(rec.category);
    out += ',';
    out += format_int(rec.truncation);
    out += ',';
    out += format_int(rec.occlusion);
    out += '\n';
  }
  return out;
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_text_file(path), path.string());
}

void write_annotations(std::span<const AnnotationRecord> records, const std::filesystem::path& path) {
  write_file(path, serialize_annotations(records));
}

eval::DetectionGroundTruth to_detection_ground_truth(std::span<const AnnotationRecord> records) {
  eval::DetectionGroundTruth gt;
  for (const auto& rec : records) {
    if (rec.category == visdrone::kIgnoredRegion) {
      gt.ignore_regions.push_back({rec.frame, rec.box});
    } else if (visdrone::is_object_class(rec.category)) {
      gt.boxes.push_back({rec.frame, rec.box, rec.category});
    }
  }
  return gt;
}

tracking::TrackletOutput to_gt_tracklets(std::span<const AnnotationRecord> records) {
  tracking::TrackletOutput rows;
  for (const auto& rec : records) {
    if (!visdrone::is_object_class(rec.category)) continue;
    rows.push_back({rec.frame, rec.target_id, rec.box, rec.category, 1.0});
  }
  return rows;
}

// --- tracker output --------------------------------------------------------

tracking::TrackletOutput parse_tracks(std::string_view text, const std::string& source) {
  tracking::TrackletOutput rows;
  for (const Line& line : split_lines(text)) {
    FieldReader r(source, line, 10);
    tracking::TrackletRow row;
    row.frame = r.integer<FrameId>(0, "frame");
    if (row.frame < 0) r.fail("frame must be nonnegative");
    row.track_id = r.integer<tracking::TrackId>(1, "track_id");
    row.box = r.box(2);
    row.confidence = r.real(6, "confidence");
    if (row.confidence < 0.0 || row.confidence > 1.0) r.fail("confidence must lie in [0, 1]");
    row.class_id = r.integer<int>(7, "class");
    if (r.raw(8) != "-1" || r.raw(9) != "-1") r.fail("the last two fields must be -1");
    rows.push_back(row);
  }
  return rows;
}

std::string serialize_tracks(std::span<const tracking::TrackletRow> rows) {
  std::string out;
  for (const auto& row : rows) {
    out += format_int(row.frame);
    out += ',';
    out += format_int(row.track_id);
    out += ',';
    append_box(out, row.box);
    out += ',';
    out += format_number(row.confidence);
    out += ',';
    out += format_int(row.class_id);
    out += ",-1,-1\n";
  }
  return out;
}

tracking::TrackletOutput read_tracks(const std::filesystem::path& path) {
  return parse_tracks(read_text_file(path), path.string());
}

void write_tracks(std::span<const tracking::TrackletRow> rows, const std::filesystem::path& path) {
  write_file(path, serialize_tracks(rows));
}

// --- embeddings ------------------------------------------------------------

EmbeddingTable decode_embeddings(std::span<const unsigned char> bytes, const std::string& source) {
  using Kind = EmbeddingFormatError::Kind;
  if (bytes.size() < kEmbeddingHeaderSize) {
    throw EmbeddingFormatError(Kind::kTruncated, source + ": file is shorter than the 16-byte header");
  }
  if (!std::equal(bytes.begin(), bytes.begin() + 4, kEmbeddingMagic)) {
    throw EmbeddingFormatError(Kind::kBadMagic, source + ": not an embedding file (bad magic)");
  }
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kEmbeddingVersion) {
    throw EmbeddingFormatError(Kind::kUnsupportedVersion,
                               source + ": unsupported version " + std::to_string(version));
  }
  const std::uint32_t dim = get_u32(bytes.data() + 8);
  const std::uint32_t count = get_u32(bytes.data() + 12);
  if (dim == 0) throw EmbeddingFormatError(Kind::kZeroDimension, source + ": dimension is 0");
  const std::uint64_t values = static_cast<std::uint64_t>(dim) * count;
  const std::uint64_t expected = kEmbeddingHeaderSize + values * 4;
  if (bytes.size() < expected) {
    throw EmbeddingFormatError(Kind::kTruncated,
                               source + ": header declares " + std::to_string(count) + " rows of " +
                                   std::to_string(dim) + " but the payload is " +
                                   std::to_string(bytes.size() - kEmbeddingHeaderSize) + " bytes");
  }
  if (bytes.size() > expected) {
    throw EmbeddingFormatError(Kind::kTrailingBytes,
                               source + ": " + std::to_string(bytes.size() - expected) +
                                   " bytes past the declared payload");
  }
  EmbeddingTable table;
  table.dim = dim;
  table.data.resize(values);
  const unsigned char* p = bytes.data() + kEmbeddingHeaderSize;
  for (std::uint64_t i = 0; i < values; ++i, p += 4) {
    table.data[i] = std::bit_cast<float>(get_u32(p));
  }
  return table;
}

std::vector<unsigned char> encode_embeddings(const EmbeddingTable& table) {
  if (table.dim == 0) throw ValidationError("embedding dimension must be positive");
  if (table.data.size() % table.dim != 0) {
    throw ValidationError("embedding data is not a whole number of rows");
  }
  if (table.dim > UINT32_MAX || table.size() > UINT32_MAX) {
    throw ValidationError("embedding table is too large for the file format");
  }
  std::vector<unsigned char> out(kEmbeddingMagic, kEmbeddingMagic + 4);
  out.reserve(kEmbeddingHeaderSize + table.data.size() * 4);
  put_u32(out, kEmbeddingVersion);
  put_u32(out, static_cast<std::uint32_t>(table.dim));
  put_u32(out, static_cast<std::uint32_t>(table.size()));
  for (const float v : table.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_binary_file(path), path.string());
}

void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  const auto bytes = encode_embeddings(table);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

// --- configuration ---------------------------------------------------------

std::vector<std::string> tracker_config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, setter] : tracker_setters()) keys.push_back(name);
  return keys;
}

tracking::TrackerParams parse_tracker_config(std::string_view text, const std::string& source) {
  tracking::TrackerParams params;
  for (const Entry& e : parse_key_values(text, source)) {
    try {
      set_tracker_key(params, e.key, e.value);
    } catch (const ValidationError& err) {
      throw ParseError(source, e.line, err.what());
    }
  }
  params.validate();
  return params;
}

std::string serialize_tracker_config(const tracking::TrackerParams& p) {
  std::ostringstream out;
  out << "n_init = " << p.n_init << '\n'
      << "max_age = " << p.max_age << '\n'
      << "gallery_budget = " << p.gallery_budget << '\n'
      << "confidence_floor = " << format_number(p.confidence_floor) << '\n'
      << "lambda_app = " << format_number(p.association.lambda_app) << '\n'
      << "gate_threshold = " << format_number(p.association.gate_threshold) << '\n'
      << "max_app_distance = " << format_number(p.association.max_app_distance) << '\n'
      << "max_iou_distance = " << format_number(p.association.max_iou_distance) << '\n'
      << "std_weight_position = " << format_number(p.motion.std_weight_position) << '\n'
      << "std_weight_velocity = " << format_number(p.motion.std_weight_velocity) << '\n';
  return out.str();
}

tracking::TrackerParams read_tracker_config(const std::filesystem::path& path) {
  return parse_tracker_config(read_text_file(path), path.string());
}

void apply_tracker_override(tracking::TrackerParams& params, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ValidationError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(trim(assignment.substr(0, eq)));
  const std::string_view value = trim(assignment.substr(eq + 1));
  if (value.empty()) throw ValidationError("empty value for '" + key + "'");
  set_tracker_key(params, key, value);
  params.validate();
}

anchors::AnchorConfig parse_anchor_config(std::string_view text, const std::string& source) {
  anchors::AnchorConfig config;
  std::set<std::string> present;
  for (const Entry& e : parse_key_values(text, source)) {
    try {
      if (e.key == "levels") {
        config.levels = parse_list<int>(e.value, e.key);
      } else if (e.key == "strides") {
        config.strides = parse_list<double>(e.value, e.key);
      } else if (e.key == "base_sizes") {
        config.base_sizes = parse_list<double>(e.value, e.key);
      } else if (e.key == "aspect_ratios") {
        config.aspect_ratios = parse_list<double>(e.value, e.key);
      } else if (e.key == "scales") {
        config.scales = parse_list<double>(e.value, e.key);
      } else {
        throw ValidationError("unknown anchor key '" + e.key +
                              "' (valid keys: levels, strides, base_sizes, aspect_ratios, scales)");
      }
    } catch (const ValidationError& err) {
      throw ParseError(source, e.line, err.what());
    }
    present.insert(e.key);
  }
  for (const char* key : {"levels", "strides", "base_sizes", "aspect_ratios", "scales"}) {
    if (!present.count(key)) throw ParseError(source, 0, std::string("missing key '") + key + "'");
  }
  config.validate();
  return config;
}

std::string serialize_anchor_config(const anchors::AnchorConfig& config) {
  auto join = [](const auto& values) {
    std::string s;
    for (const auto& v : values) {
      if (!s.empty()) s += ',';
      if constexpr (std::is_integral_v<std::decay_t<decltype(v)>>) {
        s += format_int(v);
      } else {
        s += format_number(v);
      }
    }
    return s;
  };
  return "levels = " + join(config.levels) + "\nstrides = " + join(config.strides) +
         "\nbase_sizes = " + join(config.base_sizes) + "\naspect_ratios = " +
         join(config.aspect_ratios) + "\nscales = " + join(config.scales) + "\n";
}

anchors::AnchorConfig read_anchor_config(const std::filesystem::path& path) {
  return parse_anchor_config(read_text_file(path), path.string());
}

// --- files -----------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<unsigned char> read_binary_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return std::vector<unsigned char>(text.begin(), text.end());
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace aerotrack::io
