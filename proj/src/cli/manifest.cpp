// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "aerotrack/cli.hpp"
#include "aerotrack/detection.hpp"
#include "aerotrack/io.hpp"

namespace aerotrack::cli {

std::string tool_version() { return AEROTRACK_VERSION; }

std::string sha256_hex(std::span<const unsigned char> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string file_sha256(const std::filesystem::path& path) {
  return sha256_hex(io::read_binary_file(path));
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), file_sha256(path));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "aerotrack";
  j["version"] = tool_version();
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [path, digest] : inputs) {
    j["inputs"].push_back({{"path", path}, {"sha256", digest}});
  }
  j["outputs"] = outputs;
  j["wall_seconds"] = wall_seconds;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  io::write_file(path, to_json().dump(2) + "\n");
}

namespace {

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%6.2f", 100.0 * fraction);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string threshold_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "AP@%.2f", t);
  return buf;
}

}  // namespace

nlohmann::json report_json(const eval::MetricsReport& report) {
  nlohmann::json j;
  j["ap"] = report.ap;
  j["ap_per_threshold"] = nlohmann::json::object();
  for (std::size_t i = 0; i < report.iou_thresholds.size(); ++i) {
    j["ap_per_threshold"][io::format_number(report.iou_thresholds[i])] = report.ap_per_threshold[i];
  }
  j["per_class_ap"] = nlohmann::json::object();
  for (const auto& [cls, ap] : report.per_class_ap) {
    j["per_class_ap"][visdrone::category_name(cls)] = ap ? nlohmann::json(*ap) : nlohmann::json();
  }
  if (!report.ar.empty()) {
    j["ar"] = nlohmann::json::object();
    for (const auto& [k, ar] : report.ar) j["ar"][std::to_string(k)] = ar;
  }
  return j;
}

std::string report_text(const eval::MetricsReport& report, const std::string& title) {
  std::ostringstream out;
  out << title << " (percent)\n";
  out << "  " << pad("AP", 14) << percent(report.ap) << "\n";
  for (std::size_t i = 0; i < report.iou_thresholds.size(); ++i) {
    const double t = report.iou_thresholds[i];
    const bool headline = report.iou_thresholds.size() <= 3 || std::abs(t - 0.5) < 1e-9 ||
                          std::abs(t - 0.75) < 1e-9;
    if (headline) out << "  " << pad(threshold_label(t), 14) << percent(report.ap_per_threshold[i]) << "\n";
  }
  for (const auto& [k, ar] : report.ar) {
    out << "  " << pad("AR@" + std::to_string(k), 14) << percent(ar) << "\n";
  }
  out << "  per-class AP\n";
  for (const auto& [cls, ap] : report.per_class_ap) {
    out << "    " << pad(visdrone::category_name(cls), 16) << (ap ? percent(*ap) : "   n/a") << "\n";
  }
  return out.str();
}

nlohmann::json coverage_json(const anchors::CoverageStats& stats) {
  nlohmann::json j;
  j["anchors_per_image"] = stats.anchor_count;
  j["gt_boxes"] = stats.total;
  j["covered"] = stats.covered;
  j["coverage"] = stats.coverage() ? nlohmann::json(*stats.coverage()) : nlohmann::json();
  j["buckets"] = nlohmann::json::array();
  for (const auto& b : stats.buckets) {
    j["buckets"].push_back({{"label", b.label},
                            {"total", b.total},
                            {"covered", b.covered},
                            {"coverage", b.coverage() ? nlohmann::json(*b.coverage()) : nlohmann::json()}});
  }
  j["best_iou_histogram"] = stats.best_iou_histogram;
  return j;
}

std::string coverage_text(const anchors::CoverageStats& stats, const std::string& title) {
  std::ostringstream out;
  auto fmt = [](const std::optional<double>& c) {
    if (!c) return std::string("   n/a");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%6.4f", *c);
    return std::string(buf);
  };
  out << title << "\n";
  out << "  anchors per image  " << stats.anchor_count << "\n";
  out << "  gt boxes           " << stats.total << "\n";
  out << "  coverage           " << fmt(stats.coverage()) << "\n";
  out << "  by size (sqrt area)\n";
  for (const auto& b : stats.buckets) {
    out << "    " << pad(b.label, 10) << fmt(b.coverage()) << "  (" << b.covered << "/" << b.total
        << ")\n";
  }
  out << "  best-IoU histogram\n";
  for (std::size_t i = 0; i < stats.best_iou_histogram.size(); ++i) {
    char label[32];
    std::snprintf(label, sizeof(label), "[%.1f, %.1f%c", i / 10.0, (i + 1) / 10.0,
                  i + 1 == stats.best_iou_histogram.size() ? ']' : ')');
    out << "    " << pad(label, 12) << stats.best_iou_histogram[i] << "\n";
  }
  return out.str();
}

}  // namespace aerotrack::cli
