// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aerotrack/anchors.hpp"
#include "aerotrack/eval.hpp"

namespace aerotrack::cli {

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (`args` excludes the program name).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string tool_version();

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Written next to every output so a run can be reproduced.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  /// (path, sha256) of each input.
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;

  void add_input(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

nlohmann::json report_json(const eval::MetricsReport& report);
std::string report_text(const eval::MetricsReport& report, const std::string& title);

nlohmann::json coverage_json(const anchors::CoverageStats& stats);
std::string coverage_text(const anchors::CoverageStats& stats, const std::string& title);

}  // namespace aerotrack::cli
