// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gputrace/device.hpp"
#include "gputrace/procmon.hpp"

namespace gputrace {

// On-disk layout of a session directory.
namespace format {

inline constexpr int kSchemaVersion = 1;

inline constexpr std::string_view kMetricsFile = "metrics.csv";
inline constexpr std::string_view kEventsFile = "events.csv";
inline constexpr std::string_view kProcessFile = "process.csv";
inline constexpr std::string_view kMetaFile = "session.meta";
inline constexpr std::string_view kMarkControlFile = "marks.ctl";

inline constexpr std::string_view kMetricsHeader =
    "elapsed_ms,device_index,gpu_util_pct,mem_used_bytes,mem_total_bytes,temperature_c,power_mw";
inline constexpr std::string_view kEventsHeader = "elapsed_ms,label";
inline constexpr std::string_view kProcessHeader = "elapsed_ms,cpu_pct,rss_bytes";

inline constexpr std::string_view kSessionDirEnv = "GPUTRACE_SESSION_DIR";
inline constexpr std::string_view kMarkFileEnv = "GPUTRACE_MARK_FILE";

}  // namespace format

/// One metrics row. Absent fields mark a tick whose read failed.
struct Sample {
  std::int64_t elapsed_ms = 0;
  unsigned device_index = 0;
  std::optional<std::uint32_t> gpu_util_pct;
  std::optional<std::uint64_t> mem_used_bytes;
  std::optional<std::uint64_t> mem_total_bytes;
  std::optional<std::int32_t> temperature_c;
  std::optional<std::uint32_t> power_mw;

  static Sample from_reading(std::int64_t elapsed_ms, unsigned device_index,
                             const InstantReading& reading);
  static Sample gap(std::int64_t elapsed_ms, unsigned device_index);

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct EventMarker {
  std::int64_t elapsed_ms = 0;
  std::string label;

  friend bool operator==(const EventMarker&, const EventMarker&) = default;
};

struct TracePaths {
  std::filesystem::path metrics_csv;
  std::filesystem::path events_csv;
  std::optional<std::filesystem::path> process_csv;
  std::filesystem::path meta_file;

  static TracePaths in(const std::filesystem::path& dir, bool with_process = false);

  friend bool operator==(const TracePaths&, const TracePaths&) = default;
};

/// Contents of the `key=value` meta file, in the order keys are written.
struct SessionMeta {
  int schema_version = format::kSchemaVersion;
  std::string start_wall_utc;
  std::string stop_wall_utc;
  double period_s = 1.0;
  DeviceInfo device;
  std::optional<std::int64_t> duration_ms;  // unset while still recording
  std::optional<int> child_exit_status;
  std::vector<std::string> diagnostics;

  friend bool operator==(const SessionMeta&, const SessionMeta&) = default;
};

struct Session {
  SessionMeta meta;
  std::vector<Sample> samples;
  std::vector<EventMarker> markers;
  std::optional<std::vector<ProcSample>> process;
  TracePaths paths;
  /// Rows dropped in lenient mode, one line each.
  std::vector<std::string> parse_diagnostics;

  const DeviceInfo& device() const { return meta.device; }
  std::int64_t duration_ms() const { return meta.duration_ms.value_or(0); }
};

struct ParseOptions {
  /// Skip and tally corrupt rows instead of failing on the first one.
  bool lenient = false;
};

/// Loads a session directory. Throws MissingFile, SchemaMismatch or
/// CorruptRow (strict mode).
Session parse_session(const std::filesystem::path& dir, const ParseOptions& options = {});

/// Writes the session files into `dir` (created if needed).
TracePaths write_session(const Session& session, const std::filesystem::path& dir);

// Row-level serialisation shared by the live sampler and write_session().
std::string format_sample_row(const Sample& sample);
std::string format_event_row(const EventMarker& marker);
std::string format_process_row(const ProcSample& sample);
std::string format_meta(const SessionMeta& meta);

/// ISO-8601 UTC with milliseconds, e.g. 2026-10-18T09:30:00.000Z.
std::string format_utc(std::chrono::system_clock::time_point t);

/// Labels must be non-empty and free of line breaks.
void validate_label(std::string_view label);

}  // namespace gputrace
