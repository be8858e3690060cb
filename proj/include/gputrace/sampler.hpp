// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gputrace/clock.hpp"
#include "gputrace/device.hpp"
#include "gputrace/session.hpp"

namespace gputrace {

struct SamplerConfig {
  double period_s = 1.0;
  unsigned device_index = 0;
  /// Session directory; created if missing, must not already hold a session.
  std::filesystem::path output_dir;
};

/// Throws InvalidArgument unless period_s >= 1 ms.
void validate(const SamplerConfig& config);

/// A running (or stopped) sampling session.
///
/// A poller thread reads the device at t0 + k*period on the session clock and
/// appends one metrics row per tick; the first tick is taken at t0. Late ticks
/// are taken immediately and the schedule continues on the original grid. A
/// failed read still produces a row, with the metric fields left empty.
/// mark() may be called from any thread; rows are ordered by receipt.
class SamplerHandle {
 public:
  SamplerHandle(SamplerHandle&&) noexcept;
  SamplerHandle& operator=(SamplerHandle&&) noexcept;
  ~SamplerHandle();  // stops if still running

  void mark(std::string_view label);

  /// Joins the poller, flushes and closes the files, and finalises the meta
  /// file. Idempotent.
  TracePaths stop();

  bool running() const;
  const std::filesystem::path& session_dir() const;
  std::chrono::system_clock::time_point start_wall_time() const;
  std::chrono::nanoseconds elapsed() const;

  /// Stored in the meta file at stop().
  void set_child_exit_status(int status);
  void add_diagnostic(std::string message);

 private:
  friend SamplerHandle start(const SamplerConfig&, std::shared_ptr<DeviceBackend>,
                             std::shared_ptr<Clock>);
  struct State;
  explicit SamplerHandle(std::unique_ptr<State> state);

  std::unique_ptr<State> state_;
};

/// Starts sampling. Throws InvalidArgument, UnknownDevice, OutputNotWritable or
/// BackendUnavailable. Without a clock the session runs on real time.
SamplerHandle start(const SamplerConfig& config, std::shared_ptr<DeviceBackend> backend,
                    std::shared_ptr<Clock> clock = nullptr);

struct RecordOptions {
  /// Also sample the child's CPU% and RSS into process.csv.
  bool monitor_process = true;
  /// How often the marker control file is polled.
  std::chrono::milliseconds mark_poll{20};
};

struct RecordResult {
  TracePaths paths;
  int exit_status = 0;  // 128 + signal for signalled children
};

/// Runs `argv` as a child under a sampler. The child sees GPUTRACE_SESSION_DIR
/// and GPUTRACE_MARK_FILE; labels it appends to the mark file (one per line)
/// become markers. A nonzero child exit is recorded, not raised. Throws
/// InvalidArgument for an empty argv and SpawnFailure if the child cannot be
/// started.
RecordResult record_command(const SamplerConfig& config, const std::vector<std::string>& argv,
                            std::shared_ptr<DeviceBackend> backend,
                            std::shared_ptr<Clock> clock = nullptr,
                            const RecordOptions& options = {});

/// Appends `label` to the marker control file of the session named by the
/// environment (GPUTRACE_MARK_FILE, else GPUTRACE_SESSION_DIR/marks.ctl).
void append_mark(std::string_view label);
void append_mark(const std::filesystem::path& control_file, std::string_view label);

/// Writes a complete synthetic session for a profile script: ticks at
/// k*period for every k*period < total duration, readings evaluated from the
/// profile, the scripted marks, and duration = total profile duration. The
/// wall-clock anchor is the Unix epoch so output is byte-reproducible.
TracePaths simulate_session(const ProfileScript& script, const std::filesystem::path& out_dir,
                            double period_s = 1.0);

}  // namespace gputrace
