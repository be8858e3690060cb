// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sys/types.h>

#include <cstdint>
#include <optional>
#include <stop_token>
#include <string_view>
#include <vector>

#include "gputrace/clock.hpp"

namespace gputrace {

/// CPU-side reading for one monitored process.
struct ProcSample {
  double elapsed_s = 0.0;  // since monitoring start
  double cpu_pct = 0.0;    // may exceed 100 on multicore
  std::uint64_t rss = 0;   // bytes

  friend bool operator==(const ProcSample&, const ProcSample&) = default;
};

struct TopParseOptions {
  double interval_s = 1.0;
  /// Row to pick when a snapshot lists several processes. Unset: the first
  /// process row of each snapshot.
  std::optional<long> pid;
  /// Ordinal assigned to the first snapshot; lets callers stitch logs.
  std::size_t first_ordinal = 0;
};

struct TopParseResult {
  std::vector<ProcSample> samples;
  std::size_t snapshots = 0;
  /// Snapshots dropped because the process row was missing or unparseable.
  std::size_t skipped = 0;
};

/// Parses the output of `top -p PID -b -d <interval>`. Snapshots start at
/// lines beginning with "top - "; columns are located by name in the
/// "PID USER ... COMMAND" header. The snapshot's elapsed time is its ordinal
/// times the interval. RES values accept KiB (bare), m, g and t suffixes.
TopParseResult parse_top_batch(std::string_view text, const TopParseOptions& options = {});

/// Parses one `top` memory field into bytes (bare number = KiB).
std::optional<std::uint64_t> parse_top_memory(std::string_view field);

/// Samples /proc for `pid` every `period_s` until `stop` is requested or the
/// process exits (zombies count as exited). cpu_pct is the CPU time consumed
/// since the previous tick over the wall time since that tick; the first tick
/// reports 0. Elapsed times come from `clock` when given, else from a clock
/// started on entry. Throws NoSuchProcess if `pid` is absent at start.
std::vector<ProcSample> sample_process(pid_t pid, double period_s, std::stop_token stop,
                                       Clock* clock = nullptr);

/// Largest rss in the series; 0 when empty.
std::uint64_t peak_rss(const std::vector<ProcSample>& series);

}  // namespace gputrace
