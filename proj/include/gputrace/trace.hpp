// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gputrace/session.hpp"

namespace gputrace {

inline constexpr std::string_view kPreStepLabel = "(pre)";

/// A half-open interval [start_ms, end_ms) owned by one marker.
struct Step {
  std::string label;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  /// True for the "(pre)" step covering samples before the first marker.
  bool implicit = false;

  std::int64_t runtime_ms() const { return end_ms - start_ms; }
  bool contains(std::int64_t t_ms) const { return start_ms <= t_ms && t_ms < end_ms; }

  friend bool operator==(const Step&, const Step&) = default;
};

struct Attribution {
  std::vector<Step> steps;
  std::vector<std::string> diagnostics;
};

/// Each interval between consecutive markers belongs to the earlier marker;
/// the last marker owns [marker, duration). Zero-length steps (duplicate
/// timestamps) are dropped with a diagnostic. Samples before the first marker
/// get an implicit "(pre)" step when there are any. Throws NoMarkers.
Attribution attribute_steps(const Session& session);

struct StepSummary {
  std::string label;
  std::int64_t runtime_ms = 0;
  double runtime_s = 0.0;
  std::optional<std::uint64_t> peak_gpu_mem_bytes;
  std::optional<std::uint64_t> peak_cpu_mem_bytes;
  std::optional<double> mean_gpu_util_pct;
  std::size_t sample_count = 0;

  friend bool operator==(const StepSummary&, const StepSummary&) = default;
};

std::vector<StepSummary> summarize_steps(const Session& session, const std::vector<Step>& steps);
std::vector<StepSummary> summarize_steps(const Session& session);

/// Sum of runtimes in integer milliseconds.
std::int64_t total_runtime_ms(const std::vector<StepSummary>& rows);

/// Largest mem_used over the whole session, if any sample carries one.
std::optional<std::uint64_t> peak_gpu_memory(const Session& session);

inline constexpr std::string_view kStepsCsvHeader =
    "label,runtime_s,peak_gpu_mem_bytes,peak_cpu_mem_bytes,mean_gpu_util_pct,sample_count";

std::string format_steps_csv(const std::vector<StepSummary>& rows);

}  // namespace gputrace
