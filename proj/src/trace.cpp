// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/trace.hpp"

#include <algorithm>
#include <cmath>

#include "gputrace/error.hpp"
#include "gputrace/text.hpp"

namespace gputrace {

Attribution attribute_steps(const Session& session) {
  const auto& markers = session.markers;
  if (markers.empty()) {
    throw Error(ErrorKind::NoMarkers, "session has no event markers to attribute steps to");
  }
  Attribution out;
  const auto first = markers.front().elapsed_ms;
  const bool has_pre = std::any_of(session.samples.begin(), session.samples.end(),
                                   [first](const Sample& s) { return s.elapsed_ms < first; });
  if (has_pre) out.steps.push_back({std::string(kPreStepLabel), 0, first, true});

  const auto duration = session.duration_ms();
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const auto start = markers[i].elapsed_ms;
    const auto end = i + 1 < markers.size() ? markers[i + 1].elapsed_ms : duration;
    if (end <= start) {
      out.diagnostics.push_back("zero-length step '" + markers[i].label + "' at " +
                                std::to_string(start) + " ms dropped");
      continue;
    }
    out.steps.push_back({markers[i].label, start, end, false});
  }
  return out;
}

std::vector<StepSummary> summarize_steps(const Session& session, const std::vector<Step>& steps) {
  std::vector<StepSummary> rows;
  rows.reserve(steps.size());
  for (const auto& step : steps) {
    StepSummary row;
    row.label = step.label;
    row.runtime_ms = step.runtime_ms();
    row.runtime_s = static_cast<double>(row.runtime_ms) / 1000.0;

    double util_sum = 0.0;
    std::size_t util_n = 0;
    // Samples are sorted; only the window needs scanning.
    auto it = std::lower_bound(session.samples.begin(), session.samples.end(), step.start_ms,
                               [](const Sample& s, std::int64_t t) { return s.elapsed_ms < t; });
    for (; it != session.samples.end() && it->elapsed_ms < step.end_ms; ++it) {
      ++row.sample_count;
      if (it->mem_used_bytes) {
        row.peak_gpu_mem_bytes = std::max(row.peak_gpu_mem_bytes.value_or(0), *it->mem_used_bytes);
      }
      if (it->gpu_util_pct) {
        util_sum += *it->gpu_util_pct;
        ++util_n;
      }
    }
    if (util_n > 0) row.mean_gpu_util_pct = util_sum / static_cast<double>(util_n);

    if (session.process) {
      for (const auto& p : *session.process) {
        if (step.contains(std::llround(p.elapsed_s * 1000.0))) {
          row.peak_cpu_mem_bytes = std::max(row.peak_cpu_mem_bytes.value_or(0), p.rss);
        }
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<StepSummary> summarize_steps(const Session& session) {
  return summarize_steps(session, attribute_steps(session).steps);
}

std::int64_t total_runtime_ms(const std::vector<StepSummary>& rows) {
  std::int64_t total = 0;
  for (const auto& r : rows) total += r.runtime_ms;
  return total;
}

std::optional<std::uint64_t> peak_gpu_memory(const Session& session) {
  std::optional<std::uint64_t> peak;
  for (const auto& s : session.samples) {
    if (s.mem_used_bytes) peak = std::max(peak.value_or(0), *s.mem_used_bytes);
  }
  return peak;
}

std::string format_steps_csv(const std::vector<StepSummary>& rows) {
  std::string out(kStepsCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += text::csv_escape(r.label);
    out += ',' + text::format_double(r.runtime_s);
    out += ',' + (r.peak_gpu_mem_bytes ? std::to_string(*r.peak_gpu_mem_bytes) : "");
    out += ',' + (r.peak_cpu_mem_bytes ? std::to_string(*r.peak_cpu_mem_bytes) : "");
    out += ',' + (r.mean_gpu_util_pct ? text::format_double(*r.mean_gpu_util_pct) : "");
    out += ',' + std::to_string(r.sample_count) + '\n';
  }
  return out;
}

}  // namespace gputrace
