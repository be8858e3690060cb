// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/procmon.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "gputrace/error.hpp"
#include "gputrace/text.hpp"
#include "gputrace/units.hpp"

namespace gputrace {

namespace {

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

struct Columns {
  std::size_t pid = 0;
  std::size_t res = 0;
  std::size_t cpu = 0;
};

std::optional<Columns> header_columns(std::string_view line) {
  const auto t = tokens(line);
  if (t.empty() || t.front() != "PID") return std::nullopt;
  Columns c;
  bool res = false, cpu = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == "RES") c.res = i, res = true;
    if (t[i] == "%CPU") c.cpu = i, cpu = true;
  }
  if (!res || !cpu) return std::nullopt;
  return c;
}

std::optional<double> parse_percent(std::string_view field) {
  std::string s(field);
  std::replace(s.begin(), s.end(), ',', '.');  // decimal comma locales
  auto v = text::parse_double(s);
  if (!v || *v < 0) return std::nullopt;
  return v;
}

struct Snapshot {
  std::optional<Columns> columns;
  std::vector<std::string_view> rows;
};

}  // namespace

std::optional<std::uint64_t> parse_top_memory(std::string_view field) {
  if (field.empty()) return std::nullopt;
  std::uint64_t scale = kKiB;
  switch (field.back()) {
    case 'k': case 'K': scale = kKiB; field.remove_suffix(1); break;
    case 'm': case 'M': scale = kMiB; field.remove_suffix(1); break;
    case 'g': case 'G': scale = kGiB; field.remove_suffix(1); break;
    case 't': case 'T': scale = kTiB; field.remove_suffix(1); break;
    default: break;
  }
  if (auto whole = text::parse_int<std::uint64_t>(field)) return *whole * scale;
  std::string s(field);
  std::replace(s.begin(), s.end(), ',', '.');
  auto v = text::parse_double(s);
  if (!v || *v < 0) return std::nullopt;
  return static_cast<std::uint64_t>(std::llround(*v * static_cast<double>(scale)));
}

TopParseResult parse_top_batch(std::string_view content, const TopParseOptions& options) {
  std::vector<Snapshot> snapshots;
  for (auto line : text::split_lines(content)) {
    if (line.starts_with("top - ")) {
      snapshots.emplace_back();
      continue;
    }
    if (snapshots.empty()) continue;
    auto& snap = snapshots.back();
    if (!snap.columns) {
      snap.columns = header_columns(line);
    } else if (!text::trim(line).empty()) {
      snap.rows.push_back(line);
    }
  }

  TopParseResult result;
  result.snapshots = snapshots.size();
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const auto& snap = snapshots[i];
    const double elapsed = static_cast<double>(options.first_ordinal + i) * options.interval_s;

    std::optional<ProcSample> sample;
    if (snap.columns) {
      const auto& cols = *snap.columns;
      for (auto row : snap.rows) {
        const auto t = tokens(row);
        if (t.size() <= std::max({cols.pid, cols.res, cols.cpu})) continue;
        if (options.pid) {
          auto pid = text::parse_int<long>(t[cols.pid]);
          if (!pid || *pid != *options.pid) continue;
        }
        auto rss = parse_top_memory(t[cols.res]);
        auto cpu = parse_percent(t[cols.cpu]);
        if (rss && cpu) sample = ProcSample{elapsed, *cpu, *rss};
        break;
      }
    }
    if (sample) {
      result.samples.push_back(*sample);
    } else {
      ++result.skipped;
    }
  }
  return result;
}

// Live sampling ----------------------------------------------------------------

namespace {

struct ProcStat {
  char state = '?';
  std::uint64_t cpu_ticks = 0;  // utime + stime
  std::uint64_t rss_pages = 0;
};

std::optional<ProcStat> read_stat(pid_t pid) {
  std::ifstream in("/proc/" + std::to_string(pid) + "/stat");
  if (!in) return std::nullopt;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // The command name is parenthesised and may itself contain spaces or ')'.
  const auto close = content.rfind(')');
  if (close == std::string::npos) return std::nullopt;
  const auto t = tokens(std::string_view(content).substr(close + 1));
  // After ")": state(0) ... utime(11) stime(12) ... rss(21)
  if (t.size() < 22) return std::nullopt;
  auto utime = text::parse_int<std::uint64_t>(t[11]);
  auto stime = text::parse_int<std::uint64_t>(t[12]);
  auto rss = text::parse_int<std::int64_t>(t[21]);
  if (!utime || !stime || !rss) return std::nullopt;
  return ProcStat{t[0].empty() ? '?' : t[0][0], *utime + *stime,
                  static_cast<std::uint64_t>(std::max<std::int64_t>(*rss, 0))};
}

bool alive(const std::optional<ProcStat>& st) {
  return st && st->state != 'Z' && st->state != 'X' && st->state != 'x';
}

}  // namespace

std::vector<ProcSample> sample_process(pid_t pid, double period_s, std::stop_token stop,
                                       Clock* clock) {
  if (!(period_s > 0)) throw Error(ErrorKind::InvalidArgument, "period must be positive");
  if (!alive(read_stat(pid))) {
    throw Error(ErrorKind::NoSuchProcess, "no running process with pid " + std::to_string(pid));
  }

  SteadyClock own;
  Clock& clk = clock ? *clock : own;
  const double ticks_per_s = static_cast<double>(sysconf(_SC_CLK_TCK));
  const auto page_size = static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
  const auto period = std::chrono::nanoseconds(std::llround(period_s * 1e9));
  const auto origin = clk.now();

  std::vector<ProcSample> series;
  std::uint64_t prev_ticks = 0;
  std::chrono::nanoseconds prev_t{0};
  std::int64_t k = 0;
  while (clk.sleep_until(origin + k * period, stop)) {
    const auto st = read_stat(pid);
    if (!alive(st)) break;
    const auto t = clk.now();
    double cpu = 0.0;
    if (!series.empty() && t > prev_t) {
      const double cpu_s = static_cast<double>(st->cpu_ticks - prev_ticks) / ticks_per_s;
      const double wall_s = std::chrono::duration<double>(t - prev_t).count();
      cpu = cpu_s / wall_s * 100.0;
    }
    series.push_back({std::chrono::duration<double>(t).count(), cpu, st->rss_pages * page_size});
    prev_ticks = st->cpu_ticks;
    prev_t = t;
    // Late ticks are taken at once; the grid itself never drifts.
    k = std::max(k + 1, static_cast<std::int64_t>((clk.now() - origin) / period));
  }
  return series;
}

std::uint64_t peak_rss(const std::vector<ProcSample>& series) {
  std::uint64_t peak = 0;
  for (const auto& s : series) peak = std::max(peak, s.rss);
  return peak;
}

}  // namespace gputrace
