// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/session.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>

#include "gputrace/error.hpp"
#include "gputrace/text.hpp"

namespace gputrace {

namespace fs = std::filesystem;

Sample Sample::from_reading(std::int64_t elapsed_ms, unsigned device_index,
                            const InstantReading& r) {
  return Sample{elapsed_ms,           device_index,        r.gpu_utilization(),
                r.memory_used(),      r.memory_total(),    r.temperature_c(),
                r.power_draw_mw()};
}

Sample Sample::gap(std::int64_t elapsed_ms, unsigned device_index) {
  Sample s;
  s.elapsed_ms = elapsed_ms;
  s.device_index = device_index;
  return s;
}

TracePaths TracePaths::in(const fs::path& dir, bool with_process) {
  TracePaths p;
  p.metrics_csv = dir / format::kMetricsFile;
  p.events_csv = dir / format::kEventsFile;
  if (with_process) p.process_csv = dir / format::kProcessFile;
  p.meta_file = dir / format::kMetaFile;
  return p;
}

void validate_label(std::string_view label) {
  if (label.empty()) throw Error(ErrorKind::InvalidArgument, "marker label is empty");
  if (label.find_first_of("\r\n") != std::string_view::npos) {
    throw Error(ErrorKind::InvalidArgument, "marker label contains a line break");
  }
}

// Writing --------------------------------------------------------------------

namespace {

template <typename T>
std::string opt(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::string one_line(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) {
    throw Error(ErrorKind::OutputNotWritable, "cannot write " + path.string());
  }
}

}  // namespace

std::string format_sample_row(const Sample& s) {
  return std::to_string(s.elapsed_ms) + ',' + std::to_string(s.device_index) + ',' +
         opt(s.gpu_util_pct) + ',' + opt(s.mem_used_bytes) + ',' + opt(s.mem_total_bytes) + ',' +
         opt(s.temperature_c) + ',' + opt(s.power_mw) + '\n';
}

std::string format_event_row(const EventMarker& m) {
  return std::to_string(m.elapsed_ms) + ',' + text::csv_escape(m.label) + '\n';
}

std::string format_process_row(const ProcSample& p) {
  return std::to_string(std::llround(p.elapsed_s * 1000.0)) + ',' +
         text::format_double(p.cpu_pct) + ',' + std::to_string(p.rss) + '\n';
}

std::string format_meta(const SessionMeta& m) {
  std::string out;
  auto kv = [&out](std::string_view key, const std::string& value) {
    out.append(key).append("=").append(one_line(value)).append("\n");
  };
  kv("schema_version", std::to_string(m.schema_version));
  kv("start_wall_utc", m.start_wall_utc);
  if (!m.stop_wall_utc.empty()) kv("stop_wall_utc", m.stop_wall_utc);
  kv("period_s", text::format_double(m.period_s));
  kv("device_index", std::to_string(m.device.index));
  kv("device_name", m.device.name);
  kv("device_mem_total_bytes", std::to_string(m.device.memory_total));
  if (m.duration_ms) kv("duration_ms", std::to_string(*m.duration_ms));
  if (m.child_exit_status) kv("child_exit_status", std::to_string(*m.child_exit_status));
  for (const auto& d : m.diagnostics) kv("diagnostic", d);
  return out;
}

std::string format_utc(std::chrono::system_clock::time_point t) {
  using namespace std::chrono;
  const auto ms = duration_cast<milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms >= 0 ? ms / 1000 : (ms - 999) / 1000);
  const int frac = static_cast<int>(ms - static_cast<long long>(secs) * 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  return buf;
}

TracePaths write_session(const Session& session, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::OutputNotWritable, "cannot create " + dir.string());

  const auto paths = TracePaths::in(dir, session.process.has_value());

  std::string metrics(format::kMetricsHeader);
  metrics += '\n';
  for (const auto& s : session.samples) metrics += format_sample_row(s);
  write_text(paths.metrics_csv, metrics);

  std::string events(format::kEventsHeader);
  events += '\n';
  for (const auto& m : session.markers) events += format_event_row(m);
  write_text(paths.events_csv, events);

  if (session.process) {
    std::string proc(format::kProcessHeader);
    proc += '\n';
    for (const auto& p : *session.process) proc += format_process_row(p);
    write_text(*paths.process_csv, proc);
  }

  write_text(paths.meta_file, format_meta(session.meta));
  return paths;
}

// Parsing --------------------------------------------------------------------

namespace {

class RowSink {
 public:
  RowSink(const ParseOptions& options, std::vector<std::string>& diagnostics)
      : options_(options), diagnostics_(diagnostics) {}

  // Returns normally only in lenient mode.
  void corrupt(const fs::path& file, std::size_t row, const std::string& why) {
    const auto msg = file.filename().string() + " row " + std::to_string(row) + ": " + why;
    if (!options_.lenient) throw Error(ErrorKind::CorruptRow, msg);
    diagnostics_.push_back(msg);
  }

 private:
  const ParseOptions& options_;
  std::vector<std::string>& diagnostics_;
};

template <typename T>
bool opt_field(const std::string& field, std::optional<T>& out) {
  if (field.empty()) {
    out.reset();
    return true;
  }
  auto v = text::parse_int<T>(field);
  if (!v) return false;
  out = *v;
  return true;
}

std::string load(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorKind::MissingFile, "missing " + path.string());
  }
  return text::read_file(path);
}

/// Splits a CSV file, checks the header, and hands each data row to `row`
/// with its 1-based line number. `row` returns an error string or empty.
void for_each_row(const fs::path& path, std::string_view header, std::size_t field_count,
                  RowSink& sink,
                  const std::function<std::string(const std::vector<std::string>&, std::size_t)>&
                      row) {
  const auto content = load(path);
  const auto lines = text::split_lines(content);
  if (lines.empty() || lines.front() != header) {
    throw Error(ErrorKind::SchemaMismatch,
                path.filename().string() + ": expected header '" + std::string(header) + "'");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line_no = i + 1;
    if (lines[i].empty()) {
      sink.corrupt(path, line_no, "empty line");
      continue;
    }
    auto fields = text::split_csv(lines[i]);
    if (!fields) {
      sink.corrupt(path, line_no, "unbalanced quotes");
      continue;
    }
    if (fields->size() != field_count) {
      sink.corrupt(path, line_no,
                   "expected " + std::to_string(field_count) + " fields, got " +
                       std::to_string(fields->size()));
      continue;
    }
    if (auto why = row(*fields, line_no); !why.empty()) sink.corrupt(path, line_no, why);
  }
}

SessionMeta parse_meta(const fs::path& path, RowSink& sink) {
  const auto content = load(path);
  std::map<std::string, std::string, std::less<>> seen;
  SessionMeta meta;
  meta.schema_version = -1;

  auto require_int = [&](std::string_view key, const std::string& v) {
    auto n = text::parse_int<std::int64_t>(v);
    if (!n) throw Error(ErrorKind::SchemaMismatch, "meta: bad value for " + std::string(key));
    return *n;
  };

  std::size_t line_no = 0;
  for (auto line : text::split_lines(content)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      sink.corrupt(path, line_no, "expected key=value");
      continue;
    }
    const std::string key(line.substr(0, eq));
    const std::string value(line.substr(eq + 1));
    if (key != "diagnostic" && !seen.emplace(key, value).second) {
      throw Error(ErrorKind::SchemaMismatch, "meta: duplicate key " + key);
    }
    if (key == "schema_version") {
      meta.schema_version = static_cast<int>(require_int(key, value));
      if (meta.schema_version != format::kSchemaVersion) {
        throw Error(ErrorKind::SchemaMismatch,
                    "meta: unsupported schema_version " + value + " (expected " +
                        std::to_string(format::kSchemaVersion) + ")");
      }
    } else if (key == "start_wall_utc") {
      meta.start_wall_utc = value;
    } else if (key == "stop_wall_utc") {
      meta.stop_wall_utc = value;
    } else if (key == "period_s") {
      auto p = text::parse_double(value);
      if (!p || *p <= 0) throw Error(ErrorKind::SchemaMismatch, "meta: bad period_s");
      meta.period_s = *p;
    } else if (key == "device_index") {
      auto n = text::parse_int<unsigned>(value);
      if (!n) throw Error(ErrorKind::SchemaMismatch, "meta: bad device_index");
      meta.device.index = *n;
    } else if (key == "device_name") {
      meta.device.name = value;
    } else if (key == "device_mem_total_bytes") {
      auto n = text::parse_int<std::uint64_t>(value);
      if (!n || *n == 0) throw Error(ErrorKind::SchemaMismatch, "meta: bad device_mem_total_bytes");
      meta.device.memory_total = *n;
    } else if (key == "duration_ms") {
      const auto d = require_int(key, value);
      if (d < 0) throw Error(ErrorKind::SchemaMismatch, "meta: negative duration_ms");
      meta.duration_ms = d;
    } else if (key == "child_exit_status") {
      meta.child_exit_status = static_cast<int>(require_int(key, value));
    } else if (key == "diagnostic") {
      meta.diagnostics.push_back(value);
    } else {
      throw Error(ErrorKind::SchemaMismatch, "meta: unknown key " + key);
    }
  }

  for (std::string_view key : {"schema_version", "start_wall_utc", "stop_wall_utc", "period_s",
                               "device_index", "device_name", "device_mem_total_bytes",
                               "duration_ms"}) {
    if (!seen.contains(key)) {
      throw Error(ErrorKind::SchemaMismatch,
                  "meta: missing " + std::string(key) +
                      (key == "stop_wall_utc" || key == "duration_ms"
                           ? " (session not stopped?)"
                           : ""));
    }
  }
  return meta;
}

}  // namespace

Session parse_session(const fs::path& dir, const ParseOptions& options) {
  Session session;
  RowSink sink(options, session.parse_diagnostics);

  session.paths = TracePaths::in(dir, fs::exists(dir / format::kProcessFile));
  for (const auto& p : {session.paths.metrics_csv, session.paths.events_csv,
                        session.paths.meta_file}) {
    if (!fs::is_regular_file(p)) throw Error(ErrorKind::MissingFile, "missing " + p.string());
  }

  session.meta = parse_meta(session.paths.meta_file, sink);
  const auto duration = *session.meta.duration_ms;

  for_each_row(session.paths.metrics_csv, format::kMetricsHeader, 7, sink,
               [&](const std::vector<std::string>& f, std::size_t) -> std::string {
                 Sample s;
                 auto t = text::parse_int<std::int64_t>(f[0]);
                 auto dev = text::parse_int<unsigned>(f[1]);
                 if (!t || *t < 0) return "bad elapsed_ms '" + f[0] + "'";
                 if (!dev) return "bad device_index '" + f[1] + "'";
                 s.elapsed_ms = *t;
                 s.device_index = *dev;
                 if (!opt_field(f[2], s.gpu_util_pct) || !opt_field(f[3], s.mem_used_bytes) ||
                     !opt_field(f[4], s.mem_total_bytes) || !opt_field(f[5], s.temperature_c) ||
                     !opt_field(f[6], s.power_mw)) {
                   return "non-numeric metric field";
                 }
                 if (s.gpu_util_pct && *s.gpu_util_pct > 100) return "utilization above 100";
                 if (s.mem_used_bytes && s.mem_total_bytes &&
                     *s.mem_used_bytes > *s.mem_total_bytes) {
                   return "mem_used_bytes exceeds mem_total_bytes";
                 }
                 if (!session.samples.empty() && s.elapsed_ms <= session.samples.back().elapsed_ms) {
                   return "elapsed_ms not strictly increasing";
                 }
                 if (s.elapsed_ms >= duration) return "sample at or after session end";
                 session.samples.push_back(s);
                 return {};
               });

  for_each_row(session.paths.events_csv, format::kEventsHeader, 2, sink,
               [&](const std::vector<std::string>& f, std::size_t) -> std::string {
                 auto t = text::parse_int<std::int64_t>(f[0]);
                 if (!t || *t < 0) return "bad elapsed_ms '" + f[0] + "'";
                 if (f[1].empty()) return "empty label";
                 if (f[1].find_first_of("\r\n") != std::string::npos) return "label has line break";
                 if (!session.markers.empty() && *t < session.markers.back().elapsed_ms) {
                   return "marker timestamps decrease";
                 }
                 if (*t > duration) return "marker after session end";
                 session.markers.push_back({*t, f[1]});
                 return {};
               });

  if (session.paths.process_csv) {
    session.process.emplace();
    for_each_row(*session.paths.process_csv, format::kProcessHeader, 3, sink,
                 [&](const std::vector<std::string>& f, std::size_t) -> std::string {
                   auto t = text::parse_int<std::int64_t>(f[0]);
                   auto cpu = text::parse_double(f[1]);
                   auto rss = text::parse_int<std::uint64_t>(f[2]);
                   if (!t || *t < 0) return "bad elapsed_ms '" + f[0] + "'";
                   if (!cpu || *cpu < 0) return "bad cpu_pct '" + f[1] + "'";
                   if (!rss) return "bad rss_bytes '" + f[2] + "'";
                   const double elapsed_s = static_cast<double>(*t) / 1000.0;
                   if (!session.process->empty() && elapsed_s < session.process->back().elapsed_s) {
                     return "elapsed_ms decreases";
                   }
                   session.process->push_back({elapsed_s, *cpu, *rss});
                   return {};
                 });
  }
  return session;
}

}  // namespace gputrace
