// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "gputrace/analysis.hpp"
#include "gputrace/device.hpp"
#include "gputrace/error.hpp"
#include "gputrace/procmon.hpp"
#include "gputrace/report.hpp"
#include "gputrace/sampler.hpp"
#include "gputrace/session.hpp"
#include "gputrace/text.hpp"
#include "gputrace/trace.hpp"
#include "gputrace/units.hpp"

namespace gputrace::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::SamplerStopped:
      return kUsageError;
    case ErrorKind::BackendUnavailable:
    case ErrorKind::UnknownDevice:
    case ErrorKind::OutputNotWritable:
    case ErrorKind::SpawnFailure:
    case ErrorKind::NoSuchProcess:
      return kEnvironmentError;
    default:
      return kDataError;
  }
}

/// Input files whose content is bad are data errors, whatever the parser
/// calls them.
template <typename Fn>
auto as_data(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw Error(ErrorKind::CorruptRow, e.what());
    throw;
  }
}

void write_output(const std::string& target, const std::string& content, std::ostream& out) {
  if (target == "-") {
    out << content;
    return;
  }
  std::ofstream f(target, std::ios::binary | std::ios::trunc);
  if (!f || !(f << content) || !f.flush()) {
    throw Error(ErrorKind::OutputNotWritable, "cannot write " + target);
  }
}

volatile std::sig_atomic_t g_interrupted = 0;
extern "C" void on_interrupt(int) { g_interrupted = 1; }

struct Options {
  // common
  double period = 1.0;
  unsigned device = 0;
  std::string out;
  std::string backend = "auto";
  std::string profile;
  bool lenient = false;
  // record
  bool no_procmon = false;
  std::vector<std::string> command;
  // mark
  std::string label;
  // procmon / parse-top
  long pid = 0;
  double interval = 1.0;
  std::string input;
  // report
  std::string dir;
  std::string steps_csv;
  std::string plot;
  std::string table;
  // scaling
  std::string metric = "runtime";
  double unit = kDefaultSizeScale;
  std::vector<double> sizes;
  std::vector<double> extrapolate_sizes;
  std::optional<double> capacity_gb;
  std::vector<std::string> inputs;
};

int do_record(const Options& o, std::ostream& out, std::ostream& err) {
  SamplerConfig config{o.period, o.device, o.out};
  validate(config);
  if (o.out.empty()) throw Error(ErrorKind::InvalidArgument, "--out is required");
  const auto kind = parse_backend_kind(o.backend);
  if (!kind) throw Error(ErrorKind::InvalidArgument, "unknown backend '" + o.backend + "'");
  ProfileScript script;
  if (!o.profile.empty()) {
    script = as_data([&] { return load_profile(o.profile); });
  } else {
    script.profile.segments = {SimSegment{std::chrono::seconds(1), 0, 0, 30, 50000}};
  }

  auto clock = std::make_shared<SteadyClock>();
  std::string reason;
  std::shared_ptr<DeviceBackend> backend = make_backend(*kind, script.profile, clock, &reason);
  if (!reason.empty()) {
    err << "warning: NVML unavailable (" << reason << "); using simulated backend\n";
  }
  RecordOptions options;
  options.monitor_process = !o.no_procmon;
  const auto result = record_command(config, o.command, backend, clock, options);
  out << "session " << fs::path(o.out).string() << '\n';
  if (result.exit_status != 0) {
    err << "note: command exited with status " << result.exit_status << '\n';
  }
  return kSuccess;
}

int do_mark(const Options& o, std::ostream&, std::ostream& err) {
  validate_label(o.label);
  try {
    append_mark(o.label);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::MissingFile) throw;
    err << "gputrace: " << e.what() << '\n';
    return kEnvironmentError;
  }
  return kSuccess;
}

int do_procmon(const Options& o, std::ostream& out, std::ostream& err) {
  if (!(o.period > 0)) throw Error(ErrorKind::InvalidArgument, "period must be positive");
  std::stop_source stop;
  g_interrupted = 0;
  auto previous = std::signal(SIGINT, on_interrupt);
  std::jthread watcher([&stop](std::stop_token st) {
    while (!st.stop_requested()) {
      if (g_interrupted) {
        stop.request_stop();
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });
  std::vector<ProcSample> series;
  try {
    series = sample_process(static_cast<pid_t>(o.pid), o.period, stop.get_token());
  } catch (...) {
    std::signal(SIGINT, previous);
    throw;
  }
  std::signal(SIGINT, previous);

  std::string csv(format::kProcessHeader);
  csv += '\n';
  for (const auto& s : series) csv += format_process_row(s);
  write_output(o.out.empty() ? "-" : o.out, csv, out);
  err << series.size() << " samples, peak RSS "
      << text::format_fixed(bytes_to_gib(peak_rss(series)), 2) << " GB\n";
  return kSuccess;
}

int do_parse_top(const Options& o, std::ostream& out, std::ostream& err) {
  if (!(o.interval > 0)) throw Error(ErrorKind::InvalidArgument, "interval must be positive");
  TopParseOptions options;
  options.interval_s = o.interval;
  if (o.pid > 0) options.pid = o.pid;
  const auto result = parse_top_batch(text::read_file(o.input), options);
  std::string csv(format::kProcessHeader);
  csv += '\n';
  for (const auto& s : result.samples) csv += format_process_row(s);
  write_output(o.out.empty() ? "-" : o.out, csv, out);
  err << result.snapshots << " snapshots, " << result.samples.size() << " samples, "
      << result.skipped << " skipped\n";
  return kSuccess;
}

int do_parse(const Options& o, std::ostream& out, std::ostream& err) {
  const auto session = parse_session(o.dir, ParseOptions{o.lenient});
  out << "device " << session.device().index << " " << session.device().name << " ("
      << text::format_fixed(bytes_to_gib(session.device().memory_total), 1) << " GB)\n";
  out << "duration_s " << format_runtime(session.duration_ms()) << '\n';
  out << "samples " << session.samples.size() << '\n';
  out << "markers " << session.markers.size() << '\n';
  if (session.process) out << "process_samples " << session.process->size() << '\n';
  if (session.meta.child_exit_status) {
    out << "child_exit_status " << *session.meta.child_exit_status << '\n';
  }
  for (const auto& d : session.meta.diagnostics) err << "recorded: " << d << '\n';
  for (const auto& d : session.parse_diagnostics) err << "skipped: " << d << '\n';
  return kSuccess;
}

int do_report(const Options& o, std::ostream& out, std::ostream& err) {
  const auto session = parse_session(o.dir, ParseOptions{o.lenient});
  const auto attribution = attribute_steps(session);
  for (const auto& d : attribution.diagnostics) err << "note: " << d << '\n';
  const auto rows = summarize_steps(session, attribution.steps);

  const bool any_output = !o.steps_csv.empty() || !o.plot.empty() || !o.table.empty();
  if (!o.steps_csv.empty()) write_output(o.steps_csv, format_steps_csv(rows), out);
  if (!o.plot.empty()) write_output(o.plot, render_usage(session, attribution.steps), out);
  if (!o.table.empty() || !any_output) {
    std::string table = render_table(rows);
    if (auto peak = peak_gpu_memory(session)) {
      const auto cap = session.device().memory_total;
      table += "Peak GPU memory: " + text::format_fixed(bytes_to_gib(*peak), 1) + " GB (" +
               format_percent(headroom(static_cast<double>(*peak), static_cast<double>(cap))) +
               " of " + text::format_fixed(bytes_to_gib(cap), 1) + " GB)\n";
    }
    if (session.process && !session.process->empty()) {
      table += "Peak CPU memory: " + text::format_fixed(bytes_to_gib(peak_rss(*session.process)), 1) +
               " GB\n";
    }
    write_output(o.table.empty() ? "-" : o.table, table, out);
  }
  return kSuccess;
}

std::vector<ScalingPoint> read_points_csv(const fs::path& path) {
  std::vector<ScalingPoint> points;
  const auto content = text::read_file(path);
  std::size_t line_no = 0;
  for (auto line : text::split_lines(content)) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto fields = text::split_csv(line);
    if (line_no == 1 && fields && fields->size() == 2 && (*fields)[0] == "size") continue;
    if (!fields || fields->size() != 2) {
      throw Error(ErrorKind::CorruptRow,
                  path.string() + " line " + std::to_string(line_no) + ": expected size,value");
    }
    auto size = text::parse_double(text::trim((*fields)[0]));
    auto value = text::parse_double(text::trim((*fields)[1]));
    if (!size || !value) {
      throw Error(ErrorKind::CorruptRow,
                  path.string() + " line " + std::to_string(line_no) + ": not a number");
    }
    points.push_back({*size, *value});
  }
  return points;
}

int do_scaling(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.metric != "runtime" && o.metric != "peak_gpu_mem") {
    throw Error(ErrorKind::InvalidArgument, "metric must be runtime or peak_gpu_mem");
  }
  if (!(o.unit > 0)) throw Error(ErrorKind::InvalidArgument, "unit must be positive");
  const bool memory = o.metric == "peak_gpu_mem";

  std::vector<ScalingPoint> points;
  std::size_t next_size = 0;
  for (const auto& input : o.inputs) {
    if (fs::is_directory(input)) {
      if (next_size >= o.sizes.size()) {
        throw Error(ErrorKind::InvalidArgument, "no --size given for session " + input);
      }
      const auto session = parse_session(input);
      double value = static_cast<double>(session.duration_ms()) / 1000.0;
      if (memory) {
        auto peak = peak_gpu_memory(session);
        if (!peak) throw Error(ErrorKind::CorruptRow, input + ": no memory samples");
        value = bytes_to_gib(*peak);
      }
      points.push_back({o.sizes[next_size++], value});
    } else {
      auto from_file = read_points_csv(input);
      points.insert(points.end(), from_file.begin(), from_file.end());
    }
  }
  if (next_size != o.sizes.size()) {
    throw Error(ErrorKind::InvalidArgument, "more --size values than session directories");
  }

  const auto fit = as_data([&] { return fit_linear(points); });
  const std::string unit_name = memory ? "GB" : "s";
  out << "metric," << o.metric << '\n';
  out << "points," << fit.n << '\n';
  out << "slope_per_size," << text::format_double(fit.slope) << '\n';
  out << "intercept," << text::format_double(fit.intercept) << '\n';
  out << "r2," << text::format_double(fit.r2) << '\n';
  out << "unit," << text::format_double(o.unit) << '\n';
  out << "unit_cost," << text::format_double(unit_cost(fit, o.unit)) << '\n';
  out << "unit_cost_display," << text::format_fixed(unit_cost(fit, o.unit), 1) << ' '
      << unit_name << '\n';
  out << "growth_first_to_last,"
      << format_ratio(fit.at(fit.max_size) / fit.at(fit.min_size)) << '\n';
  for (double size : o.extrapolate_sizes) {
    const auto e = extrapolate(fit, size);
    out << "extrapolate," << text::format_double(size) << ',' << text::format_double(e.value)
        << ',' << (e.extrapolated ? "extrapolated" : "interpolated") << '\n';
  }
  if (o.capacity_gb) {
    if (!memory) err << "note: --capacity-gb applies to peak_gpu_mem fits\n";
    if (auto at = threshold_crossing(fit, *o.capacity_gb)) {
      out << "capacity_reached_at," << text::format_double(*at) << '\n';
    } else {
      out << "capacity_reached_at,never\n";
    }
  }
  if (!o.plot.empty()) {
    ScalingPlotOptions plot;
    plot.title = memory ? "Peak GPU memory vs. workload size" : "Runtime vs. workload size";
    plot.y_label = memory ? "Peak GPU memory (GB)" : "Runtime (s)";
    plot.x_label = "Workload size";
    plot.value_unit = unit_name;
    plot.unit = o.unit;
    plot.unit_label = o.unit == kDefaultSizeScale ? "100k cells" : text::format_double(o.unit) + " units";
    write_output(o.plot, render_scaling(points, fit, plot), out);
  }
  return kSuccess;
}

int do_simulate(const Options& o, std::ostream& out, std::ostream&) {
  const auto script = as_data([&] { return load_profile(o.profile); });
  const auto paths = simulate_session(script, o.out, o.period);
  out << "session " << paths.meta_file.parent_path().string() << '\n';
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"gputrace: sample GPU/CPU usage around a workload and summarise it", "gputrace"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gputrace 0.1.0");
  Options o;

  auto* record = app.add_subcommand("record", "Run a command under the sampler");
  record->add_option("--period", o.period, "Sampling period in seconds")->capture_default_str();
  record->add_option("--device", o.device, "Device index")->capture_default_str();
  record->add_option("--out", o.out, "Session directory (required)");
  record->add_option("--backend", o.backend, "auto, nvml or sim")->capture_default_str();
  record->add_option("--profile", o.profile, "Profile for the simulated backend");
  record->add_flag("--no-procmon", o.no_procmon, "Do not sample the child's CPU and RSS");
  record->add_option("command", o.command, "Command to run (after --)")->required();

  auto* mark = app.add_subcommand("mark", "Add a marker to the session in GPUTRACE_SESSION_DIR");
  mark->add_option("label", o.label)->required();

  auto* procmon = app.add_subcommand("procmon", "Sample a process's CPU% and RSS");
  procmon->add_option("--pid", o.pid)->required();
  procmon->add_option("--period", o.period)->capture_default_str();
  procmon->add_option("--out", o.out, "process.csv to write (default stdout)");

  auto* parse = app.add_subcommand("parse", "Validate a session directory");
  parse->add_option("dir", o.dir)->required();
  parse->add_flag("--lenient", o.lenient, "Skip corrupt rows instead of failing");

  auto* parse_top = app.add_subcommand("parse-top", "Convert `top -b` output to process.csv");
  parse_top->add_option("--interval", o.interval)->capture_default_str();
  parse_top->add_option("--pid", o.pid, "Process row to pick");
  parse_top->add_option("--out", o.out, "File to write (default stdout)");
  parse_top->add_option("file", o.input)->required();

  auto* report = app.add_subcommand("report", "Per-step summary, table and usage plot");
  report->add_option("dir", o.dir)->required();
  report->add_option("--steps-csv", o.steps_csv, "Step summary CSV ('-' for stdout)");
  report->add_option("--plot", o.plot, "Usage timeline SVG");
  report->add_option("--table", o.table, "Text table ('-' for stdout)");
  report->add_flag("--lenient", o.lenient);

  auto* scaling = app.add_subcommand("scaling", "Linear scaling fit over sizes");
  scaling->add_option("--metric", o.metric, "runtime or peak_gpu_mem")->capture_default_str();
  scaling->add_option("--unit", o.unit, "Size increment for unit costs")->capture_default_str();
  scaling->add_option("--size", o.sizes, "Size of each session directory, in order");
  scaling->add_option("--extrapolate", o.extrapolate_sizes, "Evaluate the fit at this size");
  scaling->add_option("--capacity-gb", o.capacity_gb, "Report the size where the fit reaches it");
  scaling->add_option("--plot", o.plot, "Scaling chart SVG");
  scaling->add_option("inputs", o.inputs, "size,value CSV files or session directories")
      ->required();

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic session from a profile");
  simulate->add_option("--profile", o.profile)->required();
  simulate->add_option("--out", o.out)->required();
  simulate->add_option("--period", o.period)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (record->parsed()) return do_record(o, out, err);
    if (mark->parsed()) return do_mark(o, out, err);
    if (procmon->parsed()) return do_procmon(o, out, err);
    if (parse->parsed()) return do_parse(o, out, err);
    if (parse_top->parsed()) return do_parse_top(o, out, err);
    if (report->parsed()) return do_report(o, out, err);
    if (scaling->parsed()) return do_scaling(o, out, err);
    if (simulate->parsed()) return do_simulate(o, out, err);
  } catch (const Error& e) {
    err << "gputrace: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "gputrace: " << e.what() << '\n';
    return kEnvironmentError;
  }
  return kUsageError;
}

}  // namespace gputrace::cli
