// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/sampler.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include "gputrace/error.hpp"
#include "gputrace/text.hpp"

extern char** environ;

namespace gputrace {

namespace fs = std::filesystem;
using std::chrono::milliseconds;
using std::chrono::nanoseconds;

namespace {

constexpr std::size_t kMaxReadFailureDetails = 5;

nanoseconds period_ns(double period_s) { return nanoseconds(std::llround(period_s * 1e9)); }

std::int64_t floor_ms(nanoseconds t) {
  return std::chrono::floor<milliseconds>(t).count();
}

std::int64_t ceil_ms(nanoseconds t) { return std::chrono::ceil<milliseconds>(t).count(); }

void write_file_atomically(const fs::path& path, const std::string& content) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out || !(out << content) || !out.flush()) {
      throw Error(ErrorKind::OutputNotWritable, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::OutputNotWritable, "cannot write " + path.string());
}

fs::path prepare_session_dir(const fs::path& dir) {
  if (dir.empty()) throw Error(ErrorKind::InvalidArgument, "output directory not set");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::OutputNotWritable, "cannot create " + dir.string());
  }
  if (fs::exists(dir / format::kMetricsFile) || fs::exists(dir / format::kMetaFile)) {
    throw Error(ErrorKind::OutputNotWritable, dir.string() + " already contains a session");
  }
  if (access(dir.c_str(), W_OK) != 0) {
    throw Error(ErrorKind::OutputNotWritable, dir.string() + " is not writable");
  }
  return dir;
}

}  // namespace

void validate(const SamplerConfig& config) {
  if (!(config.period_s >= 0.001) || !std::isfinite(config.period_s)) {
    throw Error(ErrorKind::InvalidArgument,
                "period must be at least 0.001 s, got " + text::format_double(config.period_s));
  }
}

// SamplerHandle ----------------------------------------------------------------

struct SamplerHandle::State {
  SamplerConfig config;
  std::shared_ptr<DeviceBackend> backend;
  std::shared_ptr<Clock> clock;
  nanoseconds origin{0};
  nanoseconds period{0};
  TracePaths paths;
  SessionMeta meta;
  std::chrono::system_clock::time_point start_wall;

  std::mutex stop_mutex;  // serialises stop()
  mutable std::mutex mutex;
  std::ofstream metrics;
  std::ofstream events;
  bool stopping = false;
  bool stopped = false;
  nanoseconds stop_elapsed{0};
  std::int64_t last_row_ms = -1;
  std::int64_t last_mark_ms = 0;
  std::size_t read_failures = 0;
  std::size_t write_failures = 0;

  std::jthread poller;

  nanoseconds elapsed() const { return clock->now() - origin; }

  // Returns false once the session is stopping.
  bool tick() {
    const auto t = elapsed();
    const auto ms = floor_ms(t);
    Sample row;
    std::string failure;
    try {
      row = Sample::from_reading(ms, config.device_index,
                                 backend->read_instant(config.device_index));
    } catch (const std::exception& e) {
      row = Sample::gap(ms, config.device_index);
      failure = e.what();
    }

    std::lock_guard lock(mutex);
    if (stopping) return false;
    if (!failure.empty()) {
      if (++read_failures <= kMaxReadFailureDetails) {
        meta.diagnostics.push_back("read failure at " + std::to_string(ms) + " ms: " + failure);
      }
    }
    if (!(metrics << format_sample_row(row)) || !metrics.flush()) ++write_failures;
    last_row_ms = ms;
    return true;
  }

  void poll(std::stop_token stop) {
    std::int64_t k = 0;
    nanoseconds deadline{0};
    while (clock->sleep_until(origin + deadline, stop)) {
      if (!tick()) break;
      const auto now = elapsed();
      k = std::max<std::int64_t>(k + 1, now / period);
      std::int64_t last;
      {
        std::lock_guard lock(mutex);
        last = last_row_ms;
      }
      // Never schedule inside the millisecond already written, so row
      // timestamps stay strictly increasing.
      deadline = std::max<nanoseconds>(k * period, milliseconds(last + 1));
    }
  }
};

SamplerHandle::SamplerHandle(std::unique_ptr<State> state) : state_(std::move(state)) {}
SamplerHandle::SamplerHandle(SamplerHandle&&) noexcept = default;
SamplerHandle& SamplerHandle::operator=(SamplerHandle&& other) noexcept {
  if (this != &other) {
    if (state_) {
      try {
        stop();
      } catch (...) {
      }
    }
    state_ = std::move(other.state_);
  }
  return *this;
}

SamplerHandle::~SamplerHandle() {
  if (!state_) return;
  try {
    stop();
  } catch (...) {
  }
}

SamplerHandle start(const SamplerConfig& config, std::shared_ptr<DeviceBackend> backend,
                    std::shared_ptr<Clock> clock) {
  validate(config);
  if (!backend) throw Error(ErrorKind::InvalidArgument, "no device backend");
  if (!clock) clock = std::make_shared<SteadyClock>();

  auto state = std::make_unique<SamplerHandle::State>();
  state->config = config;
  state->backend = std::move(backend);
  state->clock = std::move(clock);
  state->period = period_ns(config.period_s);

  const auto device = state->backend->device(config.device_index);
  prepare_session_dir(config.output_dir);
  state->paths = TracePaths::in(config.output_dir);

  state->metrics.open(state->paths.metrics_csv, std::ios::binary | std::ios::trunc);
  state->events.open(state->paths.events_csv, std::ios::binary | std::ios::trunc);
  if (!state->metrics || !state->events) {
    throw Error(ErrorKind::OutputNotWritable, "cannot create trace files in " +
                                                  config.output_dir.string());
  }
  state->metrics << format::kMetricsHeader << '\n' << std::flush;
  state->events << format::kEventsHeader << '\n' << std::flush;

  state->start_wall = std::chrono::system_clock::now();
  state->meta.start_wall_utc = format_utc(state->start_wall);
  state->meta.period_s = config.period_s;
  state->meta.device = device;
  write_file_atomically(state->paths.meta_file, format_meta(state->meta));

  state->origin = state->clock->now();
  auto* raw = state.get();
  state->poller = std::jthread([raw](std::stop_token st) { raw->poll(st); });
  return SamplerHandle(std::move(state));
}

void SamplerHandle::mark(std::string_view label) {
  validate_label(label);
  if (!state_) throw Error(ErrorKind::SamplerStopped, "sampler handle is empty");
  auto& s = *state_;
  std::lock_guard lock(s.mutex);
  if (s.stopping) throw Error(ErrorKind::SamplerStopped, "mark after stop: " + std::string(label));
  const auto ms = floor_ms(s.elapsed());
  if (!(s.events << format_event_row({ms, std::string(label)})) || !s.events.flush()) {
    ++s.write_failures;
  }
  s.last_mark_ms = std::max(s.last_mark_ms, ms);
}

TracePaths SamplerHandle::stop() {
  if (!state_) throw Error(ErrorKind::SamplerStopped, "sampler handle is empty");
  auto& s = *state_;
  std::lock_guard serial(s.stop_mutex);
  {
    std::lock_guard lock(s.mutex);
    if (s.stopped) return s.paths;
    s.stopping = true;
    s.stop_elapsed = s.elapsed();
  }
  s.poller.request_stop();
  if (s.poller.joinable()) s.poller.join();

  std::lock_guard lock(s.mutex);
  s.metrics.close();
  s.events.close();
  if (s.read_failures > kMaxReadFailureDetails) {
    s.meta.diagnostics.push_back(std::to_string(s.read_failures) + " read failures in total");
  }
  if (s.write_failures > 0) {
    s.meta.diagnostics.push_back(std::to_string(s.write_failures) + " rows failed to write");
  }
  s.meta.stop_wall_utc = format_utc(std::chrono::system_clock::now());
  // The session must cover every written row: a tick can land in the same
  // millisecond as (or, on virtual time, exactly at) the stop instant.
  s.meta.duration_ms = std::max({ceil_ms(s.stop_elapsed), s.last_row_ms + 1, s.last_mark_ms});
  write_file_atomically(s.paths.meta_file, format_meta(s.meta));
  s.stopped = true;
  return s.paths;
}

bool SamplerHandle::running() const {
  if (!state_) return false;
  std::lock_guard lock(state_->mutex);
  return !state_->stopping;
}

const fs::path& SamplerHandle::session_dir() const { return state_->config.output_dir; }

std::chrono::system_clock::time_point SamplerHandle::start_wall_time() const {
  return state_->start_wall;
}

nanoseconds SamplerHandle::elapsed() const { return state_->elapsed(); }

void SamplerHandle::set_child_exit_status(int status) {
  std::lock_guard lock(state_->mutex);
  state_->meta.child_exit_status = status;
}

void SamplerHandle::add_diagnostic(std::string message) {
  std::lock_guard lock(state_->mutex);
  state_->meta.diagnostics.push_back(std::move(message));
}

// Marker control file ------------------------------------------------------------

void append_mark(const fs::path& control_file, std::string_view label) {
  validate_label(label);
  const int fd = ::open(control_file.c_str(), O_WRONLY | O_APPEND | O_CLOEXEC);
  if (fd < 0) {
    throw Error(ErrorKind::MissingFile,
                "cannot open marker file " + control_file.string() + ": " + std::strerror(errno));
  }
  // One write() per label keeps concurrent appenders from interleaving.
  std::string line(label);
  line.push_back('\n');
  const auto n = ::write(fd, line.data(), line.size());
  ::close(fd);
  if (n != static_cast<ssize_t>(line.size())) {
    throw Error(ErrorKind::OutputNotWritable, "short write to " + control_file.string());
  }
}

void append_mark(std::string_view label) {
  const std::string mark_env(format::kMarkFileEnv);
  const std::string dir_env(format::kSessionDirEnv);
  if (const char* file = std::getenv(mark_env.c_str()); file && *file) {
    append_mark(fs::path(file), label);
  } else if (const char* dir = std::getenv(dir_env.c_str()); dir && *dir) {
    append_mark(fs::path(dir) / format::kMarkControlFile, label);
  } else {
    throw Error(ErrorKind::MissingFile,
                "no active session: neither " + mark_env + " nor " + dir_env + " is set");
  }
}

namespace {

/// Reads complete lines appended to the control file since the last call.
class ControlFileTail {
 public:
  explicit ControlFileTail(fs::path path) : path_(std::move(path)) {}

  std::vector<std::string> poll() {
    std::vector<std::string> labels;
    std::ifstream in(path_, std::ios::binary);
    if (!in) return labels;
    in.seekg(static_cast<std::streamoff>(offset_));
    std::string chunk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    offset_ += chunk.size();
    pending_ += chunk;
    std::size_t start = 0;
    for (auto nl = pending_.find('\n'); nl != std::string::npos;
         nl = pending_.find('\n', start)) {
      auto line = text::trim(std::string_view(pending_).substr(start, nl - start));
      if (!line.empty()) labels.emplace_back(line);
      start = nl + 1;
    }
    pending_.erase(0, start);
    return labels;
  }

 private:
  fs::path path_;
  std::size_t offset_ = 0;
  std::string pending_;
};

std::vector<std::string> child_environment(const fs::path& session_dir,
                                           const fs::path& control_file) {
  std::vector<std::string> env;
  const std::string mark_prefix = std::string(format::kMarkFileEnv) + "=";
  const std::string dir_prefix = std::string(format::kSessionDirEnv) + "=";
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    if (kv.starts_with(mark_prefix) || kv.starts_with(dir_prefix)) continue;
    env.emplace_back(kv);
  }
  env.push_back(dir_prefix + fs::absolute(session_dir).string());
  env.push_back(mark_prefix + fs::absolute(control_file).string());
  return env;
}

std::vector<char*> c_strings(std::vector<std::string>& strings) {
  std::vector<char*> out;
  out.reserve(strings.size() + 1);
  for (auto& s : strings) out.push_back(s.data());
  out.push_back(nullptr);
  return out;
}

}  // namespace

RecordResult record_command(const SamplerConfig& config, const std::vector<std::string>& argv,
                            std::shared_ptr<DeviceBackend> backend, std::shared_ptr<Clock> clock,
                            const RecordOptions& options) {
  if (argv.empty()) throw Error(ErrorKind::InvalidArgument, "no command to record");
  if (!clock) clock = std::make_shared<SteadyClock>();

  auto handle = start(config, std::move(backend), clock);
  const auto origin = clock->now() - handle.elapsed();
  const auto control_file = handle.session_dir() / format::kMarkControlFile;
  { std::ofstream touch(control_file, std::ios::binary | std::ios::trunc); }

  auto env = child_environment(handle.session_dir(), control_file);
  auto args = argv;
  auto envp = c_strings(env);
  auto argvp = c_strings(args);

  pid_t pid = -1;
  if (int rc = posix_spawnp(&pid, argvp[0], nullptr, nullptr, argvp.data(), envp.data());
      rc != 0) {
    handle.add_diagnostic("spawn of " + argv[0] + " failed: " + std::strerror(rc));
    handle.stop();
    throw Error(ErrorKind::SpawnFailure, "cannot start " + argv[0] + ": " + std::strerror(rc));
  }

  std::vector<ProcSample> process;
  std::string process_error;
  std::jthread monitor;
  if (options.monitor_process) {
    monitor = std::jthread([&, pid](std::stop_token st) {
      try {
        process = sample_process(pid, config.period_s, st, clock.get());
      } catch (const std::exception& e) {
        process_error = e.what();
      }
    });
  }

  ControlFileTail tail(control_file);
  auto drain = [&] {
    for (const auto& label : tail.poll()) {
      try {
        handle.mark(label);
      } catch (const Error& e) {
        handle.add_diagnostic(std::string("rejected marker: ") + e.what());
      }
    }
  };

  int status = 0;
  for (;;) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    drain();
    if (r == pid) break;
    if (r < 0 && errno != EINTR) {
      handle.add_diagnostic(std::string("waitpid failed: ") + std::strerror(errno));
      status = 0;
      break;
    }
    std::this_thread::sleep_for(options.mark_poll);
  }
  drain();

  RecordResult result;
  if (WIFEXITED(status)) {
    result.exit_status = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_status = 128 + WTERMSIG(status);
  }
  handle.set_child_exit_status(result.exit_status);
  if (!process_error.empty()) handle.add_diagnostic("process monitor: " + process_error);
  result.paths = handle.stop();

  if (monitor.joinable()) {
    monitor.request_stop();
    monitor.join();
    std::string csv(format::kProcessHeader);
    csv += '\n';
    const double origin_s = std::chrono::duration<double>(origin).count();
    for (auto p : process) {
      p.elapsed_s = std::max(0.0, p.elapsed_s - origin_s);
      csv += format_process_row(p);
    }
    const auto path = handle.session_dir() / format::kProcessFile;
    write_file_atomically(path, csv);
    result.paths.process_csv = path;
  }
  return result;
}

// Synthetic sessions -------------------------------------------------------------

TracePaths simulate_session(const ProfileScript& script, const fs::path& out_dir,
                            double period_s) {
  validate(SamplerConfig{period_s, 0, out_dir});
  const auto& profile = script.profile;
  profile.validate();
  if (profile.segments.empty()) {
    throw Error(ErrorKind::InvalidArgument, "profile has no segments");
  }
  const auto total = profile.total_duration();
  const auto period = period_ns(period_s);

  Session session;
  session.meta.period_s = period_s;
  session.meta.device = profile.device;
  session.meta.duration_ms = ceil_ms(total);
  const std::chrono::system_clock::time_point epoch{};
  session.meta.start_wall_utc = format_utc(epoch);
  session.meta.stop_wall_utc =
      format_utc(epoch + std::chrono::duration_cast<std::chrono::system_clock::duration>(total));

  for (std::int64_t k = 0; k * period < total; ++k) {
    const auto t = k * period;
    session.samples.push_back(
        Sample::from_reading(floor_ms(t), profile.device.index, profile.reading_at(t)));
  }

  auto marks = script.marks;
  std::stable_sort(marks.begin(), marks.end(),
                   [](const auto& a, const auto& b) { return a.elapsed_ms < b.elapsed_ms; });
  for (const auto& m : marks) {
    validate_label(m.label);
    if (m.elapsed_ms > *session.meta.duration_ms) {
      throw Error(ErrorKind::InvalidArgument,
                  "mark '" + m.label + "' lies after the end of the profile");
    }
    session.markers.push_back({m.elapsed_ms, m.label});
  }

  prepare_session_dir(out_dir);
  return write_session(session, out_dir);
}

}  // namespace gputrace
