// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gputrace/clock.hpp"

namespace gputrace {

struct DeviceInfo {
  unsigned index = 0;
  std::string name;
  std::uint64_t memory_total = 0;  // bytes

  friend bool operator==(const DeviceInfo&, const DeviceInfo&) = default;
};

/// One consistent set of device counters. Out-of-range values are rejected
/// by the constructor (ErrorKind::InvalidReading), so every instance that
/// exists satisfies the field invariants.
class InstantReading {
 public:
  InstantReading(std::uint32_t gpu_utilization, std::uint64_t memory_used,
                 std::uint64_t memory_total, std::int32_t temperature_c,
                 std::uint32_t power_draw_mw);

  std::uint32_t gpu_utilization() const { return gpu_utilization_; }  // percent
  std::uint64_t memory_used() const { return memory_used_; }          // bytes
  std::uint64_t memory_total() const { return memory_total_; }        // bytes
  std::int32_t temperature_c() const { return temperature_c_; }
  std::uint32_t power_draw_mw() const { return power_draw_mw_; }

  friend bool operator==(const InstantReading&, const InstantReading&) = default;

 private:
  std::uint32_t gpu_utilization_;
  std::uint64_t memory_used_;
  std::uint64_t memory_total_;
  std::int32_t temperature_c_;
  std::uint32_t power_draw_mw_;
};

/// Source of device metrics. A handle is driven by one sampling thread at a
/// time; independent handles are independent.
class DeviceBackend {
 public:
  virtual ~DeviceBackend() = default;

  virtual std::string_view kind() const = 0;
  virtual std::vector<DeviceInfo> enumerate_devices() = 0;
  virtual InstantReading read_instant(unsigned device_index) = 0;

  DeviceInfo device(unsigned device_index);
};

struct SimSegment {
  std::chrono::nanoseconds duration{0};
  std::uint32_t gpu_utilization = 0;
  std::uint64_t memory_used = 0;
  std::int32_t temperature_c = 0;
  std::uint32_t power_draw_mw = 0;
};

/// Piecewise-constant script of readings. Segment i covers the half-open
/// window [start_i, start_i + duration_i); past the end the last segment
/// holds.
struct SimProfile {
  DeviceInfo device{0, "Simulated H200 NVL", 140ULL * 1024 * 1024 * 1024};
  std::vector<SimSegment> segments;

  /// Throws InvalidArgument when a segment has non-positive duration or does
  /// not fit the device.
  void validate() const;
  std::chrono::nanoseconds total_duration() const;
  InstantReading reading_at(std::chrono::nanoseconds elapsed) const;
};

class SimBackend final : public DeviceBackend {
 public:
  SimBackend(SimProfile profile, std::shared_ptr<const Clock> clock);

  /// A backend that enumerates no devices.
  static std::unique_ptr<SimBackend> without_devices(std::shared_ptr<const Clock> clock);

  std::string_view kind() const override { return "sim"; }
  std::vector<DeviceInfo> enumerate_devices() override;
  InstantReading read_instant(unsigned device_index) override;

  const SimProfile& profile() const { return *profile_; }

 private:
  SimBackend(std::optional<SimProfile> profile, std::shared_ptr<const Clock> clock, int);

  std::optional<SimProfile> profile_;
  std::shared_ptr<const Clock> clock_;
};

/// NVML loaded at run time, so the binary runs on hosts without a driver.
/// The library is opened and initialised on first use and shut down when the
/// backend is destroyed.
class NvmlBackend final : public DeviceBackend {
 public:
  static constexpr const char* kDefaultLibrary = "libnvidia-ml.so.1";

  explicit NvmlBackend(std::filesystem::path library = kDefaultLibrary);
  ~NvmlBackend() override;
  NvmlBackend(const NvmlBackend&) = delete;
  NvmlBackend& operator=(const NvmlBackend&) = delete;

  std::string_view kind() const override { return "nvml"; }
  std::vector<DeviceInfo> enumerate_devices() override;
  InstantReading read_instant(unsigned device_index) override;

 private:
  struct Api;
  Api& api();

  std::filesystem::path library_;
  std::mutex init_mutex_;
  std::unique_ptr<Api> api_;
};

enum class BackendKind { Auto, Nvml, Sim };

std::optional<BackendKind> parse_backend_kind(std::string_view text);

/// Resolves a backend choice. Auto tries NVML and falls back to the simulated
/// backend, reporting the reason through `fallback_reason`.
std::unique_ptr<DeviceBackend> make_backend(BackendKind kind, const SimProfile& sim_profile,
                                            std::shared_ptr<const Clock> clock,
                                            std::string* fallback_reason = nullptr);

// Profile description files -------------------------------------------------

struct ScriptedMark {
  std::int64_t elapsed_ms = 0;
  std::string label;
};

/// A simulation script: readings plus the markers to emit while replaying it.
struct ProfileScript {
  SimProfile profile;
  std::vector<ScriptedMark> marks;
};

/// Line-oriented format, one record per line:
///   duration_s,gpu_util_pct,mem_used_gb,temp_c,power_w
///   mark,<elapsed_s>,<label>
///   device,<name>,<mem_total_gb>
/// Blank lines and lines starting with '#' are ignored.
ProfileScript parse_profile(std::string_view text);
ProfileScript load_profile(const std::filesystem::path& path);

}  // namespace gputrace
