// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/device.hpp"

#include <dlfcn.h>

#include <array>
#include <cmath>
#include <string>

#include "gputrace/error.hpp"
#include "gputrace/text.hpp"
#include "gputrace/units.hpp"

namespace gputrace {

InstantReading::InstantReading(std::uint32_t gpu_utilization, std::uint64_t memory_used,
                               std::uint64_t memory_total, std::int32_t temperature_c,
                               std::uint32_t power_draw_mw)
    : gpu_utilization_(gpu_utilization),
      memory_used_(memory_used),
      memory_total_(memory_total),
      temperature_c_(temperature_c),
      power_draw_mw_(power_draw_mw) {
  if (gpu_utilization > 100) {
    throw Error(ErrorKind::InvalidReading,
                "gpu utilization " + std::to_string(gpu_utilization) + "% out of [0,100]");
  }
  if (memory_used > memory_total) {
    throw Error(ErrorKind::InvalidReading, "memory used " + std::to_string(memory_used) +
                                               " exceeds total " + std::to_string(memory_total));
  }
}

DeviceInfo DeviceBackend::device(unsigned device_index) {
  for (auto& info : enumerate_devices()) {
    if (info.index == device_index) return info;
  }
  throw Error(ErrorKind::UnknownDevice,
              "no device with index " + std::to_string(device_index) + " on " +
                  std::string(kind()) + " backend");
}

// Simulated backend ----------------------------------------------------------

void SimProfile::validate() const {
  if (device.memory_total == 0) {
    throw Error(ErrorKind::InvalidArgument, "simulated device has zero memory");
  }
  if (segments.empty()) throw Error(ErrorKind::InvalidArgument, "profile has no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    const auto where = "segment " + std::to_string(i + 1) + ": ";
    if (seg.duration <= std::chrono::nanoseconds::zero()) {
      throw Error(ErrorKind::InvalidArgument, where + "duration must be positive");
    }
    if (seg.gpu_utilization > 100) {
      throw Error(ErrorKind::InvalidArgument, where + "utilization above 100%");
    }
    if (seg.memory_used > device.memory_total) {
      throw Error(ErrorKind::InvalidArgument, where + "memory used exceeds device capacity");
    }
  }
}

std::chrono::nanoseconds SimProfile::total_duration() const {
  std::chrono::nanoseconds total{0};
  for (const auto& seg : segments) total += seg.duration;
  return total;
}

InstantReading SimProfile::reading_at(std::chrono::nanoseconds elapsed) const {
  if (segments.empty()) {
    return InstantReading(0, 0, device.memory_total, 0, 0);
  }
  const SimSegment* active = &segments.back();
  std::chrono::nanoseconds start{0};
  for (const auto& seg : segments) {
    if (elapsed < start + seg.duration) {
      active = &seg;
      break;
    }
    start += seg.duration;
  }
  return InstantReading(active->gpu_utilization, active->memory_used, device.memory_total,
                        active->temperature_c, active->power_draw_mw);
}

SimBackend::SimBackend(SimProfile profile, std::shared_ptr<const Clock> clock)
    : SimBackend(std::optional<SimProfile>(std::move(profile)), std::move(clock), 0) {}

SimBackend::SimBackend(std::optional<SimProfile> profile, std::shared_ptr<const Clock> clock, int)
    : profile_(std::move(profile)), clock_(std::move(clock)) {
  if (!clock_) throw Error(ErrorKind::InvalidArgument, "simulated backend needs a clock");
  if (profile_) profile_->validate();
}

std::unique_ptr<SimBackend> SimBackend::without_devices(std::shared_ptr<const Clock> clock) {
  return std::unique_ptr<SimBackend>(new SimBackend(std::nullopt, std::move(clock), 0));
}

std::vector<DeviceInfo> SimBackend::enumerate_devices() {
  if (!profile_) return {};
  return {profile_->device};
}

InstantReading SimBackend::read_instant(unsigned device_index) {
  if (!profile_ || device_index != profile_->device.index) {
    throw Error(ErrorKind::UnknownDevice,
                "no simulated device with index " + std::to_string(device_index));
  }
  return profile_->reading_at(clock_->now());
}

// NVML backend ---------------------------------------------------------------

namespace {

// Subset of nvml.h; the ABI of these entry points is stable across drivers.
using nvmlReturn_t = int;
using nvmlDevice_t = struct nvmlDevice_st*;
constexpr nvmlReturn_t kNvmlSuccess = 0;
constexpr nvmlReturn_t kNvmlErrorNotSupported = 3;
constexpr int kNvmlTemperatureGpu = 0;
constexpr unsigned kNvmlDeviceNameBufferSize = 96;

struct nvmlMemory_t {
  unsigned long long total;
  unsigned long long free;
  unsigned long long used;
};

struct nvmlUtilization_t {
  unsigned int gpu;
  unsigned int memory;
};

}  // namespace

struct NvmlBackend::Api {
  void* handle = nullptr;
  nvmlReturn_t (*init)() = nullptr;
  nvmlReturn_t (*shutdown)() = nullptr;
  const char* (*error_string)(nvmlReturn_t) = nullptr;
  nvmlReturn_t (*device_count)(unsigned*) = nullptr;
  nvmlReturn_t (*handle_by_index)(unsigned, nvmlDevice_t*) = nullptr;
  nvmlReturn_t (*name)(nvmlDevice_t, char*, unsigned) = nullptr;
  nvmlReturn_t (*memory_info)(nvmlDevice_t, nvmlMemory_t*) = nullptr;
  nvmlReturn_t (*utilization)(nvmlDevice_t, nvmlUtilization_t*) = nullptr;
  nvmlReturn_t (*temperature)(nvmlDevice_t, int, unsigned*) = nullptr;
  nvmlReturn_t (*power_usage)(nvmlDevice_t, unsigned*) = nullptr;

  std::string describe(nvmlReturn_t rc) const {
    const char* msg = error_string ? error_string(rc) : nullptr;
    return msg ? std::string(msg) : "NVML error " + std::to_string(rc);
  }
};

namespace {

template <typename Fn>
void bind(void* handle, Fn& fn, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (void* sym = dlsym(handle, n)) {
      fn = reinterpret_cast<Fn>(sym);
      return;
    }
  }
  throw Error(ErrorKind::BackendUnavailable,
              std::string("NVML library lacks symbol ") + *names.begin());
}

}  // namespace

NvmlBackend::NvmlBackend(std::filesystem::path library) : library_(std::move(library)) {}

NvmlBackend::~NvmlBackend() {
  if (api_) {
    api_->shutdown();
    dlclose(api_->handle);
  }
}

NvmlBackend::Api& NvmlBackend::api() {
  std::lock_guard lock(init_mutex_);
  if (api_) return *api_;

  auto api = std::make_unique<Api>();
  api->handle = dlopen(library_.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!api->handle) {
    const char* why = dlerror();
    throw Error(ErrorKind::BackendUnavailable, "cannot load NVML library " + library_.string() +
                                                   (why ? std::string(": ") + why : ""));
  }
  try {
    bind(api->handle, api->init, {"nvmlInit_v2", "nvmlInit"});
    bind(api->handle, api->shutdown, {"nvmlShutdown"});
    bind(api->handle, api->error_string, {"nvmlErrorString"});
    bind(api->handle, api->device_count, {"nvmlDeviceGetCount_v2", "nvmlDeviceGetCount"});
    bind(api->handle, api->handle_by_index,
         {"nvmlDeviceGetHandleByIndex_v2", "nvmlDeviceGetHandleByIndex"});
    bind(api->handle, api->name, {"nvmlDeviceGetName"});
    bind(api->handle, api->memory_info, {"nvmlDeviceGetMemoryInfo"});
    bind(api->handle, api->utilization, {"nvmlDeviceGetUtilizationRates"});
    bind(api->handle, api->temperature, {"nvmlDeviceGetTemperature"});
    bind(api->handle, api->power_usage, {"nvmlDeviceGetPowerUsage"});
  } catch (...) {
    dlclose(api->handle);
    throw;
  }
  if (auto rc = api->init(); rc != kNvmlSuccess) {
    const auto msg = api->describe(rc);
    dlclose(api->handle);
    throw Error(ErrorKind::BackendUnavailable, "nvmlInit failed: " + msg);
  }
  api_ = std::move(api);
  return *api_;
}

std::vector<DeviceInfo> NvmlBackend::enumerate_devices() {
  auto& nvml = api();
  unsigned count = 0;
  if (auto rc = nvml.device_count(&count); rc != kNvmlSuccess) {
    throw Error(ErrorKind::BackendUnavailable, "nvmlDeviceGetCount: " + nvml.describe(rc));
  }
  std::vector<DeviceInfo> devices;
  for (unsigned i = 0; i < count; ++i) {
    nvmlDevice_t dev = nullptr;
    if (auto rc = nvml.handle_by_index(i, &dev); rc != kNvmlSuccess) {
      throw Error(ErrorKind::ReadFailure, "nvmlDeviceGetHandleByIndex: " + nvml.describe(rc));
    }
    std::array<char, kNvmlDeviceNameBufferSize> name{};
    if (nvml.name(dev, name.data(), name.size()) != kNvmlSuccess) name[0] = '\0';
    nvmlMemory_t mem{};
    if (auto rc = nvml.memory_info(dev, &mem); rc != kNvmlSuccess) {
      throw Error(ErrorKind::ReadFailure, "nvmlDeviceGetMemoryInfo: " + nvml.describe(rc));
    }
    if (mem.total == 0) continue;
    devices.push_back(DeviceInfo{i, std::string(name.data()), mem.total});
  }
  return devices;
}

InstantReading NvmlBackend::read_instant(unsigned device_index) {
  auto& nvml = api();
  unsigned count = 0;
  if (auto rc = nvml.device_count(&count); rc != kNvmlSuccess) {
    throw Error(ErrorKind::ReadFailure, "nvmlDeviceGetCount: " + nvml.describe(rc));
  }
  if (device_index >= count) {
    throw Error(ErrorKind::UnknownDevice, "no NVML device with index " +
                                              std::to_string(device_index));
  }
  nvmlDevice_t dev = nullptr;
  if (auto rc = nvml.handle_by_index(device_index, &dev); rc != kNvmlSuccess) {
    throw Error(ErrorKind::ReadFailure, "nvmlDeviceGetHandleByIndex: " + nvml.describe(rc));
  }
  nvmlUtilization_t util{};
  if (auto rc = nvml.utilization(dev, &util); rc != kNvmlSuccess) {
    throw Error(ErrorKind::ReadFailure, "nvmlDeviceGetUtilizationRates: " + nvml.describe(rc));
  }
  nvmlMemory_t mem{};
  if (auto rc = nvml.memory_info(dev, &mem); rc != kNvmlSuccess) {
    throw Error(ErrorKind::ReadFailure, "nvmlDeviceGetMemoryInfo: " + nvml.describe(rc));
  }
  // Temperature and power are unsupported on some boards; report 0 there
  // rather than losing the whole row.
  unsigned temp = 0;
  if (auto rc = nvml.temperature(dev, kNvmlTemperatureGpu, &temp);
      rc != kNvmlSuccess && rc != kNvmlErrorNotSupported) {
    throw Error(ErrorKind::ReadFailure, "nvmlDeviceGetTemperature: " + nvml.describe(rc));
  }
  unsigned power = 0;
  if (auto rc = nvml.power_usage(dev, &power);
      rc != kNvmlSuccess && rc != kNvmlErrorNotSupported) {
    throw Error(ErrorKind::ReadFailure, "nvmlDeviceGetPowerUsage: " + nvml.describe(rc));
  }
  try {
    return InstantReading(util.gpu, mem.used, mem.total, static_cast<std::int32_t>(temp), power);
  } catch (const Error& e) {
    throw Error(ErrorKind::ReadFailure, std::string("inconsistent NVML reading: ") + e.what());
  }
}

// Backend selection ----------------------------------------------------------

std::optional<BackendKind> parse_backend_kind(std::string_view text) {
  if (text == "auto") return BackendKind::Auto;
  if (text == "nvml") return BackendKind::Nvml;
  if (text == "sim") return BackendKind::Sim;
  return std::nullopt;
}

std::unique_ptr<DeviceBackend> make_backend(BackendKind kind, const SimProfile& sim_profile,
                                            std::shared_ptr<const Clock> clock,
                                            std::string* fallback_reason) {
  if (kind == BackendKind::Sim) return std::make_unique<SimBackend>(sim_profile, clock);

  const char* override_path = std::getenv("GPUTRACE_NVML_LIBRARY");
  auto nvml = std::make_unique<NvmlBackend>(override_path ? override_path
                                                          : NvmlBackend::kDefaultLibrary);
  if (kind == BackendKind::Nvml) {
    nvml->enumerate_devices();  // surfaces BackendUnavailable now
    return nvml;
  }
  try {
    nvml->enumerate_devices();
    return nvml;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BackendUnavailable) throw;
    if (fallback_reason) *fallback_reason = e.what();
    return std::make_unique<SimBackend>(sim_profile, clock);
  }
}

// Profile files --------------------------------------------------------------

namespace {

[[noreturn]] void profile_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::InvalidArgument,
              "profile line " + std::to_string(line_no) + ": " + what);
}

double number_field(const std::string& field, std::size_t line_no, const char* name) {
  auto v = text::parse_double(text::trim(field));
  if (!v) profile_error(line_no, std::string("bad ") + name + " '" + field + "'");
  return *v;
}

std::chrono::nanoseconds seconds_to_ns(double s) {
  return std::chrono::nanoseconds(std::llround(s * 1e9));
}

}  // namespace

ProfileScript parse_profile(std::string_view content) {
  ProfileScript script;
  std::size_t line_no = 0;
  for (auto raw : text::split_lines(content)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = text::split_csv(line);
    if (!fields) profile_error(line_no, "unbalanced quotes");
    const auto& f = *fields;

    if (f[0] == "mark") {
      if (f.size() != 3) profile_error(line_no, "expected mark,<elapsed_s>,<label>");
      const double at = number_field(f[1], line_no, "elapsed_s");
      if (at < 0) profile_error(line_no, "negative mark time");
      if (f[2].empty()) profile_error(line_no, "empty mark label");
      script.marks.push_back({std::llround(at * 1000.0), f[2]});
    } else if (f[0] == "device") {
      if (f.size() != 3) profile_error(line_no, "expected device,<name>,<mem_total_gb>");
      const double gb = number_field(f[2], line_no, "mem_total_gb");
      if (gb <= 0) profile_error(line_no, "device memory must be positive");
      script.profile.device.name = f[1];
      script.profile.device.memory_total = gib_to_bytes(gb);
    } else {
      if (f.size() != 5) {
        profile_error(line_no, "expected duration_s,gpu_util_pct,mem_used_gb,temp_c,power_w");
      }
      const double duration = number_field(f[0], line_no, "duration_s");
      const double util = number_field(f[1], line_no, "gpu_util_pct");
      const double mem = number_field(f[2], line_no, "mem_used_gb");
      const double temp = number_field(f[3], line_no, "temp_c");
      const double power = number_field(f[4], line_no, "power_w");
      if (duration <= 0) profile_error(line_no, "duration must be positive");
      if (util < 0 || util > 100) profile_error(line_no, "utilization out of [0,100]");
      if (mem < 0) profile_error(line_no, "negative memory");
      if (power < 0) profile_error(line_no, "negative power");
      script.profile.segments.push_back(SimSegment{
          seconds_to_ns(duration), static_cast<std::uint32_t>(std::lround(util)),
          gib_to_bytes(mem), static_cast<std::int32_t>(std::lround(temp)),
          static_cast<std::uint32_t>(std::llround(power * 1000.0))});
    }
  }
  script.profile.validate();
  return script;
}

ProfileScript load_profile(const std::filesystem::path& path) {
  return parse_profile(text::read_file(path));
}

}  // namespace gputrace
