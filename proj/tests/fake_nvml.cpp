// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

// Stand-in for libnvidia-ml used to exercise the NVML backend without a GPU.
// Two devices with fixed readings. Environment switches:
//   FAKE_NVML_INIT_FAIL  nvmlInit returns an error
//   FAKE_NVML_READ_FAIL  utilisation queries return an error

#include <cstdlib>
#include <cstring>

namespace {

struct Device {
  const char* name;
  unsigned long long total;
  unsigned long long used;
  unsigned util;
  unsigned temp;
  unsigned power_mw;
};

constexpr unsigned long long kGiB = 1024ULL * 1024 * 1024;
Device g_devices[] = {
    {"Fake H200 NVL", 140 * kGiB, 10 * kGiB, 42, 55, 250000},
    {"Fake A100", 80 * kGiB, 1 * kGiB, 7, 40, 90000},
};
int g_init_count = 0;

bool env(const char* name) { return std::getenv(name) != nullptr; }

}  // namespace

extern "C" {

struct nvmlDevice_st;
typedef nvmlDevice_st* nvmlDevice_t;
struct nvmlMemory_t {
  unsigned long long total, free, used;
};
struct nvmlUtilization_t {
  unsigned int gpu, memory;
};

int nvmlInit_v2() {
  if (env("FAKE_NVML_INIT_FAIL")) return 9;  // NVML_ERROR_DRIVER_NOT_LOADED
  ++g_init_count;
  return 0;
}

int nvmlShutdown() {
  --g_init_count;
  return 0;
}

const char* nvmlErrorString(int rc) { return rc == 9 ? "Driver Not Loaded" : "Unknown Error"; }

int nvmlDeviceGetCount_v2(unsigned* count) {
  *count = 2;
  return 0;
}

int nvmlDeviceGetHandleByIndex_v2(unsigned index, nvmlDevice_t* dev) {
  if (index >= 2) return 2;  // NVML_ERROR_INVALID_ARGUMENT
  *dev = reinterpret_cast<nvmlDevice_t>(&g_devices[index]);
  return 0;
}

int nvmlDeviceGetName(nvmlDevice_t dev, char* name, unsigned length) {
  std::strncpy(name, reinterpret_cast<Device*>(dev)->name, length - 1);
  name[length - 1] = '\0';
  return 0;
}

int nvmlDeviceGetMemoryInfo(nvmlDevice_t dev, nvmlMemory_t* mem) {
  const auto* d = reinterpret_cast<Device*>(dev);
  mem->total = d->total;
  mem->used = d->used;
  mem->free = d->total - d->used;
  return 0;
}

int nvmlDeviceGetUtilizationRates(nvmlDevice_t dev, nvmlUtilization_t* util) {
  if (env("FAKE_NVML_READ_FAIL")) return 15;  // NVML_ERROR_GPU_IS_LOST
  util->gpu = reinterpret_cast<Device*>(dev)->util;
  util->memory = 0;
  return 0;
}

int nvmlDeviceGetTemperature(nvmlDevice_t dev, int, unsigned* temp) {
  *temp = reinterpret_cast<Device*>(dev)->temp;
  return 0;
}

int nvmlDeviceGetPowerUsage(nvmlDevice_t dev, unsigned* mw) {
  // Second board reports "not supported", as consumer parts do.
  if (reinterpret_cast<Device*>(dev) == &g_devices[1]) return 3;
  *mw = reinterpret_cast<Device*>(dev)->power_mw;
  return 0;
}

int fake_nvml_init_count() { return g_init_count; }

}  // extern "C"
