// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <set>
#include <stop_token>

namespace gputrace {

/// Monotonic time source measured from the clock's own origin. The sampler,
/// the simulated backend and the process monitor all read elapsed time
/// through this interface so tests can drive them on virtual time.
class Clock {
 public:
  virtual ~Clock() = default;

  virtual std::chrono::nanoseconds now() const = 0;

  /// Blocks until now() >= deadline. Returns false if `stop` was requested
  /// first.
  virtual bool sleep_until(std::chrono::nanoseconds deadline, std::stop_token stop) = 0;
};

/// Wall-independent real time; origin is the moment of construction.
class SteadyClock final : public Clock {
 public:
  SteadyClock();
  explicit SteadyClock(std::chrono::steady_clock::time_point origin) : origin_(origin) {}

  std::chrono::nanoseconds now() const override;
  bool sleep_until(std::chrono::nanoseconds deadline, std::stop_token stop) override;

  std::chrono::steady_clock::time_point origin() const { return origin_; }

 private:
  std::chrono::steady_clock::time_point origin_;
  std::mutex mutex_;
  std::condition_variable_any cv_;
};

/// Virtual time that only moves when told to. Sleepers wake once the clock
/// is advanced past their deadline.
class ManualClock final : public Clock {
 public:
  std::chrono::nanoseconds now() const override;
  bool sleep_until(std::chrono::nanoseconds deadline, std::stop_token stop) override;

  void advance(std::chrono::nanoseconds delta);
  void advance_to(std::chrono::nanoseconds t);

  /// Waits until some thread is blocked in sleep_until() on a deadline that
  /// lies in the future, i.e. everything due at the current time has run.
  /// Returns false on timeout (real time).
  bool wait_idle(std::chrono::milliseconds timeout = std::chrono::seconds(5));

 private:
  mutable std::mutex mutex_;
  std::condition_variable_any cv_;
  std::chrono::nanoseconds now_{0};
  std::multiset<std::chrono::nanoseconds> sleepers_;
};

}  // namespace gputrace
