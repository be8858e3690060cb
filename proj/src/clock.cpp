// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/clock.hpp"

#include <algorithm>

namespace gputrace {

SteadyClock::SteadyClock() : origin_(std::chrono::steady_clock::now()) {}

std::chrono::nanoseconds SteadyClock::now() const {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                              origin_);
}

bool SteadyClock::sleep_until(std::chrono::nanoseconds deadline, std::stop_token stop) {
  std::unique_lock lock(mutex_);
  const auto wake = origin_ + deadline;
  // Predicate never becomes true; the wait ends on timeout or stop request.
  cv_.wait_until(lock, stop, wake, [] { return false; });
  return !stop.stop_requested();
}

std::chrono::nanoseconds ManualClock::now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

bool ManualClock::sleep_until(std::chrono::nanoseconds deadline, std::stop_token stop) {
  std::unique_lock lock(mutex_);
  const auto entry = sleepers_.insert(deadline);
  cv_.notify_all();
  const bool reached = cv_.wait(lock, stop, [&] { return now_ >= deadline; });
  sleepers_.erase(entry);
  cv_.notify_all();
  return reached && !stop.stop_requested();
}

void ManualClock::advance(std::chrono::nanoseconds delta) {
  {
    std::lock_guard lock(mutex_);
    now_ += delta;
  }
  cv_.notify_all();
}

void ManualClock::advance_to(std::chrono::nanoseconds t) {
  {
    std::lock_guard lock(mutex_);
    now_ = std::max(now_, t);
  }
  cv_.notify_all();
}

bool ManualClock::wait_idle(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  return cv_.wait_for(lock, timeout, [&] {
    return !sleepers_.empty() && *sleepers_.begin() > now_;
  });
}

}  // namespace gputrace
