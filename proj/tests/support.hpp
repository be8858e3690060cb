// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

// Test-only helpers. Nothing here may call into the code under test's
// computational paths; the oracles are deliberately naive.

#pragma once

#include <cstdint>
#include <optional>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gputrace/analysis.hpp"
#include "gputrace/session.hpp"

namespace testing {

std::filesystem::path fixture(std::string_view name);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path);

/// Checks tag nesting, attribute quoting and entity use. Returns an empty
/// string for well-formed input, otherwise a description of the first
/// problem.
std::string xml_problem(std::string_view doc);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

/// Slope and intercept from the raw normal equations
///   [n   Sx ] [b]   [Sy ]
///   [Sx  Sxx] [m] = [Sxy]
/// solved by Cramer's rule in long double, plus r2 from its own residuals.
struct NormalEquationsFit {
  long double slope = 0;
  long double intercept = 0;
  long double r2 = 0;
};
NormalEquationsFit normal_equations(const std::vector<gputrace::ScalingPoint>& points);

/// Value of the i-th (0-based) of `count` points spaced evenly from
/// (first_size, first_value) to (last_size, last_value).
std::vector<gputrace::ScalingPoint> linear_points(double first_size, double first_value,
                                                  double last_size, double last_value,
                                                  int count);

std::mt19937_64& rng();

/// A valid session with random metadata, samples (some of them gaps),
/// markers (duplicates included, at least `min_markers`), labels drawn from
/// an awkward alphabet, and sometimes a process series.
gputrace::Session random_session(std::mt19937_64& gen, std::size_t min_markers = 0);

/// Step owning time t by brute force: the last marker at or before t whose
/// successor lies after t. Returns the marker's index, or nullopt before the
/// first marker or at/after the duration.
std::optional<std::size_t> owning_marker(const std::vector<gputrace::EventMarker>& markers,
                                         std::int64_t duration_ms, std::int64_t t_ms);

}  // namespace testing
