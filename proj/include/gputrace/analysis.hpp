// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace gputrace {

/// Workload size (cells or any positive unit) against a measured metric.
struct ScalingPoint {
  double size = 0.0;
  double value = 0.0;
};

/// Least-squares line value = intercept + slope * size.
struct ScalingFit {
  double slope = 0.0;  // value per unit of size
  double intercept = 0.0;
  double r2 = 1.0;
  std::size_t n = 0;
  double min_size = 0.0;
  double max_size = 0.0;

  double at(double size) const { return intercept + slope * size; }
};

inline constexpr double kDefaultSizeScale = 100000.0;

/// Ordinary least squares. Sizes are divided by `size_scale` before the sums
/// are formed, which keeps the centred sums well-scaled for cell counts; the
/// returned slope is per single unit of size. r2 = 1 - SS_res/SS_tot, with
/// r2 = 1 when all values are equal. Throws DegenerateInput for fewer than
/// two distinct sizes and InvalidArgument for non-positive or non-finite
/// inputs.
ScalingFit fit_linear(std::span<const ScalingPoint> points,
                      double size_scale = kDefaultSizeScale);

/// Slope expressed per `unit` of size, e.g. seconds per 100k cells.
double unit_cost(const ScalingFit& fit, double unit);

struct Extrapolation {
  double value = 0.0;
  /// True when size lies outside the fitted range.
  bool extrapolated = false;
};

Extrapolation extrapolate(const ScalingFit& fit, double size);

/// Smallest positive size at which the fitted line reaches `threshold`, or
/// nullopt if it never does for a non-increasing line.
std::optional<double> threshold_crossing(const ScalingFit& fit, double threshold);

/// baseline / accelerated. Throws NonPositiveInput.
double speedup(double total_baseline_s, double total_accelerated_s);

/// peak / capacity. Throws NonPositiveInput for capacity <= 0 or negative peak
/// and PeakExceedsCapacity when peak > capacity.
double headroom(double peak_bytes, double capacity_bytes);

/// One decimal with a multiplication sign, e.g. "30.7×".
std::string format_ratio(double ratio);

/// Fraction as a percentage with one decimal, e.g. "72.4%".
std::string format_percent(double fraction);

}  // namespace gputrace
