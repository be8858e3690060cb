// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "gputrace/error.hpp"
#include "gputrace/text.hpp"

namespace gputrace {

ScalingFit fit_linear(std::span<const ScalingPoint> points, double size_scale) {
  if (!(size_scale > 0) || !std::isfinite(size_scale)) {
    throw Error(ErrorKind::InvalidArgument, "size scale must be positive");
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.size) || !std::isfinite(p.value)) {
      throw Error(ErrorKind::InvalidArgument, "scaling points must be finite");
    }
    if (p.size <= 0) throw Error(ErrorKind::InvalidArgument, "scaling sizes must be positive");
  }
  if (points.size() < 2) {
    throw Error(ErrorKind::DegenerateInput, "need at least two points to fit a line");
  }
  const auto [lo, hi] = std::minmax_element(
      points.begin(), points.end(), [](const auto& a, const auto& b) { return a.size < b.size; });
  if (lo->size == hi->size) {
    throw Error(ErrorKind::DegenerateInput, "all points have the same size");
  }

  const double n = static_cast<double>(points.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& p : points) {
    mean_x += p.size / size_scale;
    mean_y += p.value;
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = p.size / size_scale - mean_x;
    const double dy = p.value - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  const double scaled_slope = syy == 0.0 ? 0.0 : sxy / sxx;
  ScalingFit fit;
  fit.intercept = mean_y - scaled_slope * mean_x;
  fit.slope = scaled_slope / size_scale;
  fit.n = points.size();
  fit.min_size = lo->size;
  fit.max_size = hi->size;

  if (syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (const auto& p : points) {
      const double r = p.value - (fit.intercept + scaled_slope * (p.size / size_scale));
      ss_res += r * r;
    }
    fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

double unit_cost(const ScalingFit& fit, double unit) { return fit.slope * unit; }

Extrapolation extrapolate(const ScalingFit& fit, double size) {
  if (!(size > 0)) throw Error(ErrorKind::InvalidArgument, "size must be positive");
  return {fit.at(size), size < fit.min_size || size > fit.max_size};
}

std::optional<double> threshold_crossing(const ScalingFit& fit, double threshold) {
  if (fit.slope <= 0.0) {
    if (fit.intercept >= threshold) return 0.0;
    return std::nullopt;
  }
  return std::max(0.0, (threshold - fit.intercept) / fit.slope);
}

double speedup(double total_baseline_s, double total_accelerated_s) {
  if (!(total_baseline_s > 0) || !(total_accelerated_s > 0)) {
    throw Error(ErrorKind::NonPositiveInput, "speedup needs two positive totals");
  }
  return total_baseline_s / total_accelerated_s;
}

double headroom(double peak_bytes, double capacity_bytes) {
  if (!(capacity_bytes > 0) || peak_bytes < 0) {
    throw Error(ErrorKind::NonPositiveInput, "capacity must be positive and peak non-negative");
  }
  if (peak_bytes > capacity_bytes) {
    throw Error(ErrorKind::PeakExceedsCapacity, "peak " + text::format_double(peak_bytes) +
                                                    " exceeds capacity " +
                                                    text::format_double(capacity_bytes));
  }
  return peak_bytes / capacity_bytes;
}

std::string format_ratio(double ratio) { return text::format_fixed(ratio, 1) + "×"; }

std::string format_percent(double fraction) {
  return text::format_fixed(fraction * 100.0, 1) + "%";
}

}  // namespace gputrace
