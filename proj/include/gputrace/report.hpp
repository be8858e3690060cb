// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gputrace/analysis.hpp"
#include "gputrace/session.hpp"
#include "gputrace/trace.hpp"

namespace gputrace {

enum class Axis { Left, Right };
enum class SeriesStyle { Line, Dashed, Scatter };

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
};

struct PlotSeries {
  std::string name;
  Axis axis = Axis::Left;
  SeriesStyle style = SeriesStyle::Line;
  std::string color;
  std::vector<PlotPoint> points;
  /// Indices into `points` where a new polyline starts (gaps in the data).
  std::vector<std::size_t> breaks;
};

struct PlotLine {
  double x = 0.0;
  std::string label;
};

struct PlotBand {
  double from = 0.0;
  double to = 0.0;
};

struct AxisRange {
  double min = 0.0;
  double max = 1.0;
  std::string label;
};

/// Everything needed to draw one chart. Data coordinates map to pixels with
///   px = margin_left + (x - x.min) / (x.max - x.min) * plot_width
///   py = margin_top + plot_height - (y - axis.min) / (axis.max - axis.min) * plot_height
/// where plot_width = width - margin_left - margin_right and plot_height =
/// height - margin_top - margin_bottom. Coordinates are written with two
/// decimals.
struct PlotSpec {
  int width_px = 1000;
  int height_px = 500;
  std::string title;
  AxisRange x;
  AxisRange left;
  std::optional<AxisRange> right;
  std::vector<PlotSeries> series;
  std::vector<PlotLine> vlines;
  /// Shaded x intervals [from, to) drawn behind the data.
  std::vector<PlotBand> bands;
  /// value = intercept + slope * x, drawn over [from, to].
  struct FitLine {
    double slope = 0.0;
    double intercept = 0.0;
    double from = 0.0;
    double to = 0.0;
  };
  std::optional<FitLine> fit_line;
  std::optional<std::string> annotation;
};

struct PlotMargins {
  static constexpr double left = 70.0;
  static constexpr double right = 70.0;
  static constexpr double top = 50.0;
  static constexpr double bottom = 60.0;
};

/// Renders a self-contained SVG document. Throws InvalidArgument for a spec
/// without series, with non-finite points, or with an empty axis range.
std::string render_plot(const PlotSpec& spec);

/// Upper bound of the memory axis: the next multiple of 10 GB above `max_gb`.
double memory_axis_max_gb(double max_gb);

/// Usage timeline: GPU utilisation (left, %), GPU memory (right, GB), CPU%
/// and RSS when the session has a process series, and one labelled vertical
/// line per marker; every other step is shaded. Throws EmptySession when the
/// session has no samples.
PlotSpec usage_plot_spec(const Session& session, const std::vector<Step>& steps);
std::string render_usage(const Session& session, const std::vector<Step>& steps);

struct ScalingPlotOptions {
  std::string title = "Scaling";
  std::string x_label = "Cells";
  std::string y_label = "Value";
  std::string value_unit;                 // e.g. "s" or "GB"
  double unit = kDefaultSizeScale;        // size increment for the annotation
  std::string unit_label = "100k cells";  // how that increment is named
};

/// Scatter of the points, the fitted trend line over their size range, and
/// an annotation with the unit cost. Throws DegenerateInput for < 2 points.
PlotSpec scaling_plot_spec(const std::vector<ScalingPoint>& points, const ScalingFit& fit,
                           const ScalingPlotOptions& options = {});
std::string render_scaling(const std::vector<ScalingPoint>& points, const ScalingFit& fit,
                           const ScalingPlotOptions& options = {});

/// Fixed-width table of step summaries with a closing Total row.
std::string render_table(const std::vector<StepSummary>& rows);

/// Runtime in seconds from integer milliseconds without trailing zeros
/// ("62", "0.25").
std::string format_runtime(std::int64_t runtime_ms);

}  // namespace gputrace
