// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "gputrace/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gputrace/error.hpp"
#include "gputrace/text.hpp"
#include "gputrace/units.hpp"

namespace gputrace {

namespace {

constexpr double kFontSize = 11.0;
constexpr double kCharWidth = 6.5;  // rough advance of the sans font at 11px

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return text::format_fixed(v, 2); }

/// 1, 2 or 5 times a power of ten, giving roughly `target` intervals.
double nice_step(double range, int target = 8) {
  if (!(range > 0)) return 1.0;
  const double raw = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

double nice_ceil(double v) {
  if (!(v > 0)) return 1.0;
  const double step = nice_step(v, 5);
  return std::ceil(v / step) * step;
}

std::string tick_label(double v) {
  const double a = std::abs(v);
  auto trimmed = [](double x) {
    auto s = text::format_fixed(x, 2);
    while (s.find('.') != std::string::npos && (s.back() == '0' || s.back() == '.')) {
      const bool dot = s.back() == '.';
      s.pop_back();
      if (dot) break;
    }
    return s;
  };
  if (a >= 1e6) return trimmed(v / 1e6) + "M";
  if (a >= 1e4) return trimmed(v / 1e3) + "k";
  return trimmed(v);
}

class Frame {
 public:
  explicit Frame(const PlotSpec& spec)
      : spec_(spec),
        plot_w_(spec.width_px - PlotMargins::left - PlotMargins::right),
        plot_h_(spec.height_px - PlotMargins::top - PlotMargins::bottom) {}

  double px(double x) const {
    return PlotMargins::left + (x - spec_.x.min) / (spec_.x.max - spec_.x.min) * plot_w_;
  }
  double py(double y, Axis axis) const {
    const auto& a = axis == Axis::Right && spec_.right ? *spec_.right : spec_.left;
    return PlotMargins::top + plot_h_ - (y - a.min) / (a.max - a.min) * plot_h_;
  }
  double left() const { return PlotMargins::left; }
  double right() const { return PlotMargins::left + plot_w_; }
  double top() const { return PlotMargins::top; }
  double bottom() const { return PlotMargins::top + plot_h_; }

 private:
  const PlotSpec& spec_;
  double plot_w_;
  double plot_h_;
};

void check_range(const AxisRange& r, const char* which) {
  if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(r.max > r.min)) {
    throw Error(ErrorKind::InvalidArgument, std::string("empty or invalid ") + which + " range");
  }
}

void y_axis(std::ostringstream& o, const Frame& f, const AxisRange& r, Axis axis) {
  const bool left = axis == Axis::Left;
  const double x = left ? f.left() : f.right();
  const double step = nice_step(r.max - r.min, 5);
  o << "<g class=\"axis axis-" << (left ? "left" : "right") << "\">\n";
  o << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.top()) << "\" x2=\"" << num(x)
    << "\" y2=\"" << num(f.bottom()) << "\" stroke=\"#333\"/>\n";
  for (double v = r.min; v <= r.max + step * 1e-9; v += step) {
    const double y = f.py(v, axis);
    const double tx = left ? x - 6 : x + 6;
    o << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left ? x - 4 : x + 4)
      << "\" y2=\"" << num(y) << "\" stroke=\"#333\"/>\n";
    o << "<text x=\"" << num(tx) << "\" y=\"" << num(y + 4) << "\" text-anchor=\""
      << (left ? "end" : "start") << "\">" << xml_escape(tick_label(v)) << "</text>\n";
  }
  const double lx = left ? 16.0 : f.right() + PlotMargins::right - 16.0;
  const double ly = (f.top() + f.bottom()) / 2;
  o << "<text class=\"axis-label\" x=\"" << num(lx) << "\" y=\"" << num(ly)
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << num(lx) << " " << num(ly) << ")\">"
    << xml_escape(r.label) << "</text>\n";
  o << "</g>\n";
}

void x_axis(std::ostringstream& o, const Frame& f, const AxisRange& r) {
  const double step = nice_step(r.max - r.min, 8);
  o << "<g class=\"axis axis-x\">\n";
  o << "<line x1=\"" << num(f.left()) << "\" y1=\"" << num(f.bottom()) << "\" x2=\""
    << num(f.right()) << "\" y2=\"" << num(f.bottom()) << "\" stroke=\"#333\"/>\n";
  for (double v = std::ceil(r.min / step) * step; v <= r.max + step * 1e-9; v += step) {
    const double x = f.px(v);
    o << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.bottom()) << "\" x2=\"" << num(x)
      << "\" y2=\"" << num(f.bottom() + 4) << "\" stroke=\"#333\"/>\n";
    o << "<text x=\"" << num(x) << "\" y=\"" << num(f.bottom() + 16)
      << "\" text-anchor=\"middle\">" << xml_escape(tick_label(v)) << "</text>\n";
  }
  o << "<text class=\"axis-label\" x=\"" << num((f.left() + f.right()) / 2) << "\" y=\""
    << num(f.bottom() + 40) << "\" text-anchor=\"middle\">" << xml_escape(r.label)
    << "</text>\n";
  o << "</g>\n";
}

void draw_series(std::ostringstream& o, const Frame& f, const PlotSeries& s) {
  if (s.style == SeriesStyle::Scatter) {
    for (const auto& p : s.points) {
      o << "<circle class=\"point\" cx=\"" << num(f.px(p.x)) << "\" cy=\""
        << num(f.py(p.y, s.axis)) << "\" r=\"4\" fill=\"" << s.color << "\"/>\n";
    }
    return;
  }
  auto starts = s.breaks;
  starts.push_back(0);
  starts.push_back(s.points.size());
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  for (std::size_t i = 0; i + 1 < starts.size(); ++i) {
    if (starts[i] >= starts[i + 1]) continue;
    o << "<polyline class=\"series\" data-series=\"" << xml_escape(s.name) << "\" fill=\"none\" stroke=\""
      << s.color << "\" stroke-width=\"1.5\"";
    if (s.style == SeriesStyle::Dashed) o << " stroke-dasharray=\"5 3\"";
    o << " points=\"";
    for (std::size_t k = starts[i]; k < starts[i + 1]; ++k) {
      if (k > starts[i]) o << ' ';
      o << num(f.px(s.points[k].x)) << ',' << num(f.py(s.points[k].y, s.axis));
    }
    o << "\"/>\n";
  }
}

}  // namespace

std::string render_plot(const PlotSpec& spec) {
  if (spec.series.empty()) throw Error(ErrorKind::InvalidArgument, "plot has no series");
  if (spec.width_px <= PlotMargins::left + PlotMargins::right ||
      spec.height_px <= PlotMargins::top + PlotMargins::bottom) {
    throw Error(ErrorKind::InvalidArgument, "plot is smaller than its margins");
  }
  check_range(spec.x, "x");
  check_range(spec.left, "left axis");
  if (spec.right) check_range(*spec.right, "right axis");
  for (const auto& s : spec.series) {
    if (s.axis == Axis::Right && !spec.right) {
      throw Error(ErrorKind::InvalidArgument, "series '" + s.name + "' needs a right axis");
    }
    for (const auto& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw Error(ErrorKind::InvalidArgument, "series '" + s.name + "' has a non-finite point");
      }
    }
  }

  const Frame f(spec);
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width_px << "\" height=\""
    << spec.height_px << "\" viewBox=\"0 0 " << spec.width_px << ' ' << spec.height_px
    << "\" font-family=\"sans-serif\" font-size=\"" << kFontSize << "\">\n";
  o << "<defs><clipPath id=\"plot-area\"><rect x=\"" << num(f.left()) << "\" y=\""
    << num(f.top()) << "\" width=\"" << num(f.right() - f.left()) << "\" height=\""
    << num(f.bottom() - f.top()) << "\"/></clipPath></defs>\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text class=\"title\" x=\"" << num(spec.width_px / 2.0)
    << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(spec.title)
    << "</text>\n";

  x_axis(o, f, spec.x);
  y_axis(o, f, spec.left, Axis::Left);
  if (spec.right) y_axis(o, f, *spec.right, Axis::Right);

  o << "<g clip-path=\"url(#plot-area)\">\n";
  for (const auto& b : spec.bands) {
    o << "<rect class=\"step-band\" x=\"" << num(f.px(b.from)) << "\" y=\"" << num(f.top())
      << "\" width=\"" << num(f.px(b.to) - f.px(b.from)) << "\" height=\"" << num(f.bottom() - f.top())
      << "\" fill=\"#f2f2f2\"/>\n";
  }
  for (const auto& s : spec.series) draw_series(o, f, s);
  if (spec.fit_line) {
    const auto& l = *spec.fit_line;
    o << "<line class=\"trend\" x1=\"" << num(f.px(l.from)) << "\" y1=\""
      << num(f.py(l.intercept + l.slope * l.from, Axis::Left)) << "\" x2=\"" << num(f.px(l.to))
      << "\" y2=\"" << num(f.py(l.intercept + l.slope * l.to, Axis::Left))
      << "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
  }
  o << "</g>\n";

  // Marker lines; labels turn vertical when the neighbour is too close.
  for (std::size_t i = 0; i < spec.vlines.size(); ++i) {
    const auto& v = spec.vlines[i];
    const double x = f.px(v.x);
    double room = f.right() - x;
    if (i + 1 < spec.vlines.size()) room = f.px(spec.vlines[i + 1].x) - x;
    const bool vertical = room < kCharWidth * static_cast<double>(v.label.size()) + 4;
    o << "<line class=\"marker\" x1=\"" << num(x) << "\" y1=\"" << num(f.top()) << "\" x2=\""
      << num(x) << "\" y2=\"" << num(f.bottom()) << "\" stroke=\"#555\" stroke-dasharray=\"3 3\"/>\n";
    const double tx = x + 3;
    const double ty = f.top() + 12;
    o << "<text class=\"marker-label\" x=\"" << num(tx) << "\" y=\"" << num(ty) << "\"";
    if (vertical) {
      o << " transform=\"rotate(90 " << num(tx) << " " << num(ty) << ")\"";
    }
    o << ">" << xml_escape(v.label) << "</text>\n";
  }

  // Legend.
  double ly = f.top() + 4;
  const double lx = f.right() - 170;
  for (const auto& s : spec.series) {
    o << "<g class=\"legend-entry\"><line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\""
      << num(lx + 18) << "\" y2=\"" << num(ly) << "\" stroke=\"" << s.color
      << "\" stroke-width=\"2\"/><text x=\"" << num(lx + 24) << "\" y=\"" << num(ly + 4) << "\">"
      << xml_escape(s.name) << "</text></g>\n";
    ly += 15;
  }
  if (spec.annotation) {
    o << "<text class=\"annotation\" x=\"" << num(f.left() + 10) << "\" y=\"" << num(f.top() + 16)
      << "\">" << xml_escape(*spec.annotation) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

double memory_axis_max_gb(double max_gb) {
  if (!(max_gb > 0)) return 10.0;
  return (std::floor(max_gb / 10.0) + 1.0) * 10.0;
}

PlotSpec usage_plot_spec(const Session& session, const std::vector<Step>& steps) {
  if (session.samples.empty()) {
    throw Error(ErrorKind::EmptySession, "session has no samples to plot");
  }

  PlotSpec spec;
  spec.width_px = 1200;
  spec.height_px = 500;
  spec.title = "Resource usage: " + session.device().name;
  const double duration_s = static_cast<double>(session.duration_ms()) / 1000.0;
  spec.x = {0.0, duration_s > 0 ? duration_s : 1.0, "Elapsed time (s)"};
  spec.left = {0.0, 100.0, "Utilization (%)"};

  PlotSeries util{"GPU utilization", Axis::Left, SeriesStyle::Line, "#1f77b4", {}, {}};
  PlotSeries mem{"GPU memory", Axis::Right, SeriesStyle::Line, "#2ca02c", {}, {}};
  double max_gb = 0.0;
  bool util_gap = false, mem_gap = false;
  for (const auto& s : session.samples) {
    const double t = static_cast<double>(s.elapsed_ms) / 1000.0;
    if (s.gpu_util_pct) {
      if (util_gap) util.breaks.push_back(util.points.size());
      util.points.push_back({t, static_cast<double>(*s.gpu_util_pct)});
    }
    util_gap = !s.gpu_util_pct;
    if (s.mem_used_bytes) {
      if (mem_gap) mem.breaks.push_back(mem.points.size());
      const double gb = bytes_to_gib(*s.mem_used_bytes);
      mem.points.push_back({t, gb});
      max_gb = std::max(max_gb, gb);
    }
    mem_gap = !s.mem_used_bytes;
  }
  spec.series.push_back(std::move(util));
  spec.series.push_back(std::move(mem));

  if (session.process && !session.process->empty()) {
    PlotSeries cpu{"CPU utilization", Axis::Left, SeriesStyle::Dashed, "#ff7f0e", {}, {}};
    PlotSeries rss{"CPU memory (RSS)", Axis::Right, SeriesStyle::Dashed, "#9467bd", {}, {}};
    for (const auto& p : *session.process) {
      cpu.points.push_back({p.elapsed_s, p.cpu_pct});
      const double gb = bytes_to_gib(p.rss);
      rss.points.push_back({p.elapsed_s, gb});
      max_gb = std::max(max_gb, gb);
    }
    spec.series.push_back(std::move(cpu));
    spec.series.push_back(std::move(rss));
  }
  spec.right = AxisRange{0.0, memory_axis_max_gb(max_gb), "Memory (GB)"};

  for (std::size_t i = 1; i < steps.size(); i += 2) {
    spec.bands.push_back({static_cast<double>(steps[i].start_ms) / 1000.0,
                          static_cast<double>(steps[i].end_ms) / 1000.0});
  }
  for (const auto& m : session.markers) {
    spec.vlines.push_back({static_cast<double>(m.elapsed_ms) / 1000.0, m.label});
  }
  return spec;
}

std::string render_usage(const Session& session, const std::vector<Step>& steps) {
  return render_plot(usage_plot_spec(session, steps));
}

PlotSpec scaling_plot_spec(const std::vector<ScalingPoint>& points, const ScalingFit& fit,
                           const ScalingPlotOptions& options) {
  if (points.size() < 2) {
    throw Error(ErrorKind::DegenerateInput, "scaling plot needs at least two points");
  }
  double max_x = 0.0, max_y = 0.0, min_y = 0.0;
  for (const auto& p : points) {
    max_x = std::max(max_x, p.size);
    max_y = std::max(max_y, p.value);
    min_y = std::min(min_y, p.value);
  }
  max_y = std::max({max_y, fit.at(fit.min_size), fit.at(fit.max_size)});
  min_y = std::min({min_y, fit.at(fit.min_size), fit.at(fit.max_size)});

  PlotSpec spec;
  spec.title = options.title;
  spec.x = {0.0, nice_ceil(max_x), options.x_label};
  spec.left = {min_y < 0 ? -nice_ceil(-min_y) : 0.0, nice_ceil(max_y), options.y_label};

  PlotSeries scatter{"measured", Axis::Left, SeriesStyle::Scatter, "#1f77b4", {}, {}};
  for (const auto& p : points) scatter.points.push_back({p.size, p.value});
  spec.series.push_back(std::move(scatter));
  spec.fit_line = PlotSpec::FitLine{fit.slope, fit.intercept, fit.min_size, fit.max_size};

  std::string unit = options.value_unit.empty() ? "" : " " + options.value_unit;
  spec.annotation = "slope " + text::format_fixed(unit_cost(fit, options.unit), 1) + unit +
                    " per " + options.unit_label + ", R² = " + text::format_fixed(fit.r2, 3);
  return spec;
}

std::string render_scaling(const std::vector<ScalingPoint>& points, const ScalingFit& fit,
                           const ScalingPlotOptions& options) {
  return render_plot(scaling_plot_spec(points, fit, options));
}

// Tables -----------------------------------------------------------------------

std::string format_runtime(std::int64_t runtime_ms) {
  const bool neg = runtime_ms < 0;
  const auto a = neg ? -runtime_ms : runtime_ms;
  std::string out = std::to_string(a / 1000);
  if (auto frac = a % 1000; frac != 0) {
    std::string f = std::to_string(frac);
    f.insert(0, 3 - f.size(), '0');
    while (f.back() == '0') f.pop_back();
    out += "." + f;
  }
  return neg ? "-" + out : out;
}

std::string render_table(const std::vector<StepSummary>& rows) {
  const std::vector<std::string> headers = {"Step",          "Runtime (s)",  "GPU mem peak (GB)",
                                            "CPU mem peak (GB)", "GPU util (%)", "Samples"};
  std::vector<std::vector<std::string>> cells;
  auto gb = [](const std::optional<std::uint64_t>& b) {
    return b ? text::format_fixed(bytes_to_gib(*b), 1) : std::string("-");
  };
  for (const auto& r : rows) {
    cells.push_back({r.label, format_runtime(r.runtime_ms), gb(r.peak_gpu_mem_bytes),
                     gb(r.peak_cpu_mem_bytes),
                     r.mean_gpu_util_pct ? text::format_fixed(*r.mean_gpu_util_pct, 1) : "-",
                     std::to_string(r.sample_count)});
  }
  cells.push_back({"Total", format_runtime(total_runtime_ms(rows)), "", "", "", ""});

  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }

  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto pad = width[c] - row[c].size();
      if (c == 0) {
        line += row[c] + std::string(pad, ' ');
      } else {
        line += "  " + std::string(pad, ' ') + row[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  };
  emit(headers);
  std::size_t rule = 0;
  for (auto w : width) rule += w + 2;
  out += std::string(rule - 2, '-') + '\n';
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) emit(cells[i]);
  out += std::string(rule - 2, '-') + '\n';
  emit(cells.back());
  return out;
}

}  // namespace gputrace
