// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#ifndef GPUTRACE_FIXTURE_DIR
#error "GPUTRACE_FIXTURE_DIR must be defined"
#endif

namespace testing {

namespace fs = std::filesystem;

fs::path fixture(std::string_view name) { return fs::path(GPUTRACE_FIXTURE_DIR) / name; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("gputrace-test-" + std::to_string(getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

namespace {

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
         c == '.';
}

std::string check_text(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '<') return "stray '<' in text";
    if (text[i] == '&') {
      const auto semi = text.find(';', i);
      if (semi == std::string_view::npos) return "unterminated entity";
      const auto ent = text.substr(i + 1, semi - i - 1);
      if (ent != "amp" && ent != "lt" && ent != "gt" && ent != "quot" && ent != "apos" &&
          !(ent.size() > 1 && ent[0] == '#')) {
        return "unknown entity &" + std::string(ent) + ";";
      }
    }
  }
  return {};
}

}  // namespace

std::string xml_problem(std::string_view doc) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  if (doc.starts_with("<?xml")) {
    i = doc.find("?>");
    if (i == std::string_view::npos) return "unterminated declaration";
    i += 2;
  }
  while (i < doc.size()) {
    const auto lt = doc.find('<', i);
    const auto text = doc.substr(i, lt == std::string_view::npos ? doc.size() - i : lt - i);
    if (auto p = check_text(text); !p.empty()) return p;
    if (stack.empty() && text.find_first_not_of(" \t\r\n") != std::string_view::npos) {
      return "text outside the root element";
    }
    if (lt == std::string_view::npos) break;
    const auto gt = doc.find('>', lt);
    if (gt == std::string_view::npos) return "unterminated tag";
    std::string_view tag = doc.substr(lt + 1, gt - lt - 1);
    i = gt + 1;
    if (tag.starts_with("/")) {
      const std::string name(tag.substr(1));
      if (stack.empty() || stack.back() != name) return "mismatched </" + name + ">";
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.ends_with("/");
    if (self_closing) tag.remove_suffix(1);
    std::size_t k = 0;
    while (k < tag.size() && name_char(tag[k])) ++k;
    if (k == 0) return "tag without a name";
    const std::string name(tag.substr(0, k));
    // attributes: name="value"
    while (k < tag.size()) {
      while (k < tag.size() && std::isspace(static_cast<unsigned char>(tag[k]))) ++k;
      if (k >= tag.size()) break;
      const auto a0 = k;
      while (k < tag.size() && name_char(tag[k])) ++k;
      if (k == a0) return "bad attribute in <" + name + ">";
      if (k >= tag.size() || tag[k] != '=') return "attribute without value in <" + name + ">";
      ++k;
      if (k >= tag.size() || (tag[k] != '"' && tag[k] != '\'')) return "unquoted attribute";
      const char q = tag[k++];
      const auto end = tag.find(q, k);
      if (end == std::string_view::npos) return "unterminated attribute value";
      if (auto p = check_text(tag.substr(k, end - k)); !p.empty()) return p;
      k = end + 1;
    }
    if (stack.empty() && root_seen) return "second root element";
    root_seen = true;
    if (!self_closing) stack.push_back(name);
  }
  if (!stack.empty()) return "unclosed <" + stack.back() + ">";
  if (!root_seen) return "no root element";
  return {};
}

NormalEquationsFit normal_equations(const std::vector<gputrace::ScalingPoint>& points) {
  long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const long double x = p.size, y = p.value;
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const long double det = n * sxx - sx * sx;
  NormalEquationsFit fit;
  fit.intercept = (sy * sxx - sx * sxy) / det;
  fit.slope = (n * sxy - sx * sy) / det;
  const long double mean = sy / n;
  long double ss_res = 0, ss_tot = 0;
  for (const auto& p : points) {
    const long double r = p.value - (fit.intercept + fit.slope * p.size);
    ss_res += r * r;
    ss_tot += (p.value - mean) * (p.value - mean);
  }
  fit.r2 = ss_tot == 0 ? 1 : 1 - ss_res / ss_tot;
  return fit;
}

std::vector<gputrace::ScalingPoint> linear_points(double first_size, double first_value,
                                                  double last_size, double last_value,
                                                  int count) {
  std::vector<gputrace::ScalingPoint> pts;
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    pts.push_back({first_size + (last_size - first_size) * f,
                   first_value + (last_value - first_value) * f});
  }
  return pts;
}

std::mt19937_64& rng() {
  static std::mt19937_64 engine(0x5eed'c0de);
  return engine;
}

namespace {

std::string random_label(std::mt19937_64& gen) {
  static const std::vector<std::string> pieces{
      "a", "Z", "7", " ", ",", "\"", "'", "+", "/", "(", ")", "-", "_", ";", "=",
      "\xc3\xa9", "\xe2\x80\x94", "\xe6\x97\xa5", "\t", "PCA", "kNN graph"};
  std::uniform_int_distribution<std::size_t> len(1, 12);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::string out;
  const auto n = len(gen);
  for (std::size_t i = 0; i < n; ++i) out += pieces[pick(gen)];
  return out;
}

}  // namespace

gputrace::Session random_session(std::mt19937_64& gen, std::size_t min_markers) {
  using namespace gputrace;
  auto uni = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen);
  };
  Session s;
  const std::int64_t duration = uni(1, 200000);
  s.meta.start_wall_utc = "2026-10-18T09:" + std::to_string(10 + uni(0, 49)) + ":00.000Z";
  s.meta.stop_wall_utc = "2026-10-18T11:00:00.000Z";
  s.meta.period_s = std::uniform_real_distribution<double>(0.001, 5.0)(gen);
  s.meta.device.index = static_cast<unsigned>(uni(0, 7));
  s.meta.device.name = random_label(gen);
  const std::uint64_t total = static_cast<std::uint64_t>(uni(1, 200)) * (1ULL << 30) + uni(0, 999);
  s.meta.device.memory_total = total;
  s.meta.duration_ms = duration;
  if (uni(0, 1)) s.meta.child_exit_status = static_cast<int>(uni(0, 255));
  for (auto i = uni(0, 3); i > 0; --i) s.meta.diagnostics.push_back(random_label(gen));

  // samples: strictly increasing, < duration
  for (std::int64_t t = uni(0, 50); t < duration; t += uni(1, 3000)) {
    if (uni(0, 9) == 0) {
      s.samples.push_back(Sample::gap(t, s.meta.device.index));
    } else {
      const auto used = std::uniform_int_distribution<std::uint64_t>(0, total)(gen);
      s.samples.push_back(Sample::from_reading(
          t, s.meta.device.index,
          InstantReading(static_cast<std::uint32_t>(uni(0, 100)), used, total,
                         static_cast<std::int32_t>(uni(-10, 110)),
                         static_cast<std::uint32_t>(uni(0, 1000000)))));
    }
  }

  // markers: non-decreasing, <= duration, with deliberate duplicates
  const auto n_markers = static_cast<std::size_t>(uni(static_cast<std::int64_t>(min_markers), 25));
  std::vector<std::int64_t> times;
  for (std::size_t i = 0; i < n_markers; ++i) {
    if (!times.empty() && uni(0, 5) == 0) {
      times.push_back(times.back());
    } else {
      times.push_back(uni(0, duration));
    }
  }
  std::sort(times.begin(), times.end());
  for (auto t : times) s.markers.push_back({t, random_label(gen)});

  if (uni(0, 1)) {
    s.process.emplace();
    for (std::int64_t t = 0; t < duration; t += uni(1, 5000)) {
      s.process->push_back({static_cast<double>(t) / 1000.0,
                            std::uniform_real_distribution<double>(0, 6400)(gen),
                            static_cast<std::uint64_t>(uni(0, 1LL << 42))});
    }
  }
  return s;
}

std::optional<std::size_t> owning_marker(const std::vector<gputrace::EventMarker>& markers,
                                         std::int64_t duration_ms, std::int64_t t_ms) {
  if (t_ms >= duration_ms) return std::nullopt;
  std::optional<std::size_t> owner;
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const auto next = i + 1 < markers.size() ? markers[i + 1].elapsed_ms : duration_ms;
    if (markers[i].elapsed_ms <= t_ms && t_ms < next) owner = i;
  }
  return owner;
}

}  // namespace testing
