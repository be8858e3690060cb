// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "gputrace/analysis.hpp"
#include "gputrace/error.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>

using namespace gputrace;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected gputrace::Error");
  return ErrorKind::InvalidArgument;
}

bool rel_close(double a, long double b, double tol = 1e-9) {
  return std::fabs(static_cast<long double>(a) - b) <= tol * std::max(1.0L, std::fabs(b));
}

// Ten points between the reference endpoints.
const auto kRuntime = testing::linear_points(1e5, 64.1, 1e6, 151.8, 10);
const auto kMemory = testing::linear_points(1e5, 11.5, 1e6, 102.5, 10);

}  // namespace

TEST_CASE("runtime scaling: 9.744 s per 100k cells") {
  const auto fit = fit_linear(kRuntime);
  const auto oracle = testing::normal_equations(kRuntime);
  CHECK(rel_close(fit.slope, oracle.slope));
  CHECK(rel_close(fit.intercept, oracle.intercept));
  CHECK(unit_cost(fit, 1e5) == doctest::Approx(9.744444444444444).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(54.355555555555554).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.n == 10);
  CHECK(fit.min_size == 1e5);
  CHECK(fit.max_size == 1e6);
  CHECK(format_ratio(unit_cost(fit, 1e5)).starts_with("9.7"));
}

TEST_CASE("memory scaling: 10.111 GB per 100k cells") {
  const auto fit = fit_linear(kMemory);
  const auto oracle = testing::normal_equations(kMemory);
  CHECK(rel_close(fit.slope, oracle.slope));
  CHECK(rel_close(fit.intercept, oracle.intercept));
  CHECK(unit_cost(fit, 1e5) == doctest::Approx(10.11111111111111).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(1.3888888888888888).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("extrapolation and the 140 GB crossing") {
  const auto fit = fit_linear(kMemory);
  const auto at14 = extrapolate(fit, 1.4e6);
  CHECK(at14.extrapolated);
  CHECK(at14.value == doctest::Approx(142.94444444444446).epsilon(1e-12));
  CHECK_FALSE(extrapolate(fit, 5e5).extrapolated);
  const auto cross = threshold_crossing(fit, 140.0);
  REQUIRE(cross);
  CHECK(*cross == doctest::Approx(1370879.120879121).epsilon(1e-12));
  CHECK(*cross >= 1.2e6);
  CHECK(*cross <= 1.5e6);

  const auto rt = fit_linear(kRuntime);
  CHECK(extrapolate(rt, 1.4e6).value == doctest::Approx(190.77777777777777).epsilon(1e-12));

  const ScalingFit flat{0.0, 5.0, 1.0, 2, 1, 2};
  CHECK_FALSE(threshold_crossing(flat, 10.0));
  CHECK(threshold_crossing(flat, 1.0) == 0.0);
}

TEST_CASE("reference ratios") {
  CHECK(speedup(4659.48, 152) == doctest::Approx(30.654473684210522).epsilon(1e-12));
  CHECK(format_ratio(speedup(4659.48, 152)) == "30.7×");
  CHECK(speedup(1938.78, 8) == doctest::Approx(242.3475));
  CHECK(format_ratio(151.8 / 64.1) == "2.4×");
  CHECK(format_ratio(102.5 / 11.5) == "8.9×");
  CHECK(headroom(101.3, 140) == doctest::Approx(0.7235714285714285).epsilon(1e-12));
  CHECK(format_percent(headroom(101.3, 140)) == "72.4%");
  CHECK(format_percent(headroom(64.5, 1536)) == "4.2%");
}

TEST_CASE("input errors") {
  const std::vector<ScalingPoint> one{{1e5, 1}};
  const std::vector<ScalingPoint> same{{1e5, 1}, {1e5, 2}};
  const std::vector<ScalingPoint> zero{{0, 1}, {1e5, 2}};
  const std::vector<ScalingPoint> nan{{1e5, std::nan("")}, {2e5, 2}};
  CHECK(kind_of([&] { fit_linear(one); }) == ErrorKind::DegenerateInput);
  CHECK(kind_of([&] { fit_linear(same); }) == ErrorKind::DegenerateInput);
  CHECK(kind_of([&] { fit_linear(zero); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { fit_linear(nan); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { speedup(0, 1); }) == ErrorKind::NonPositiveInput);
  CHECK(kind_of([] { speedup(1, -1); }) == ErrorKind::NonPositiveInput);
  CHECK(kind_of([] { headroom(1, 0); }) == ErrorKind::NonPositiveInput);
  CHECK(kind_of([] { headroom(-1, 10); }) == ErrorKind::NonPositiveInput);
  CHECK(kind_of([] { headroom(141, 140); }) == ErrorKind::PeakExceedsCapacity);
  CHECK(headroom(140, 140) == 1.0);
}

TEST_CASE("equal values fit a flat line with r2 = 1") {
  const std::vector<ScalingPoint> flat{{1e5, 7}, {2e5, 7}, {3e5, 7}};
  const auto fit = fit_linear(flat);
  CHECK(fit.slope == 0.0);
  CHECK(fit.intercept == doctest::Approx(7.0));
  CHECK(fit.r2 == 1.0);
}

TEST_CASE("collinear points are recovered") {
  auto& gen = testing::rng();
  std::uniform_real_distribution<double> slope(-1e-3, 1e-3), icpt(-100, 100), size(1e3, 5e6);
  for (int trial = 0; trial < 200; ++trial) {
    const double m = slope(gen), b = icpt(gen);
    std::vector<ScalingPoint> pts;
    for (int i = 0; i < 8; ++i) {
      const double x = size(gen);
      pts.push_back({x, b + m * x});
    }
    const auto fit = fit_linear(pts);
    CHECK(fit.slope == doctest::Approx(m).epsilon(1e-9));
    CHECK(fit.intercept == doctest::Approx(b).epsilon(1e-6));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("noisy points agree with the normal-equations oracle") {
  auto& gen = testing::rng();
  std::uniform_real_distribution<double> size(1e4, 2e6), value(0, 500);
  std::uniform_int_distribution<int> count(2, 30);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ScalingPoint> pts;
    const int n = count(gen);
    for (int i = 0; i < n; ++i) pts.push_back({size(gen), value(gen)});
    const auto fit = fit_linear(pts);
    const auto oracle = testing::normal_equations(pts);
    CHECK(rel_close(fit.slope, oracle.slope, 1e-9));
    CHECK(std::fabs(fit.intercept - static_cast<double>(oracle.intercept)) <= 1e-9 * 500);
    CHECK(std::fabs(fit.r2 - static_cast<double>(oracle.r2)) <= 1e-9);
    CHECK(fit.r2 >= 0.0);
    CHECK(fit.r2 <= 1.0);
  }
}

TEST_CASE("affine transforms of the values carry through") {
  auto& gen = testing::rng();
  std::uniform_real_distribution<double> size(1e4, 2e6), value(0, 500), a(0.1, 10), c(-50, 50);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScalingPoint> pts, scaled;
    for (int i = 0; i < 6; ++i) pts.push_back({size(gen), value(gen)});
    const double k = a(gen), off = c(gen);
    for (const auto& p : pts) scaled.push_back({p.size, k * p.value + off});
    const auto f = fit_linear(pts), g = fit_linear(scaled);
    CHECK(g.slope == doctest::Approx(k * f.slope).epsilon(1e-9));
    CHECK(g.intercept == doctest::Approx(k * f.intercept + off).epsilon(1e-9).scale(500));
    CHECK(g.r2 == doctest::Approx(f.r2).epsilon(1e-9));
  }
}

TEST_CASE("the size scale does not change the fit") {
  for (double scale : {1.0, 1e3, 1e5, 1e6}) {
    const auto fit = fit_linear(kRuntime, scale);
    CHECK(unit_cost(fit, 1e5) == doctest::Approx(9.744444444444444).epsilon(1e-10));
  }
  const auto fit = fit_linear(kRuntime);
  CHECK(unit_cost(fit, 1e6) == doctest::Approx(10 * unit_cost(fit, 1e5)));
}

TEST_CASE("speedup reciprocity") {
  auto& gen = testing::rng();
  std::uniform_real_distribution<double> t(1e-3, 1e5);
  for (int i = 0; i < 200; ++i) {
    const double a = t(gen), b = t(gen);
    CHECK(speedup(a, b) * speedup(b, a) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
