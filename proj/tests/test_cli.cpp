// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "gputrace/cli.hpp"
#include "gputrace/session.hpp"
#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace gputrace;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(std::string_view name) { return testing::fixture(name).string(); }

}  // namespace

TEST_CASE("simulate then report reproduces the reference step table") {
  testing::TempDir dir;
  const auto sim = run({"simulate", "--profile", fx("pipeline.profile"), "--out", (dir / "s").string()});
  REQUIRE(sim.code == cli::kSuccess);
  const auto rep = run({"report", (dir / "s").string()});
  REQUIRE(rep.code == cli::kSuccess);
  CHECK(rep.out.find("\nTotal                                  152\n") != std::string::npos);
  CHECK(rep.out.find("Peak GPU memory: 101.3 GB (72.4% of 140.0 GB)") != std::string::npos);

  const auto csv = run({"report", (dir / "s").string(), "--steps-csv", "-"});
  REQUIRE(csv.code == cli::kSuccess);
  CHECK(csv.out.starts_with(
      "label,runtime_s,peak_gpu_mem_bytes,peak_cpu_mem_bytes,mean_gpu_util_pct,sample_count\n"
      "Loading,62,64424509440,,1.1290322580645162,62\n"
      "Quality control,4,69793218560,,60,4\n"));

  const auto plot = dir / "u.svg";
  REQUIRE(run({"report", (dir / "s").string(), "--plot", plot.string()}).code == 0);
  CHECK(testing::xml_problem(testing::slurp(plot)).empty());

  const auto parsed = run({"parse", (dir / "s").string()});
  CHECK(parsed.code == 0);
  CHECK(parsed.out ==
        "device 0 Simulated H200 NVL (140.0 GB)\nduration_s 152\nsamples 152\nmarkers 10\n");
}

TEST_CASE("simulate output is reproducible") {
  testing::TempDir dir;
  REQUIRE(run({"simulate", "--profile", fx("pipeline.profile"), "--out", (dir / "a").string()}).code == 0);
  REQUIRE(run({"simulate", "--profile", fx("pipeline.profile"), "--out", (dir / "b").string()}).code == 0);
  for (auto name : {"metrics.csv", "events.csv", "session.meta"}) {
    CHECK(testing::slurp(dir / "a" / name) == testing::slurp(dir / "b" / name));
  }
}

TEST_CASE("scaling output") {
  const auto r = run({"scaling", fx("memory_scaling.csv"), "--metric", "peak_gpu_mem",
                      "--extrapolate", "1400000", "--capacity-gb", "140"});
  REQUIRE(r.code == cli::kSuccess);
  CHECK(r.out.find("points,10\n") != std::string::npos);
  CHECK(r.out.find("unit_cost_display,10.1 GB\n") != std::string::npos);
  CHECK(r.out.find("growth_first_to_last,8.9×\n") != std::string::npos);
  CHECK(r.out.find("r2,1\n") != std::string::npos);
  CHECK(r.out.find(",extrapolated\n") != std::string::npos);
  CHECK(r.out.find("capacity_reached_at,13708") != std::string::npos);

  const auto rt = run({"scaling", fx("runtime_scaling.csv")});
  CHECK(rt.out.find("unit_cost_display,9.7 s\n") != std::string::npos);
  CHECK(rt.out.find("growth_first_to_last,2.4×\n") != std::string::npos);
}

TEST_CASE("scaling over session directories") {
  testing::TempDir dir;
  // Same profile at two sizes: zero slope.
  for (auto name : {"a", "b"}) {
    REQUIRE(run({"simulate", "--profile", fx("three_segments.profile"), "--out",
                 (dir / name).string()}).code == 0);
  }
  const auto r = run({"scaling", (dir / "a").string(), (dir / "b").string(), "--size", "100000",
                      "--size", "200000"});
  CHECK(r.code == 0);
  CHECK(r.out.find("slope_per_size,0\n") != std::string::npos);
  CHECK(r.out.find("intercept,3\n") != std::string::npos);

  const auto missing_sizes = run({"scaling", (dir / "a").string(), (dir / "b").string()});
  CHECK(missing_sizes.code == cli::kUsageError);
}

TEST_CASE("parse-top") {
  const auto r = run({"parse-top", fx("top_batch.txt"), "--pid", "4242"});
  REQUIRE(r.code == 0);
  CHECK(r.out ==
        "elapsed_ms,cpu_pct,rss_bytes\n0,100,1610612736\n1000,99.7,1610612736\n"
        "2000,100,1610612736\n4000,250.5,2147483648\n5000,0,536870912\n");
  CHECK(r.err.find("1 skipped") != std::string::npos);
}

TEST_CASE("exit codes") {
  testing::TempDir dir;
  CHECK(run({}).code == cli::kUsageError);
  CHECK(run({"frobnicate"}).code == cli::kUsageError);
  CHECK(run({"parse", "./missing"}).code == cli::kDataError);
  CHECK(run({"report", "./missing"}).code == cli::kDataError);
  CHECK(run({"record", "--period", "0", "--out", (dir / "r").string(), "--", "true"}).code ==
        cli::kUsageError);
  const auto no_out = run({"record", "--period", "0", "--", "true"});
  CHECK(no_out.code == cli::kUsageError);
  CHECK(no_out.err.find("period") != std::string::npos);
  const auto missing = run({"parse", "./missing"});
  CHECK(missing.err.find("metrics.csv") != std::string::npos);
  CHECK(run({"record", "--backend", "cuda", "--out", (dir / "r").string(), "--", "true"}).code ==
        cli::kUsageError);
  CHECK(run({"scaling", fx("top_batch.txt")}).code == cli::kDataError);
  CHECK(run({"simulate", "--profile", fx("top_batch.txt"), "--out", (dir / "x").string()}).code ==
        cli::kDataError);

  ::unsetenv("GPUTRACE_MARK_FILE");
  ::unsetenv("GPUTRACE_SESSION_DIR");
  const auto mark = run({"mark", "phase"});
  CHECK(mark.code == cli::kEnvironmentError);
  CHECK_FALSE(mark.err.empty());

  ::setenv("GPUTRACE_NVML_LIBRARY", "/nonexistent/libnvidia-ml.so.1", 1);
  CHECK(run({"record", "--backend", "nvml", "--out", (dir / "n").string(), "--", "true"}).code ==
        cli::kEnvironmentError);
  ::unsetenv("GPUTRACE_NVML_LIBRARY");

  // no markers: the table cannot be built
  fs::create_directories(dir / "nm");
  REQUIRE(run({"simulate", "--profile", fx("three_segments.profile"), "--out",
               (dir / "nm").string()}).code == 0);
  std::ofstream(dir / "nm" / "events.csv", std::ios::trunc) << "elapsed_ms,label\n";
  CHECK(run({"report", (dir / "nm").string()}).code == cli::kDataError);
}

TEST_CASE("record with markers from the tool itself") {
  testing::TempDir dir;
  const std::string tool = GPUTRACE_TOOL;
  const auto r = run({"record", "--backend", "sim", "--period", "0.1", "--out",
                      (dir / "rec").string(), "--", "sh", "-c",
                      "'" + tool + "' mark load; sleep 0.4; '" + tool + "' mark 'fit, predict'; sleep 0.4"});
  REQUIRE(r.code == cli::kSuccess);
  const auto s = parse_session(dir / "rec");
  REQUIRE(s.markers.size() == 2);
  CHECK(s.markers[0].label == "load");
  CHECK(s.markers[1].label == "fit, predict");
  CHECK(s.samples.size() >= 7);
  REQUIRE(s.process);

  const auto rep = run({"report", (dir / "rec").string()});
  CHECK(rep.code == 0);
  CHECK(rep.out.find("Peak CPU memory") != std::string::npos);

  // the child's failure is recorded, not propagated
  const auto failing = run({"record", "--backend", "sim", "--period", "0.1", "--out",
                            (dir / "f").string(), "--", "sh", "-c", "exit 4"});
  CHECK(failing.code == cli::kSuccess);
  CHECK(parse_session(dir / "f").meta.child_exit_status == 4);
}
