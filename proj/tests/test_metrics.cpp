#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lbsim/engine.hpp"
#include "lbsim/metrics.hpp"
#include "lbsim/scenario.hpp"

using namespace lbsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lbsim-metrics-" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("overloaded percentage") {
    MetricsStore m;
    m.overload_counters[0] = {25, 100};
    m.overload_counters[1] = {0, 40};
    m.overload_counters[2] = {0, 0};
    CHECK(overloaded_percentage(m, 0) == 0.25);
    CHECK(overloaded_percentage(m, 1) == 0.0);
    CHECK_FALSE(overloaded_percentage(m, 2).has_value());
    CHECK_FALSE(overloaded_percentage(m, 9).has_value());
    CHECK(mean_overload_pct(m) == doctest::Approx(0.125));
  }

  TEST_CASE("summary of a constant series") {
    MetricsStore m;
    for (int t = 1; t <= 50; ++t) m.utilization_series.push_back({double(t), 3, 0.8, 10});
    const auto s = utilization_summary(m, 3);
    REQUIRE(s.has_value());
    CHECK(s->mean == doctest::Approx(0.8));
    CHECK(s->p5 == doctest::Approx(0.8));
    CHECK(s->p95 == doctest::Approx(0.8));
    CHECK_FALSE(utilization_summary(m, 4).has_value());
  }

  TEST_CASE("percentiles interpolate") {
    std::vector<double> v;
    for (int i = 0; i <= 100; ++i) v.push_back(i);
    const auto s = summarize(v);
    CHECK(s.mean == doctest::Approx(50));
    CHECK(s.p5 == doctest::Approx(5));
    CHECK(s.p95 == doctest::Approx(95));
  }

  TEST_CASE("empty store writes headers only") {
    const auto dir = scratch("empty");
    const auto files = write_csv(MetricsStore{}, dir);
    CHECK(files.size() == 6);
    CHECK(lines_of(dir / "utilization.csv") ==
          std::vector<std::string>{"time,replica_id,utilization,honored_capacity"});
    CHECK(lines_of(dir / "overload.csv") ==
          std::vector<std::string>{"replica_id,class,total,overloaded,pct"});
    CHECK(lines_of(dir / "summary.csv") ==
          std::vector<std::string>{"strategy,seed,overhead_updates,lost_requests,mean_overload_pct"});
    CHECK(lines_of(dir / "ratio.csv") == std::vector<std::string>{"time,ratio"});
    fs::remove_all(dir);
  }

  TEST_CASE("golden files for a small store") {
    MetricsStore m;
    m.strategy = "maxcap";
    m.seed = 7;
    m.overhead = 2048;
    m.lost_requests = 3;
    m.nominal_capacity = {{0, 10}, {1, 100}};
    m.overload_counters = {{0, {1, 3}}, {1, {0, 12}}};
    m.utilization_series = {{1, 0, 2.0 / 3, 10}, {1, 1, 0.12, 100}};
    m.capacity_ratio_series = {{1, 1.0}};
    const auto dir = scratch("golden");
    write_csv(m, dir);
    CHECK(lines_of(dir / "utilization.csv") ==
          std::vector<std::string>{"time,replica_id,utilization,honored_capacity",
                                   "1,0,0.666667,10", "1,1,0.12,100"});
    CHECK(lines_of(dir / "overload.csv") ==
          std::vector<std::string>{"replica_id,class,total,overloaded,pct",
                                   "0,mid,3,1,0.3333333333333333", "1,high,12,0,0"});
    CHECK(lines_of(dir / "summary.csv") ==
          std::vector<std::string>{"strategy,seed,overhead_updates,lost_requests,mean_overload_pct",
                                   "maxcap,7,2048,3,0.166667"});
    CHECK(lines_of(dir / "ratio.csv") == std::vector<std::string>{"time,ratio", "1,1"});
    fs::remove_all(dir);
  }

  TEST_CASE("one sample gives one row") {
    MetricsStore m;
    m.utilization_series.push_back({1, 0, 0.5, 10});
    const auto dir = scratch("one");
    write_csv(m, dir);
    CHECK(lines_of(dir / "utilization.csv").size() == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("run output: rows, pct column and round trip") {
    auto c = preset("dynamic-5-60");
    c.duration_s = 1500;
    const auto m = run(c);
    const auto dir = scratch("run");
    write_csv(m, dir);

    const auto util = lines_of(dir / "utilization.csv");
    CHECK(util.size() - 1 == m.utilization_series.size());

    for (std::size_t i = 1; const auto& line : lines_of(dir / "overload.csv")) {
      if (i++ == 1) continue;
      const auto f = split(line);
      const double total = std::stod(f[2]);
      const double overloaded = std::stod(f[3]);
      if (total > 0) CHECK(std::abs(std::stod(f[4]) - overloaded / total) <= 1e-9);
    }

    const auto back = read_csv(dir);
    CHECK(back.overload_counters == m.overload_counters);
    CHECK(back.lost_requests == m.lost_requests);
    CHECK(back.overhead == m.overhead);
    CHECK(back.generated_requests == m.generated_requests);
    CHECK(back.strategy == m.strategy);
    CHECK(back.seed == m.seed);
    CHECK(back.nominal_capacity == m.nominal_capacity);
    CHECK(back.utilization_series.size() == m.utilization_series.size());
    fs::remove_all(dir);
  }

  TEST_CASE("unwritable path raises IoError with the path") {
    const auto blocker = scratch("blocker");
    std::ofstream(blocker) << "x";
    try {
      write_csv(MetricsStore{}, blocker / "sub");
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.path().find("blocker") != std::string::npos);
    }
    fs::remove_all(blocker);
  }
}
