#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "lbsim/engine.hpp"
#include "lbsim/scenario.hpp"

using namespace lbsim;
namespace fs = std::filesystem;

namespace {

// A run with (practically) no generated traffic, driven by hand.
ScenarioConfig quiet(Strategy s, std::vector<Rate> caps) {
  ScenarioConfig c;
  c.strategy = s;
  c.node_count = 16;
  c.duration_s = 20;
  c.overload_window = 1;
  c.replica_plan.capacities = std::move(caps);
  c.workload.lambda = 1e-12;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_csv(const MetricsStore& a, const MetricsStore& b, const std::string& tag) {
  const fs::path root = fs::temp_directory_path() / ("lbsim-engine-" + tag);
  fs::remove_all(root);
  const auto fa = write_csv(a, root / "a");
  write_csv(b, root / "b");
  bool same = true;
  for (const auto& f : fa) same = same && slurp(f) == slurp(root / "b" / f.filename());
  fs::remove_all(root);
  return same;
}

std::uint64_t delivered(const MetricsStore& m) {
  std::uint64_t n = 0;
  for (const auto& [id, c] : m.overload_counters) n += c.total;
  return n;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("zero duration yields empty metrics") {
    auto c = preset("maxcap-hetero-80");
    c.duration_s = 0;
    Simulation sim(c);
    sim.run();
    CHECK(sim.events_executed() == 0);
    CHECK(sim.metrics().utilization_series.empty());
    CHECK(sim.metrics().generated_requests == 0);
  }

  TEST_CASE("invalid config is rejected before running") {
    auto c = preset("maxcap-hetero-80");
    c.update_period = -1;
    CHECK_THROWS_AS(Simulation{c}, ConfigError);
    CHECK_THROWS_AS(run(c), ConfigError);
  }

  TEST_CASE("single replica gets every request") {
    for (Strategy s : {Strategy::InvLoad, Strategy::AvailCap, Strategy::MaxCap}) {
      Simulation sim(quiet(s, {10}));
      for (NodeId n = 0; n < 16; ++n) CHECK(sim.route_request(n, 0.7) == ReplicaId{0});
      CHECK(sim.replicas().at(0).replica.window_arrivals == 16);
    }
  }

  TEST_CASE("window tick accounting") {
    SUBCASE("25 arrivals against 10") {
      Simulation sim(quiet(Strategy::MaxCap, {10}));
      for (int i = 0; i < 25; ++i) sim.route_request(0, 0.5);
      sim.run_until(1.0);
      const auto& s = sim.metrics().utilization_series.at(0);
      CHECK(s.utilization == doctest::Approx(2.5));
      CHECK(sim.metrics().overload_counters.at(0).overloaded == 25);
    }
    SUBCASE("8 arrivals against 10") {
      Simulation sim(quiet(Strategy::MaxCap, {10}));
      for (int i = 0; i < 8; ++i) sim.route_request(0, 0.5);
      sim.run_until(1.0);
      CHECK(sim.metrics().utilization_series.at(0).utilization == doctest::Approx(0.8));
      CHECK(sim.metrics().overload_counters.at(0).overloaded == 0);
    }
    SUBCASE("6 arrivals against honored 5") {
      Simulation sim(quiet(Strategy::MaxCap, {10}));
      sim.set_extraneous(0, 0.5);
      for (int i = 0; i < 6; ++i) sim.route_request(0, 0.5);
      sim.run_until(1.0);
      const auto& s = sim.metrics().utilization_series.at(0);
      CHECK(s.honored_capacity == doctest::Approx(5.0));
      CHECK(s.utilization == doctest::Approx(1.2));
      CHECK(sim.metrics().overload_counters.at(0).overloaded == 6);
    }
  }

  TEST_CASE("avail-cap reports") {
    auto reported_after = [](int arrivals) {
      auto c = quiet(Strategy::AvailCap, {10});
      c.hop_delay = 0;
      c.load_window = 1;
      c.update_period = 1000;
      c.duration_s = 2000;
      Simulation sim(c);
      sim.run_until(1.5);
      for (int i = 0; i < arrivals; ++i) sim.route_request(0, 0.5);
      sim.run_until(2.0);
      sim.handle_update_issue(0, sim.replicas().at(0).incarnation);
      sim.run_until(2.0);
      const auto& lbi = sim.view_for_level(1).cache.at(0);
      CHECK(lbi.avail_issued == 2.0);
      return lbi.avail;
    };
    CHECK(reported_after(25) == 0.0);
    CHECK(reported_after(2) == doctest::Approx(8.0));
  }

  TEST_CASE("max-cap issues nothing without extraneous change") {
    auto c = preset("maxcap-hetero-80");
    c.duration_s = 200;
    const auto m = run(c);
    CHECK(m.overhead == 0);
    CHECK(m.update_issues == 0);
  }

  TEST_CASE("max-cap contract updates are rate limited") {
    auto c = quiet(Strategy::MaxCap, {10, 100});
    c.update_period = 5;
    c.hop_delay = 0;
    Simulation sim(c);
    sim.run_until(1);
    sim.set_extraneous(1, 0.5);
    sim.run_until(1);
    CHECK(sim.view_for_level(1).cache.at(1).contract == 50.0);
    sim.run_until(2);
    sim.set_extraneous(1, 0.2);
    sim.run_until(5.9);
    CHECK(sim.view_for_level(1).cache.at(1).contract == 50.0);
    sim.run_until(6);
    CHECK(sim.view_for_level(1).cache.at(1).contract == 80.0);
    CHECK(sim.metrics().update_issues == 2);
  }

  TEST_CASE("newcomer is not eligible before its birth arrives") {
    auto c = quiet(Strategy::MaxCap, {10, 10});
    c.hop_delay = 1;
    c.node_count = 64;
    c.churn_plan = ChurnPlan{.start = 10, .interval = 1000, .swap_count = 1, .pool_size = 50};
    Simulation sim(c);
    sim.run_until(10);
    ReplicaId newcomer = 0;
    for (const auto& [id, st] : sim.replicas())
      if (id >= 2 && st.replica.alive) newcomer = id;
    REQUIRE(newcomer >= 2);
    NodeId deep = 0;
    while (sim.level_of(deep) != 5) ++deep;
    CHECK(sim.view_for_node(deep).known_alive.count(newcomer) == 0);
    for (int i = 0; i < 100; ++i) CHECK(sim.route_request(deep, i / 100.0) != newcomer);
    sim.run_until(14.5);
    CHECK(sim.view_for_node(deep).known_alive.count(newcomer) == 0);
    sim.run_until(15);
    CHECK(sim.view_for_node(deep).known_alive.count(newcomer) == 1);
  }

  TEST_CASE("churn keeps the alive count") {
    for (std::size_t swaps : {1u, 5u}) {
      auto c = preset(swaps == 1 ? "dynamic-1-60" : "dynamic-5-60");
      c.duration_s = 700;
      Simulation sim(c);
      sim.run_until(599);
      std::set<ReplicaId> before;
      for (const auto& [id, st] : sim.replicas())
        if (st.replica.alive) before.insert(id);
      sim.run_until(600);
      std::set<ReplicaId> after;
      for (const auto& [id, st] : sim.replicas())
        if (st.replica.alive) after.insert(id);
      CHECK(after.size() == 10);
      std::size_t kept = 0;
      for (auto id : after) kept += before.count(id);
      CHECK(kept == 10 - swaps);
    }
  }

  TEST_CASE("no churn keeps the replica set") {
    auto c = preset("maxcap-hetero-80");
    c.duration_s = 300;
    Simulation sim(c);
    sim.run();
    CHECK(sim.replicas().size() == 10);
    CHECK(sim.alive_count() == 10);
  }

  TEST_CASE("conservation") {
    for (const char* name : {"dynamic-1-60", "dynamic-5-60", "availcap-hetero-80", "pareto-maxcap"}) {
      auto c = preset(name);
      c.duration_s = 1200;
      const auto m = run(c);
      CHECK(delivered(m) + m.lost_requests == m.generated_requests);
      CHECK(m.delivered_requests() == delivered(m));
    }
  }

  TEST_CASE("determinism") {
    auto c = preset("dynamic-5-60");
    c.duration_s = 900;
    c.extraneous_plan = ExtraneousPlan{};
    Simulation a(c), b(c);
    a.run();
    b.run();
    CHECK(a.trace_digest() == b.trace_digest());
    CHECK(a.events_executed() == b.events_executed());
    CHECK(same_csv(a.metrics(), b.metrics(), "det"));
    c.seed += 1;
    Simulation d(c);
    d.run();
    CHECK(d.trace_digest() != a.trace_digest());
  }

  TEST_CASE("staleness audit finds no violations") {
    for (const char* name : {"availcap-hetero-80", "xload-maxcap-u10", "dynamic-5-60"}) {
      auto c = preset(name);
      c.duration_s = name[0] == 'd' ? 800 : 120;
      const auto m = run(c, {.audit = true});
      CHECK(m.audit_checks > 0);
      CHECK(m.audit_violations == 0);
    }
  }

  TEST_CASE("max-cap shares follow contracts") {
    auto c = quiet(Strategy::MaxCap, {10, 100});
    c.workload.lambda = 100;
    c.duration_s = 1000;
    const auto m = run(c);
    const double total = double(m.generated_requests);
    CHECK(total > 90'000);
    CHECK(std::abs(m.overload_counters.at(0).total / total - 1.0 / 11) <= 0.01);
    CHECK(std::abs(m.overload_counters.at(1).total / total - 10.0 / 11) <= 0.01);
  }

  TEST_CASE("update overhead counts") {
    for (const char* name : {"invload-hetero-80", "availcap-hetero-80"}) {
      auto c = preset(name);
      c.duration_s = 100;
      const auto m = run(c);
      CHECK(m.update_issues == 100 * 10);
      CHECK(m.overhead == 100ull * 10 * 1024);
    }
  }

  TEST_CASE("max-cap ignores propagation delay") {
    auto c = preset("maxcap-hetero-80");
    c.duration_s = 600;
    c.hop_delay = 0;
    const auto a = run(c);
    c.hop_delay = 1;
    const auto b = run(c);
    CHECK(same_csv(a, b, "hop-maxcap"));

    auto d = preset("availcap-hetero-80");
    d.duration_s = 600;
    d.hop_delay = 0;
    const auto e = run(d);
    d.hop_delay = 1;
    const auto f = run(d);
    CHECK_FALSE(same_csv(e, f, "hop-availcap"));
  }

  TEST_CASE("utilization row count") {
    auto c = preset("maxcap-hetero-80");
    const auto m = run(c);
    CHECK(m.utilization_series.size() == 30000);
    CHECK(m.capacity_ratio_series.size() == 3000);
  }
}
