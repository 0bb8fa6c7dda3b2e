#include <array>

#include "doctest.h"
#include "lbsim/model.hpp"
#include "lbsim/workload.hpp"
#include "oracles.hpp"

using namespace lbsim;

TEST_SUITE("model") {
  TEST_CASE("honored capacity subtracts extraneous load") {
    CHECK(honored_capacity(Replica{.max_capacity = 10}) == 10.0);
    CHECK(honored_capacity(Replica{.max_capacity = 100, .extraneous_load = 50}) == 50.0);
    CHECK(honored_capacity(Replica{.max_capacity = 1, .extraneous_load = 0.5}) == 0.5);
  }

  TEST_CASE("zero extraneous load leaves capacity exact") {
    RngStream rng(3, StreamLabel::Topology);
    for (int i = 0; i < 1000; ++i) {
      const double c = 1e-3 + rng.uniform() * 1e4;
      CHECK(honored_capacity(Replica{.max_capacity = c}) == c);
    }
  }

  TEST_CASE("sample_capacity class boundaries") {
    CHECK(sample_capacity(0.05) == 1.0);
    CHECK(sample_capacity(0.3) == 10.0);
    CHECK(sample_capacity(0.95) == 100.0);
    CHECK(sample_capacity(0.0) == 1.0);
    CHECK(sample_capacity(0.1) == 10.0);
    CHECK(sample_capacity(0.7) == 100.0);
    CHECK(sample_capacity(0.6999999) == 10.0);
  }

  TEST_CASE("expected capacity is 36.1") {
    const CapacityDistribution d;
    const auto expected = oracle::capacity_mean({1, 10, 100}, {0.1, 0.6, 0.3});
    CHECK(static_cast<double>(expected) == doctest::Approx(36.1).epsilon(1e-12));
    CHECK(d.mean() == doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
  }

  TEST_CASE("sample_capacity frequencies over 10^6 draws") {
    RngStream rng(42, StreamLabel::Topology);
    std::array<int, 3> counts{};
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
      const Rate c = sample_capacity(rng.uniform());
      counts[c == 1.0 ? 0 : c == 10.0 ? 1 : 2]++;
    }
    CHECK(std::abs(counts[0] / double(n) - 0.1) <= 0.01);
    CHECK(std::abs(counts[1] / double(n) - 0.6) <= 0.01);
    CHECK(std::abs(counts[2] / double(n) - 0.3) <= 0.01);
  }

  TEST_CASE("peer view follows births and invalidations") {
    PeerView view;
    view.apply({7, UpdateKind::Load, 3.0, 1.0}, 2.0);
    CHECK(view.known_alive.empty());
    CHECK(view.cache.empty());
    view.apply({7, UpdateKind::Birth, 10.0, 2.0}, 3.0);
    CHECK(view.known_alive.count(7) == 1);
    CHECK(view.cache.at(7).contract == 10.0);
    view.apply({7, UpdateKind::Load, 4.0, 3.0}, 4.0);
    CHECK(view.cache.at(7).load == 4.0);
    CHECK(view.cache.at(7).receipt_time == 4.0);
    view.apply({7, UpdateKind::Invalidation, 0.0, 5.0}, 6.0);
    CHECK(view.known_alive.empty());
    CHECK(view.cache.count(7) == 0);
  }

  TEST_CASE("capacity classes") {
    CHECK(capacity_class(1) == "low");
    CHECK(capacity_class(10) == "mid");
    CHECK(capacity_class(100) == "high");
    CHECK(capacity_class(50) == "other");
  }

  TEST_CASE("strategy names round-trip") {
    for (Strategy s : {Strategy::InvLoad, Strategy::AvailCap, Strategy::MaxCap})
      CHECK(parse_strategy(to_string(s)) == s);
    CHECK(parse_strategy("max-cap") == Strategy::MaxCap);
    CHECK_THROWS_AS(parse_strategy("random"), ConfigError);
  }

  TEST_CASE("validate rejects bad configs") {
    ScenarioConfig ok;
    ok.replica_plan.capacities = {10, 100};
    ok.workload.lambda = 10;
    CHECK_NOTHROW(validate(ok));

    auto bad = ok;
    bad.update_period = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = ok;
    bad.replica_plan.distribution.probabilities = {0.1, 0.6, 0.2};
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = ok;
    bad.workload.lambda = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = ok;
    bad.workload.kind = WorkloadKind::Pareto;
    bad.workload.kappa = 0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = ok;
    bad.churn_plan = ChurnPlan{.swap_count = 3};
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = ok;
    bad.overload_window = 2.5;
    CHECK_THROWS_AS(validate(bad), ConfigError);
  }
}
