#include "lbsim/model.hpp"

#include <cmath>
#include <numeric>

namespace lbsim {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::InvLoad: return "invload";
    case Strategy::AvailCap: return "availcap";
    case Strategy::MaxCap: return "maxcap";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "invload" || name == "inv-load") return Strategy::InvLoad;
  if (name == "availcap" || name == "avail-cap") return Strategy::AvailCap;
  if (name == "maxcap" || name == "max-cap") return Strategy::MaxCap;
  throw ConfigError("strategy: unknown value '" + std::string(name) + "'");
}

std::string_view to_string(UpdateKind k) {
  switch (k) {
    case UpdateKind::Load: return "load";
    case UpdateKind::AvailCap: return "availcap";
    case UpdateKind::Contract: return "contract";
    case UpdateKind::Birth: return "birth";
    case UpdateKind::Invalidation: return "invalidation";
  }
  return "?";
}

Rate honored_capacity(const Replica& replica) {
  return replica.max_capacity - replica.extraneous_load;
}

void PeerView::apply(const LbiUpdate& update, Seconds now) {
  const ReplicaId id = update.replica_id;
  if (update.kind == UpdateKind::Birth) {
    known_alive.insert(id);
    CachedLbi& entry = cache[id];
    // A newcomer is announced idle: no load, all of its contract available.
    entry = CachedLbi{};
    entry.contract = update.value;
    entry.avail = update.value;
    entry.load_issued = entry.avail_issued = entry.contract_issued = update.issue_time;
    entry.receipt_time = now;
    return;
  }
  if (update.kind == UpdateKind::Invalidation) {
    known_alive.erase(id);
    cache.erase(id);
    return;
  }
  auto it = cache.find(id);
  if (it == cache.end()) return;
  CachedLbi& entry = it->second;
  switch (update.kind) {
    case UpdateKind::Load:
      entry.load = update.value;
      entry.load_issued = update.issue_time;
      break;
    case UpdateKind::AvailCap:
      entry.avail = update.value;
      entry.avail_issued = update.issue_time;
      break;
    case UpdateKind::Contract:
      entry.contract = update.value;
      entry.contract_issued = update.issue_time;
      break;
    default: break;
  }
  entry.receipt_time = now;
}

Rate CapacityDistribution::sample(double u) const {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return capacities[i];
  }
  return capacities.back();
}

Rate CapacityDistribution::mean() const {
  return std::inner_product(capacities.begin(), capacities.end(),
                            probabilities.begin(), 0.0);
}

Rate sample_capacity(double u) {
  if (u < 0.1) return 1.0;
  if (u < 0.7) return 10.0;
  return 100.0;
}

namespace {

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw ConfigError(std::string(field) + ": " + why);
}

}  // namespace

void validate(const ScenarioConfig& c) {
  require(c.node_count > 0, "node_count", "must be positive");
  require(c.duration_s >= 0 && std::isfinite(c.duration_s), "duration",
          "must be finite and non-negative");
  require(c.update_period > 0 && std::isfinite(c.update_period),
          "update_period", "must be positive");
  require(c.hop_delay >= 0 && std::isfinite(c.hop_delay), "hop_delay",
          "must be non-negative");
  require(c.max_tree_depth >= 1, "max_tree_depth", "must be at least 1");
  require(c.window_s > 0 && std::isfinite(c.window_s), "window", "must be positive");
  require(c.overload_window >= c.window_s && std::isfinite(c.overload_window) &&
              std::abs(c.overload_window / c.window_s -
                       std::round(c.overload_window / c.window_s)) < 1e-9,
          "overload_window", "must be a whole number of accounting windows");
  require(c.load_window > 0 && std::isfinite(c.load_window), "load_window", "must be positive");

  const auto& plan = c.replica_plan;
  require(plan.capacities.empty() != (plan.sample_count == 0), "replicas",
          "give either an explicit capacity list or replica_sample");
  for (Rate cap : plan.capacities)
    require(cap > 0 && std::isfinite(cap), "replicas", "capacities must be positive");
  const auto& dist = plan.distribution;
  require(!dist.capacities.empty() && dist.capacities.size() == dist.probabilities.size(),
          "capacity_distribution", "needs matching capacity/probability pairs");
  double psum = 0.0;
  for (std::size_t i = 0; i < dist.capacities.size(); ++i) {
    require(dist.capacities[i] > 0, "capacity_distribution", "capacities must be positive");
    require(dist.probabilities[i] >= 0, "capacity_distribution",
            "probabilities must be non-negative");
    psum += dist.probabilities[i];
  }
  require(std::abs(psum - 1.0) < 1e-9, "capacity_distribution",
          "probabilities must sum to 1");

  const auto& w = c.workload;
  if (w.kind == WorkloadKind::Poisson) {
    if (w.rate_fraction)
      require(*w.rate_fraction > 0, "rate_fraction", "must be positive");
    else
      require(w.lambda > 0, "lambda", "must be positive");
  } else {
    require(w.alpha > 0, "alpha", "must be positive");
    require(w.kappa > 0, "kappa", "must be positive");
  }

  const std::size_t initial =
      plan.capacities.empty() ? plan.sample_count : plan.capacities.size();
  if (c.churn_plan) {
    const auto& ch = *c.churn_plan;
    require(ch.interval > 0, "churn_interval", "must be positive");
    require(ch.start >= 0, "churn_start", "must be non-negative");
    require(ch.swap_count <= initial, "churn_swap",
            "exceeds the number of alive replicas");
    require(ch.pool_size >= initial + ch.swap_count, "churn_pool",
            "must hold the initial replicas plus one swap of newcomers");
  }
  if (c.extraneous_plan) {
    const auto& x = *c.extraneous_plan;
    require(x.interval > 0, "xload_interval", "must be positive");
    require(x.fraction_min >= 0 && x.fraction_min <= x.fraction_max, "xload_min",
            "must satisfy 0 <= xload_min <= xload_max");
    // Keeps honored capacity strictly positive so utilization stays finite.
    require(x.fraction_max < 1.0, "xload_max", "must be below 1");
  }
}

std::string_view capacity_class(Rate max_capacity) {
  if (max_capacity == 1.0) return "low";
  if (max_capacity == 10.0) return "mid";
  if (max_capacity == 100.0) return "high";
  return "other";
}

}  // namespace lbsim
