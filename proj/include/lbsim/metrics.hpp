#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lbsim/model.hpp"

namespace lbsim {

struct UtilizationSample {
  Seconds time = 0.0;
  ReplicaId replica_id = 0;
  double utilization = 0.0;
  Rate honored_capacity = 0.0;
};

struct OverloadCounter {
  std::uint64_t overloaded = 0;
  std::uint64_t total = 0;
  bool operator==(const OverloadCounter&) const = default;
};

struct RatioSample {
  Seconds time = 0.0;
  double ratio = 0.0;
};

/// Aggregate demand of one accounting window.
struct DemandSample {
  Seconds time = 0.0;
  std::uint64_t arrivals = 0;
  Rate honored_total = 0.0;
  /// (arrivals / window) / honored_total
  double demand_ratio = 0.0;
};

struct UtilizationSummary {
  double mean = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
};

class MetricsStore {
 public:
  std::string strategy;
  std::uint64_t seed = 0;

  std::vector<UtilizationSample> utilization_series;
  std::map<ReplicaId, OverloadCounter> overload_counters;
  /// Nominal max capacity per replica id, for class labels.
  std::map<ReplicaId, Rate> nominal_capacity;
  std::vector<RatioSample> capacity_ratio_series;
  std::vector<DemandSample> demand_series;

  /// Per-node deliveries of Load, AvailCap and Contract updates.
  std::uint64_t overhead = 0;
  /// Issued Load, AvailCap and Contract updates (before fan-out).
  std::uint64_t update_issues = 0;
  /// Per-node deliveries of Birth and Invalidation messages after t=0.
  std::uint64_t membership_deliveries = 0;
  std::uint64_t generated_requests = 0;
  std::uint64_t lost_requests = 0;

  std::uint64_t audit_checks = 0;
  std::uint64_t audit_violations = 0;

  std::uint64_t delivered_requests() const;
};

/// Fraction of a replica's requests that arrived in overloaded windows;
/// absent when the replica received nothing.
std::optional<double> overloaded_percentage(const MetricsStore& store, ReplicaId id);

/// Mean over replicas that received at least one request.
double mean_overload_pct(const MetricsStore& store);

/// Mean and 5th/95th percentiles (linear interpolation) of a replica's
/// samples; absent when it has none.
std::optional<UtilizationSummary> utilization_summary(const MetricsStore& store, ReplicaId id);

UtilizationSummary summarize(std::vector<double> values);

/// Writes utilization.csv, overload.csv, summary.csv, ratio.csv plus the
/// auxiliary replicas.csv and demand.csv. Returns the paths written.
std::vector<std::filesystem::path> write_csv(const MetricsStore& store,
                                             const std::filesystem::path& out_dir);

/// Rebuilds a store from a directory produced by write_csv. Counters are
/// exact; floating-point series carry the written precision.
MetricsStore read_csv(const std::filesystem::path& dir);

/// %.6g, the precision of the CSV series.
std::string format_number(double value);

}  // namespace lbsim
