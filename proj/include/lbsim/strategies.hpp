#pragma once

#include <span>
#include <utility>
#include <vector>

#include "lbsim/model.hpp"

namespace lbsim {

/// The three LBI metrics one peer holds for one replica at one instant.
struct ReplicaSnapshot {
  ReplicaId replica_id = 0;
  Rate reported_load = 0.0;
  Rate reported_avail = 0.0;
  Rate reported_contract = 0.0;
  bool alive = true;
};

struct WeightedReplica {
  ReplicaId replica_id = 0;
  double probability = 0.0;
  bool operator==(const WeightedReplica&) const = default;
};

/// Ordered (replica, probability) pairs over alive replicas, summing to 1.
using WeightVector = std::vector<WeightedReplica>;

/// Inv-Load divides by the reported load clamped to this floor.
inline constexpr Rate kLoadFloor = 1.0;

WeightVector invload_weights(std::span<const ReplicaSnapshot> snapshots);

/// Replicas reporting zero available capacity are excluded; if every alive
/// replica reports zero the allocation falls back to uniform.
WeightVector availcap_weights(std::span<const ReplicaSnapshot> snapshots);

WeightVector maxcap_weights(std::span<const ReplicaSnapshot> snapshots);

WeightVector compute_weights(Strategy strategy, std::span<const ReplicaSnapshot> snapshots);

/// Picks the replica whose half-open cumulative interval [lo, hi) holds u.
ReplicaId choose_replica(const WeightVector& weights, double u);

}  // namespace lbsim
