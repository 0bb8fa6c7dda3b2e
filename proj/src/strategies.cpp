#include "lbsim/strategies.hpp"

#include <algorithm>

namespace lbsim {

namespace {

// Normalizes raw non-negative scores of the alive snapshots; a zero total
// yields a uniform vector.
template <typename Score>
WeightVector proportional(std::span<const ReplicaSnapshot> snapshots, Score score) {
  WeightVector out;
  out.reserve(snapshots.size());
  double total = 0.0;
  for (const auto& s : snapshots) {
    if (!s.alive) continue;
    const double w = score(s);
    out.push_back({s.replica_id, w});
    total += w;
  }
  if (out.empty()) throw NoReplicaAvailable();
  if (total > 0.0) {
    for (auto& w : out) w.probability /= total;
  } else {
    const double uniform = 1.0 / static_cast<double>(out.size());
    for (auto& w : out) w.probability = uniform;
  }
  return out;
}

}  // namespace

WeightVector invload_weights(std::span<const ReplicaSnapshot> snapshots) {
  return proportional(snapshots, [](const ReplicaSnapshot& s) {
    return 1.0 / std::max(s.reported_load, kLoadFloor);
  });
}

WeightVector availcap_weights(std::span<const ReplicaSnapshot> snapshots) {
  return proportional(snapshots, [](const ReplicaSnapshot& s) {
    return std::max(s.reported_avail, 0.0);
  });
}

WeightVector maxcap_weights(std::span<const ReplicaSnapshot> snapshots) {
  return proportional(snapshots, [](const ReplicaSnapshot& s) {
    return std::max(s.reported_contract, 0.0);
  });
}

WeightVector compute_weights(Strategy strategy, std::span<const ReplicaSnapshot> snapshots) {
  switch (strategy) {
    case Strategy::InvLoad: return invload_weights(snapshots);
    case Strategy::AvailCap: return availcap_weights(snapshots);
    case Strategy::MaxCap: return maxcap_weights(snapshots);
  }
  throw NoReplicaAvailable();
}

ReplicaId choose_replica(const WeightVector& weights, double u) {
  if (weights.empty()) throw NoReplicaAvailable();
  double hi = 0.0;
  for (const auto& w : weights) {
    hi += w.probability;
    if (u < hi) return w.replica_id;
  }
  // Rounding can leave the running sum a hair below 1; u then belongs to
  // the last replica with non-zero probability.
  for (auto it = weights.rbegin(); it != weights.rend(); ++it)
    if (it->probability > 0.0) return it->replica_id;
  return weights.back().replica_id;
}

}  // namespace lbsim
