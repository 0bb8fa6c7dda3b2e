#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lbsim {

using ReplicaId = std::uint32_t;
using NodeId = std::uint32_t;

// Rates are requests/second, times are seconds.
using Rate = double;
using Seconds = double;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NoReplicaAvailable : public std::runtime_error {
 public:
  NoReplicaAvailable() : std::runtime_error("no replica available") {}
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::string path)
      : std::runtime_error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Strategy { InvLoad, AvailCap, MaxCap };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

/// A serving node. `max_capacity` is the advertised contract C; the
/// extraneous load e eats into it.
struct Replica {
  ReplicaId id = 0;
  Rate max_capacity = 1.0;
  Rate extraneous_load = 0.0;
  std::uint64_t window_arrivals = 0;
  std::uint64_t last_window_arrivals = 0;
  bool alive = true;
  std::optional<Seconds> birth_time;
  std::optional<Seconds> death_time;
};

/// C - e. Never negative while the Replica invariants hold.
Rate honored_capacity(const Replica& replica);

enum class UpdateKind { Load, AvailCap, Contract, Birth, Invalidation };

std::string_view to_string(UpdateKind k);

/// An LBI report travelling down the update tree. A Birth carries the
/// replica's contract in `value`.
struct LbiUpdate {
  ReplicaId replica_id = 0;
  UpdateKind kind = UpdateKind::Load;
  Rate value = 0.0;
  Seconds issue_time = 0.0;
};

/// Latest LBI a peer holds for one replica.
struct CachedLbi {
  Rate load = 0.0;
  Rate avail = 0.0;
  Rate contract = 0.0;
  Seconds load_issued = 0.0;
  Seconds avail_issued = 0.0;
  Seconds contract_issued = 0.0;
  Seconds receipt_time = 0.0;
};

/// Possibly stale cache of per-replica LBI. Every peer at the same tree
/// level receives each update at the same instant, so one view is kept per
/// level and shared by all peers on it.
struct PeerView {
  int tree_level = 1;
  std::map<ReplicaId, CachedLbi> cache;
  std::set<ReplicaId> known_alive;

  void apply(const LbiUpdate& update, Seconds now);
};

/// Discrete capacity classes with probabilities.
struct CapacityDistribution {
  std::vector<Rate> capacities{1.0, 10.0, 100.0};
  std::vector<double> probabilities{0.1, 0.6, 0.3};

  Rate sample(double u) const;
  Rate mean() const;
  bool operator==(const CapacityDistribution&) const = default;
};

/// Heterogeneous peer classes: 1, 10 and 100 req/s with probabilities
/// 0.1, 0.6 and 0.3.
Rate sample_capacity(double u);

enum class WorkloadKind { Poisson, Pareto };

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::Poisson;
  Rate lambda = 0.0;
  double alpha = 1.1;
  double kappa = 0.000346;
  /// When set, lambda is derived as this fraction of the total maximum
  /// capacity of the initial replica set.
  std::optional<double> rate_fraction;
  bool operator==(const WorkloadSpec&) const = default;
};

/// Either an explicit capacity list or `sample_count` draws from
/// `distribution`.
struct ReplicaPlan {
  std::vector<Rate> capacities;
  std::size_t sample_count = 0;
  CapacityDistribution distribution;
  bool operator==(const ReplicaPlan&) const = default;
};

struct ChurnPlan {
  Seconds start = 600.0;
  Seconds interval = 60.0;
  std::size_t swap_count = 1;
  std::size_t pool_size = 50;
  bool operator==(const ChurnPlan&) const = default;
};

struct ExtraneousPlan {
  Seconds interval = 1.0;
  double fraction_min = 0.0;
  double fraction_max = 0.5;
  bool operator==(const ExtraneousPlan&) const = default;
};

struct ScenarioConfig {
  Strategy strategy = Strategy::MaxCap;
  std::size_t node_count = 1024;
  Seconds duration_s = 3000.0;
  Seconds update_period = 1.0;
  Seconds hop_delay = 0.5;
  int max_tree_depth = 5;
  /// Length of the accounting window behind each utilization sample.
  Seconds window_s = 1.0;
  /// A replica is overloaded over a block of consecutive accounting windows
  /// when the block's arrivals exceed the capacity it honored during the
  /// block; every request of such a block counts as overloaded. Must be a
  /// whole number of accounting windows.
  Seconds overload_window = 4.0;
  /// Span of recent arrivals a replica measures when it reports its load.
  Seconds load_window = 2.5;
  WorkloadSpec workload;
  ReplicaPlan replica_plan;
  std::optional<ChurnPlan> churn_plan;
  std::optional<ExtraneousPlan> extraneous_plan;
  std::uint64_t seed = 1;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& config);

/// "low", "mid", "high" for 1/10/100 req/s, "other" for anything else.
std::string_view capacity_class(Rate max_capacity);

}  // namespace lbsim
