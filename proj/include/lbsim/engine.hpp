#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include "lbsim/metrics.hpp"
#include "lbsim/model.hpp"
#include "lbsim/strategies.hpp"
#include "lbsim/workload.hpp"

namespace lbsim {

enum class EventKind : std::uint8_t {
  WindowTick,
  RequestArrival,
  UpdateIssue,
  UpdateDelivery,
  ChurnStep,
  ExtraneousChange,
};

struct Event {
  Seconds time = 0.0;
  // Ticks carry rank 0 so they run before anything else at the same instant.
  int rank = 1;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::RequestArrival;
  ReplicaId replica = 0;
  std::uint32_t incarnation = 0;
  int level = 0;
  LbiUpdate update;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.sequence > b.sequence;
  }
};

class EventQueue {
 public:
  void push(Event e) {
    e.sequence = next_sequence_++;
    heap_.push(std::move(e));
  }
  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }
  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  std::priority_queue<Event, std::vector<Event>, EventLater> heap_;
  std::uint64_t next_sequence_ = 0;
};

struct RunOptions {
  /// Re-checks view freshness after every event and the staleness bound of
  /// every allocation decision; failures are counted in the metrics.
  bool audit = false;
};

/// Engine-side bookkeeping around a Replica.
struct ReplicaState {
  Replica replica;
  std::uint32_t incarnation = 0;
  Seconds window_start = 0.0;
  std::deque<Seconds> recent_arrivals;
  Seconds last_window_length = 0.0;
  std::uint64_t block_arrivals = 0;
  // Honored capacity integrated over the current overload block.
  double block_capacity = 0.0;
  // Integral of honored capacity over the current window.
  double honored_integral = 0.0;
  Seconds honored_since = 0.0;
  Seconds next_contract_issue = 0.0;
  bool contract_pending = false;
  Rate advertised_contract = 0.0;
};

/// One deterministic simulation. All randomness comes from labelled
/// RngStreams derived from config.seed.
class Simulation {
 public:
  explicit Simulation(ScenarioConfig config, RunOptions options = {});

  /// Runs every event with time <= duration.
  void run();
  /// Runs events with time <= until (capped at the duration).
  void run_until(Seconds until);

  const MetricsStore& metrics() const { return metrics_; }
  MetricsStore take_metrics() { return std::move(metrics_); }

  Seconds clock() const { return clock_; }
  Rate lambda() const { return lambda_; }
  Rate original_capacity() const { return original_capacity_; }
  const ScenarioConfig& config() const { return config_; }
  const std::map<ReplicaId, ReplicaState>& replicas() const { return replicas_; }
  std::size_t alive_count() const;
  int level_of(NodeId node) const { return node_levels_.at(node); }
  const PeerView& view_for_level(int level) const { return views_.at(level - 1); }
  const PeerView& view_for_node(NodeId node) const { return view_for_level(level_of(node)); }
  std::uint64_t events_executed() const { return events_executed_; }
  /// FNV-1a digest over every executed event.
  std::uint64_t trace_digest() const { return trace_digest_; }

  // Event handlers; public so tests can drive single steps.
  void handle_request_arrival();
  void handle_update_issue(ReplicaId id, std::uint32_t incarnation);
  void handle_update_delivery(int level, const LbiUpdate& update);
  void handle_window_tick();
  void handle_churn_step();
  void handle_extraneous_change(ReplicaId id, std::uint32_t incarnation);

  /// Routes one request posted at `node` using allocation draw `u`.
  /// Returns the replica credited, or nothing if the request was lost.
  std::optional<ReplicaId> route_request(NodeId node, double u);

  /// Sets extraneous load to fraction * max_capacity and, under Max-Cap,
  /// queues a rate-limited contract update.
  void set_extraneous(ReplicaId id, double fraction);

 private:
  void schedule(Event e);
  void execute(const Event& e);
  void add_replica(ReplicaId id, Rate capacity, bool announce);
  void remove_replica(ReplicaId id);
  void broadcast(const LbiUpdate& update, bool membership);
  Rate measured_load(ReplicaState& state);
  void close_window(ReplicaState& state, Seconds now);
  void close_block(ReplicaState& state);
  void accrue_honored(ReplicaState& state, Seconds now);
  void schedule_contract_issue(ReplicaState& state);
  const WeightVector* weights_for_level(int level);
  void audit_views();
  bool periodic_updates() const { return config_.strategy != Strategy::MaxCap; }

  ScenarioConfig config_;
  RunOptions options_;
  MetricsStore metrics_;
  EventQueue queue_;
  Seconds clock_ = 0.0;
  Rate lambda_ = 0.0;
  Rate original_capacity_ = 0.0;

  RngStream arrivals_rng_;
  RngStream allocation_rng_;
  RngStream churn_rng_;
  RngStream extraneous_rng_;
  RngStream topology_rng_;
  std::optional<ArrivalProcess> arrivals_;

  std::map<ReplicaId, ReplicaState> replicas_;
  std::map<ReplicaId, Rate> pool_capacity_;
  std::vector<int> node_levels_;
  std::vector<PeerView> views_;
  std::vector<std::optional<WeightVector>> level_weights_;

  Seconds last_tick_ = 0.0;
  std::uint64_t tick_count_ = 0;
  std::uint64_t windows_per_block_ = 1;
  std::uint64_t window_generated_ = 0;
  std::uint64_t events_executed_ = 0;
  std::uint64_t trace_digest_ = 14695981039346656037ull;
};

/// Validates the config, runs it to completion and returns the metrics.
MetricsStore run(const ScenarioConfig& config, RunOptions options = {});

}  // namespace lbsim
