#include "lbsim/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace lbsim {

namespace {

// Slack for comparing event times built from repeated additions.
constexpr double kTimeSlack = 1e-9;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Simulation::Simulation(ScenarioConfig config, RunOptions options)
    : config_(std::move(config)),
      options_(options),
      arrivals_rng_(config_.seed, StreamLabel::Arrivals),
      allocation_rng_(config_.seed, StreamLabel::Allocation),
      churn_rng_(config_.seed, StreamLabel::Churn),
      extraneous_rng_(config_.seed, StreamLabel::Extraneous),
      topology_rng_(config_.seed, StreamLabel::Topology) {
  validate(config_);
  metrics_.strategy = std::string(to_string(config_.strategy));
  metrics_.seed = config_.seed;
  if (config_.duration_s == 0.0) return;
  windows_per_block_ =
      static_cast<std::uint64_t>(std::llround(config_.overload_window / config_.window_s));

  node_levels_.resize(config_.node_count);
  for (auto& level : node_levels_)
    level = 1 + static_cast<int>(topology_rng_.below(static_cast<std::uint64_t>(config_.max_tree_depth)));
  views_.resize(static_cast<std::size_t>(config_.max_tree_depth));
  for (int l = 1; l <= config_.max_tree_depth; ++l) views_[l - 1].tree_level = l;
  level_weights_.resize(views_.size());

  const auto& plan = config_.replica_plan;
  std::vector<Rate> capacities = plan.capacities;
  for (std::size_t i = 0; i < plan.sample_count; ++i)
    capacities.push_back(plan.distribution.sample(topology_rng_.uniform()));
  for (std::size_t i = 0; i < capacities.size(); ++i)
    add_replica(static_cast<ReplicaId>(i), capacities[i], false);
  original_capacity_ = 0.0;
  for (Rate c : capacities) original_capacity_ += c;

  const auto& w = config_.workload;
  lambda_ = w.kind == WorkloadKind::Pareto
                ? pareto_mean_rate(w.alpha, w.kappa)
                : (w.rate_fraction ? derive_lambda(*w.rate_fraction, capacities) : w.lambda);
  arrivals_.emplace(w, lambda_);

  // Initial replicas announced themselves early enough to be known
  // everywhere at t = 0.
  const Seconds announced = -config_.max_tree_depth * config_.hop_delay;
  for (auto& [id, state] : replicas_) {
    const LbiUpdate birth{id, UpdateKind::Birth, honored_capacity(state.replica), announced};
    for (auto& view : views_) view.apply(birth, 0.0);
  }

  schedule({.time = std::min(config_.window_s, config_.duration_s), .rank = 0,
            .kind = EventKind::WindowTick});
  schedule({.time = arrivals_->next_gap(arrivals_rng_), .kind = EventKind::RequestArrival});
  for (auto& [id, state] : replicas_) {
    const Seconds phase = topology_rng_.uniform() * config_.update_period;
    if (periodic_updates())
      schedule({.time = phase, .kind = EventKind::UpdateIssue, .replica = id,
                .incarnation = state.incarnation});
  }
  if (config_.extraneous_plan) {
    for (auto& [id, state] : replicas_)
      schedule({.time = extraneous_rng_.uniform() * config_.extraneous_plan->interval,
                .kind = EventKind::ExtraneousChange, .replica = id,
                .incarnation = state.incarnation});
  }
  if (config_.churn_plan) schedule({.time = config_.churn_plan->start, .kind = EventKind::ChurnStep});
}

std::size_t Simulation::alive_count() const {
  return static_cast<std::size_t>(std::count_if(
      replicas_.begin(), replicas_.end(), [](const auto& kv) { return kv.second.replica.alive; }));
}

void Simulation::schedule(Event e) {
  if (e.time > config_.duration_s + kTimeSlack) return;
  queue_.push(std::move(e));
}

void Simulation::run() { run_until(config_.duration_s); }

void Simulation::run_until(Seconds until) {
  until = std::min(until, config_.duration_s);
  while (!queue_.empty() && queue_.top().time <= until) {
    const Event e = queue_.pop();
    clock_ = std::max(clock_, e.time);
    execute(e);
    ++events_executed_;
    trace_digest_ = fnv_mix(trace_digest_, std::bit_cast<std::uint64_t>(e.time));
    trace_digest_ = fnv_mix(trace_digest_, (static_cast<std::uint64_t>(e.kind) << 32) | e.replica);
    if (options_.audit) audit_views();
  }
  clock_ = std::max(clock_, until);
}

void Simulation::execute(const Event& e) {
  switch (e.kind) {
    case EventKind::WindowTick: handle_window_tick(); break;
    case EventKind::RequestArrival: handle_request_arrival(); break;
    case EventKind::UpdateIssue: handle_update_issue(e.replica, e.incarnation); break;
    case EventKind::UpdateDelivery: handle_update_delivery(e.level, e.update); break;
    case EventKind::ChurnStep: handle_churn_step(); break;
    case EventKind::ExtraneousChange: handle_extraneous_change(e.replica, e.incarnation); break;
  }
}

void Simulation::add_replica(ReplicaId id, Rate capacity, bool announce) {
  auto& state = replicas_[id];
  const std::uint32_t incarnation = state.incarnation + 1;
  state = ReplicaState{};
  state.incarnation = incarnation;
  state.replica.id = id;
  state.replica.max_capacity = capacity;
  state.replica.alive = true;
  state.replica.birth_time = clock_;
  state.window_start = clock_;
  state.honored_since = clock_;
  state.next_contract_issue = clock_;
  state.advertised_contract = capacity;
  pool_capacity_[id] = capacity;
  metrics_.nominal_capacity[id] = capacity;
  metrics_.overload_counters.try_emplace(id);
  if (announce) broadcast({id, UpdateKind::Birth, capacity, clock_}, true);
}

void Simulation::remove_replica(ReplicaId id) {
  auto& state = replicas_.at(id);
  close_window(state, clock_);
  close_block(state);
  state.replica.alive = false;
  state.replica.death_time = clock_;
  broadcast({id, UpdateKind::Invalidation, 0.0, clock_}, true);
}

void Simulation::broadcast(const LbiUpdate& update, bool membership) {
  const auto deliveries = static_cast<std::uint64_t>(config_.node_count);
  if (membership) {
    metrics_.membership_deliveries += deliveries;
  } else {
    metrics_.overhead += deliveries;
    ++metrics_.update_issues;
  }
  for (int level = 1; level <= config_.max_tree_depth; ++level)
    schedule({.time = update.issue_time + level * config_.hop_delay,
              .kind = EventKind::UpdateDelivery, .replica = update.replica_id,
              .level = level, .update = update});
}

const WeightVector* Simulation::weights_for_level(int level) {
  auto& cached = level_weights_[level - 1];
  if (!cached) {
    const PeerView& view = views_[level - 1];
    if (view.known_alive.empty()) return nullptr;
    std::vector<ReplicaSnapshot> snapshots;
    snapshots.reserve(view.known_alive.size());
    for (ReplicaId id : view.known_alive) {
      const CachedLbi& lbi = view.cache.at(id);
      snapshots.push_back({id, lbi.load, lbi.avail, lbi.contract, true});
    }
    cached = compute_weights(config_.strategy, snapshots);
  }
  return &*cached;
}

std::optional<ReplicaId> Simulation::route_request(NodeId node, double u) {
  ++metrics_.generated_requests;
  ++window_generated_;
  const int level = node_levels_.at(node);
  const WeightVector* weights = weights_for_level(level);
  if (weights == nullptr) {
    ++metrics_.lost_requests;
    return std::nullopt;
  }
  const ReplicaId chosen = choose_replica(*weights, u);

  if (options_.audit) {
    ++metrics_.audit_checks;
    const CachedLbi& lbi = views_[level - 1].cache.at(chosen);
    const Seconds newest = std::max({lbi.load_issued, lbi.avail_issued, lbi.contract_issued});
    if (newest + level * config_.hop_delay > clock_ + kTimeSlack) ++metrics_.audit_violations;
  }

  auto it = replicas_.find(chosen);
  if (it == replicas_.end() || !it->second.replica.alive) {
    // Departed, but the invalidation has not reached this peer yet.
    ++metrics_.lost_requests;
    return std::nullopt;
  }
  ++it->second.replica.window_arrivals;
  it->second.recent_arrivals.push_back(clock_);
  ++metrics_.overload_counters[chosen].total;
  return chosen;
}

void Simulation::handle_request_arrival() {
  const auto node = static_cast<NodeId>(arrivals_rng_.below(config_.node_count));
  const bool known = !views_[node_levels_[node] - 1].known_alive.empty();
  route_request(node, known ? allocation_rng_.uniform() : 0.0);
  schedule({.time = clock_ + arrivals_->next_gap(arrivals_rng_), .kind = EventKind::RequestArrival});
}

void Simulation::handle_update_issue(ReplicaId id, std::uint32_t incarnation) {
  auto it = replicas_.find(id);
  if (it == replicas_.end()) return;
  ReplicaState& state = it->second;
  if (!state.replica.alive || state.incarnation != incarnation) return;

  const Rate last_load = measured_load(state);
  switch (config_.strategy) {
    case Strategy::InvLoad:
      broadcast({id, UpdateKind::Load, last_load, clock_}, false);
      break;
    case Strategy::AvailCap:
      broadcast({id, UpdateKind::AvailCap,
                 std::max(0.0, honored_capacity(state.replica) - last_load), clock_},
                false);
      break;
    case Strategy::MaxCap: {
      if (!state.contract_pending) return;
      state.contract_pending = false;
      state.next_contract_issue = clock_ + config_.update_period;
      const Rate honored = honored_capacity(state.replica);
      if (honored == state.advertised_contract) return;
      state.advertised_contract = honored;
      broadcast({id, UpdateKind::Contract, honored, clock_}, false);
      return;
    }
  }
  schedule({.time = clock_ + config_.update_period, .kind = EventKind::UpdateIssue, .replica = id,
            .incarnation = incarnation});
}

Rate Simulation::measured_load(ReplicaState& state) {
  auto& recent = state.recent_arrivals;
  const Seconds horizon = clock_ - config_.load_window;
  while (!recent.empty() && recent.front() <= horizon) recent.pop_front();
  // A replica younger than the window measures over its lifetime so far.
  const Seconds span =
      std::min(config_.load_window, clock_ - state.replica.birth_time.value_or(0.0));
  return span > 0.0 ? static_cast<double>(recent.size()) / span : 0.0;
}

void Simulation::handle_update_delivery(int level, const LbiUpdate& update) {
  views_[level - 1].apply(update, clock_);
  level_weights_[level - 1].reset();
}

void Simulation::accrue_honored(ReplicaState& state, Seconds now) {
  state.honored_integral += honored_capacity(state.replica) * (now - state.honored_since);
  state.honored_since = now;
}

void Simulation::close_window(ReplicaState& state, Seconds now) {
  const Seconds length = now - state.window_start;
  if (length <= 0.0) return;
  accrue_honored(state, now);
  // Capacity is averaged over the window since extraneous load may change
  // inside it.
  const Rate honored = state.honored_integral / length;
  const auto arrivals = state.replica.window_arrivals;
  const double utilization = static_cast<double>(arrivals) / (honored * length);
  state.block_arrivals += arrivals;
  state.block_capacity += state.honored_integral;
  metrics_.utilization_series.push_back({now, state.replica.id, utilization, honored});
  state.replica.last_window_arrivals = arrivals;
  state.last_window_length = length;
  state.replica.window_arrivals = 0;
  state.window_start = now;
  state.honored_integral = 0.0;
}

void Simulation::close_block(ReplicaState& state) {
  if (static_cast<double>(state.block_arrivals) > state.block_capacity)
    metrics_.overload_counters[state.replica.id].overloaded += state.block_arrivals;
  state.block_arrivals = 0;
  state.block_capacity = 0.0;
}

void Simulation::handle_window_tick() {
  ++tick_count_;
  const bool block_end =
      tick_count_ % windows_per_block_ == 0 || clock_ >= config_.duration_s - kTimeSlack;
  Rate honored_total = 0.0;
  for (auto& [id, state] : replicas_) {
    if (!state.replica.alive) continue;
    close_window(state, clock_);
    if (block_end) close_block(state);
    honored_total += honored_capacity(state.replica);
  }
  const Seconds length = clock_ - last_tick_;
  metrics_.capacity_ratio_series.push_back({clock_, honored_total / original_capacity_});
  metrics_.demand_series.push_back(
      {clock_, window_generated_, honored_total,
       honored_total > 0.0 && length > 0.0
           ? static_cast<double>(window_generated_) / length / honored_total
           : 0.0});
  window_generated_ = 0;
  last_tick_ = clock_;

  const Seconds next = clock_ + config_.window_s;
  if (clock_ < config_.duration_s - kTimeSlack)
    schedule({.time = std::min(next, config_.duration_s), .rank = 0, .kind = EventKind::WindowTick});
}

void Simulation::handle_churn_step() {
  const ChurnPlan& plan = *config_.churn_plan;
  std::vector<ReplicaId> alive;
  for (const auto& [id, state] : replicas_)
    if (state.replica.alive) alive.push_back(id);
  const std::size_t swaps = std::min(plan.swap_count, alive.size());

  // Partial Fisher-Yates over the alive ids.
  for (std::size_t i = 0; i < swaps; ++i) {
    const auto j = i + churn_rng_.below(alive.size() - i);
    std::swap(alive[i], alive[j]);
  }
  std::vector<ReplicaId> leaving(alive.begin(), alive.begin() + static_cast<std::ptrdiff_t>(swaps));

  std::vector<ReplicaId> candidates;
  for (ReplicaId id = 0; id < plan.pool_size; ++id) {
    auto it = replicas_.find(id);
    const bool busy = it != replicas_.end() && it->second.replica.alive;
    if (!busy) candidates.push_back(id);
  }
  for (ReplicaId id : leaving) remove_replica(id);

  for (std::size_t i = 0; i < swaps && i < candidates.size(); ++i) {
    const auto j = i + churn_rng_.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
    const ReplicaId id = candidates[i];
    auto known = pool_capacity_.find(id);
    const Rate capacity = known != pool_capacity_.end()
                              ? known->second
                              : config_.replica_plan.distribution.sample(churn_rng_.uniform());
    add_replica(id, capacity, true);
    const Seconds phase = churn_rng_.uniform();
    const std::uint32_t inc = replicas_.at(id).incarnation;
    if (periodic_updates())
      schedule({.time = clock_ + phase * config_.update_period, .kind = EventKind::UpdateIssue,
                .replica = id, .incarnation = inc});
    if (config_.extraneous_plan)
      schedule({.time = clock_ + phase * config_.extraneous_plan->interval,
                .kind = EventKind::ExtraneousChange, .replica = id, .incarnation = inc});
  }
  schedule({.time = clock_ + plan.interval, .kind = EventKind::ChurnStep});
}

void Simulation::set_extraneous(ReplicaId id, double fraction) {
  ReplicaState& state = replicas_.at(id);
  accrue_honored(state, clock_);
  state.replica.extraneous_load = fraction * state.replica.max_capacity;
  if (config_.strategy == Strategy::MaxCap) schedule_contract_issue(state);
}

void Simulation::schedule_contract_issue(ReplicaState& state) {
  if (state.contract_pending) return;
  state.contract_pending = true;
  schedule({.time = std::max(clock_, state.next_contract_issue), .kind = EventKind::UpdateIssue,
            .replica = state.replica.id, .incarnation = state.incarnation});
}

void Simulation::handle_extraneous_change(ReplicaId id, std::uint32_t incarnation) {
  auto it = replicas_.find(id);
  if (it == replicas_.end()) return;
  if (!it->second.replica.alive || it->second.incarnation != incarnation) return;
  const ExtraneousPlan& plan = *config_.extraneous_plan;
  const double fraction =
      plan.fraction_min + (plan.fraction_max - plan.fraction_min) * extraneous_rng_.uniform();
  set_extraneous(id, fraction);
  schedule({.time = clock_ + plan.interval, .kind = EventKind::ExtraneousChange, .replica = id,
            .incarnation = incarnation});
}

void Simulation::audit_views() {
  for (const auto& view : views_) {
    const Seconds delay = view.tree_level * config_.hop_delay;
    for (const auto& [id, lbi] : view.cache) {
      ++metrics_.audit_checks;
      const Seconds newest = std::max({lbi.load_issued, lbi.avail_issued, lbi.contract_issued});
      if (newest + delay > clock_ + kTimeSlack || lbi.receipt_time > clock_)
        ++metrics_.audit_violations;
    }
  }
}

MetricsStore run(const ScenarioConfig& config, RunOptions options) {
  Simulation sim(config, options);
  sim.run();
  return sim.take_metrics();
}

}  // namespace lbsim
