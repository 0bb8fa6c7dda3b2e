#pragma once

#include <span>
#include <vector>

#include "lbsim/engine.hpp"

namespace lbsim {

/// Copies of `base` with seeds base.seed, base.seed + 1, ...
std::vector<ScenarioConfig> seed_series(const ScenarioConfig& base, std::size_t count);

/// Reference implementation: runs the configs one after another.
std::vector<MetricsStore> run_batch_serial(std::span<const ScenarioConfig> configs,
                                           RunOptions options = {});

/// Runs independent simulations across OpenMP threads. Each simulation is
/// single-threaded and owns its state, so the result equals
/// run_batch_serial element for element. threads <= 0 uses the OpenMP
/// default. The first failure (in config order) is rethrown.
std::vector<MetricsStore> run_batch_parallel(std::span<const ScenarioConfig> configs,
                                             RunOptions options = {}, int threads = 0);

}  // namespace lbsim
