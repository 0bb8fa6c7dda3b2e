#include "lbsim/batch.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lbsim {

std::vector<ScenarioConfig> seed_series(const ScenarioConfig& base, std::size_t count) {
  std::vector<ScenarioConfig> out(count, base);
  for (std::size_t i = 0; i < count; ++i) out[i].seed = base.seed + i;
  return out;
}

std::vector<MetricsStore> run_batch_serial(std::span<const ScenarioConfig> configs,
                                           RunOptions options) {
  std::vector<MetricsStore> results;
  results.reserve(configs.size());
  for (const auto& config : configs) results.push_back(run(config, options));
  return results;
}

std::vector<MetricsStore> run_batch_parallel(std::span<const ScenarioConfig> configs,
                                             RunOptions options, int threads) {
  const auto n = static_cast<std::ptrdiff_t>(configs.size());
  std::vector<MetricsStore> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
#ifdef _OPENMP
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      results[i] = run(configs[i], options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace lbsim
