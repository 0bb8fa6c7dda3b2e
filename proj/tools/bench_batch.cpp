// Times the serial reference batch runner against the OpenMP one on a seed
// series and checks that both produce the same metrics.

#include <chrono>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "lbsim/batch.hpp"
#include "lbsim/scenario.hpp"

using namespace lbsim;

namespace {

template <typename F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same(const MetricsStore& a, const MetricsStore& b) {
  return a.overload_counters == b.overload_counters && a.overhead == b.overhead &&
         a.lost_requests == b.lost_requests && a.generated_requests == b.generated_requests &&
         a.utilization_series.size() == b.utilization_series.size();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP batch benchmark"};
  std::string preset_name = "availcap-hetero-80";
  std::size_t runs = 8;
  double duration = 600.0;
  int threads = 0;
  app.add_option("--preset", preset_name);
  app.add_option("--runs", runs);
  app.add_option("--duration", duration);
  app.add_option("--threads", threads);
  CLI11_PARSE(app, argc, argv);

  ScenarioConfig base = preset(preset_name);
  base.duration_s = duration;
  const auto configs = seed_series(base, runs);

  std::vector<MetricsStore> serial;
  std::vector<MetricsStore> parallel;
  const double t_serial = seconds([&] { serial = run_batch_serial(configs); });
  const double t_parallel = seconds([&] { parallel = run_batch_parallel(configs, {}, threads); });

  bool match = true;
  for (std::size_t i = 0; i < runs; ++i) match = match && same(serial[i], parallel[i]);

  std::printf("preset=%s runs=%zu duration=%g\n", preset_name.c_str(), runs, duration);
  std::printf("serial   %8.3f s\n", t_serial);
  std::printf("parallel %8.3f s  speedup %.2fx\n", t_parallel, t_serial / t_parallel);
  std::printf("results %s\n", match ? "identical" : "DIFFER");
  return match ? 0 : 1;
}
