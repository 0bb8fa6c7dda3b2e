// Command-line driver: runs one scenario (or a seed series) and writes the
// metrics CSVs.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lbsim/batch.hpp"
#include "lbsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace lbsim;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path default_out() {
  if (const char* env = std::getenv("LBSIM_OUT"); env != nullptr && *env != '\0') return env;
  return "lbsim-out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator of decentralized replica load balancing"};
  std::string scenario_file;
  std::string preset_name;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t repeat = 1;
  int jobs = 0;
  bool audit = false;
  bool list = false;
  bool print_config = false;

  app.add_option("scenario", scenario_file, "Scenario file (flat key: value)");
  app.add_option("--preset", preset_name, "Named preset (see --list-presets)");
  app.add_option("--set", overrides, "Override a scenario key, e.g. --set update_period=10");
  auto* seed_opt = app.add_option("--seed", seed, "Base seed");
  app.add_option("--out", out, "Output directory (default $LBSIM_OUT or ./lbsim-out)");
  app.add_option("--repeat", repeat, "Run N seeds: seed, seed+1, ...")->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "Parallel simulations for --repeat (0 = all cores)");
  app.add_flag("--audit", audit, "Check staleness bounds of every decision");
  app.add_flag("--list-presets", list, "Print preset names and exit");
  app.add_flag("--print-config", print_config, "Print the resolved scenario and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (list) {
    for (const auto& name : list_presets()) std::cout << name << '\n';
    return 0;
  }

  ScenarioConfig config;
  try {
    std::string text;
    if (!preset_name.empty()) text += "preset: " + preset_name + "\n";
    if (!scenario_file.empty()) text += read_file(scenario_file) + "\n";
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
      text += o.substr(0, eq) + ": " + o.substr(eq + 1) + "\n";
    }
    if (preset_name.empty() && scenario_file.empty())
      throw ConfigError("give a scenario file or --preset");
    config = parse_scenario(text);
    if (*seed_opt) config.seed = seed;
    validate(config);
  } catch (const ConfigError& e) {
    std::cerr << "lbsim: " << e.what() << '\n';
    return 1;
  }

  if (print_config) {
    std::cout << serialize_scenario(config);
    return 0;
  }

  try {
    const fs::path root = out.empty() ? default_out() : fs::path(out);
    const auto configs = seed_series(config, repeat);
    const auto results = run_batch_parallel(configs, RunOptions{.audit = audit}, jobs);
    int status = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& m = results[i];
      const fs::path dir = repeat == 1 ? root : root / ("seed-" + std::to_string(configs[i].seed));
      write_csv(m, dir);
      std::printf(
          "strategy=%s seed=%llu requests=%llu lost=%llu overhead=%llu mean_overload_pct=%s "
          "out=%s\n",
          m.strategy.c_str(), static_cast<unsigned long long>(m.seed),
          static_cast<unsigned long long>(m.generated_requests),
          static_cast<unsigned long long>(m.lost_requests),
          static_cast<unsigned long long>(m.overhead), format_number(mean_overload_pct(m)).c_str(),
          dir.string().c_str());
      if (audit) {
        std::printf("audit seed=%llu checks=%llu violations=%llu\n",
                    static_cast<unsigned long long>(m.seed),
                    static_cast<unsigned long long>(m.audit_checks),
                    static_cast<unsigned long long>(m.audit_violations));
        if (m.audit_violations != 0) status = 2;
      }
    }
    if (status != 0) std::cerr << "lbsim: staleness audit found violations\n";
    return status;
  } catch (const ConfigError& e) {
    std::cerr << "lbsim: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lbsim: " << e.what() << '\n';
    return 2;
  }
}
