#include "lbsim/scenario.hpp"

#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace lbsim {

namespace {

const std::vector<Rate> kHeteroMix{10, 1, 10, 10, 10, 10, 10, 100, 100, 100};
const std::vector<Rate> kHomogeneous(10, 10.0);

ScenarioConfig base(Strategy strategy, std::vector<Rate> replicas, double rate_fraction) {
  ScenarioConfig c;
  c.strategy = strategy;
  c.replica_plan.capacities = std::move(replicas);
  c.workload.kind = WorkloadKind::Poisson;
  c.workload.rate_fraction = rate_fraction;
  return c;
}

ScenarioConfig pareto(Strategy strategy) {
  ScenarioConfig c = base(strategy, kHeteroMix, 0.8);
  c.workload.kind = WorkloadKind::Pareto;
  c.workload.rate_fraction.reset();
  c.workload.alpha = 1.1;
  c.workload.kappa = 0.000346;
  return c;
}

ScenarioConfig dynamic(std::size_t swaps) {
  ScenarioConfig c = base(Strategy::MaxCap, kHeteroMix, 0.8);
  c.churn_plan = ChurnPlan{.start = 600.0, .interval = 60.0, .swap_count = swaps, .pool_size = 50};
  return c;
}

// Honored capacity hovers around 75% of nominal, and the workload is 80%
// of that.
ScenarioConfig xload(Strategy strategy, Seconds period) {
  ScenarioConfig c = base(strategy, kHeteroMix, 0.8 * 0.75);
  c.update_period = period;
  c.extraneous_plan = ExtraneousPlan{.interval = 1.0, .fraction_min = 0.0, .fraction_max = 0.5};
  return c;
}

const std::map<std::string, std::function<ScenarioConfig()>, std::less<>>& presets() {
  static const std::map<std::string, std::function<ScenarioConfig()>, std::less<>> table{
      {"invload-hetero-80", [] { return base(Strategy::InvLoad, kHeteroMix, 0.8); }},
      {"availcap-hetero-80", [] { return base(Strategy::AvailCap, kHeteroMix, 0.8); }},
      {"maxcap-hetero-80", [] { return base(Strategy::MaxCap, kHeteroMix, 0.8); }},
      {"pareto-availcap", [] { return pareto(Strategy::AvailCap); }},
      {"pareto-maxcap", [] { return pareto(Strategy::MaxCap); }},
      {"dynamic-1-60", [] { return dynamic(1); }},
      {"dynamic-5-60", [] { return dynamic(5); }},
      {"xload-maxcap-u1", [] { return xload(Strategy::MaxCap, 1.0); }},
      {"xload-maxcap-u10", [] { return xload(Strategy::MaxCap, 10.0); }},
      {"xload-availcap-u1", [] { return xload(Strategy::AvailCap, 1.0); }},
      {"xload-availcap-u10", [] { return xload(Strategy::AvailCap, 10.0); }},
      {"homog-invload", [] { return base(Strategy::InvLoad, kHomogeneous, 0.8); }},
      {"homog-maxcap", [] { return base(Strategy::MaxCap, kHomogeneous, 0.8); }},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string number(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_switch(const std::string& key, const std::string& value) {
  if (value == "on") return true;
  if (value == "off" || value == "none") return false;
  throw ConfigError(key + ": expected on or off, got '" + value + "'");
}

// Splits "a: 1, b: 2" into pairs; a comma only separates pairs when a
// `name:` follows it, so list values like "10,1,10" stay intact.
std::vector<std::string> split_pairs(const std::string& body) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != ',') continue;
    std::size_t j = i + 1;
    while (j < body.size() && (body[j] == ' ' || body[j] == '\t')) ++j;
    const std::size_t name = j;
    while (j < body.size() && (std::isalpha(static_cast<unsigned char>(body[j])) || body[j] == '_')) ++j;
    while (j < body.size() && (body[j] == ' ' || body[j] == '\t')) ++j;
    if (j > name && j < body.size() && body[j] == ':') {
      out.push_back(trim(std::string_view(body).substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(std::string_view(body).substr(start)));
  return out;
}

struct Line {
  int number = 0;
  std::string key;
  std::string value;
};

void apply(ScenarioConfig& c, const Line& line, bool& strategy_set) {
  const std::string& k = line.key;
  const std::string& v = line.value;
  auto churn = [&]() -> ChurnPlan& {
    if (!c.churn_plan) c.churn_plan.emplace();
    return *c.churn_plan;
  };
  auto xl = [&]() -> ExtraneousPlan& {
    if (!c.extraneous_plan) c.extraneous_plan.emplace();
    return *c.extraneous_plan;
  };

  if (k == "strategy") {
    c.strategy = parse_strategy(v);
    strategy_set = true;
  } else if (k == "node_count") {
    c.node_count = parse_uint(k, v);
  } else if (k == "duration") {
    c.duration_s = parse_double(k, v);
  } else if (k == "update_period") {
    c.update_period = parse_double(k, v);
  } else if (k == "hop_delay") {
    c.hop_delay = parse_double(k, v);
  } else if (k == "max_tree_depth") {
    c.max_tree_depth = static_cast<int>(parse_uint(k, v));
  } else if (k == "window") {
    c.window_s = parse_double(k, v);
  } else if (k == "overload_window") {
    c.overload_window = parse_double(k, v);
  } else if (k == "load_window") {
    c.load_window = parse_double(k, v);
  } else if (k == "seed") {
    c.seed = parse_uint(k, v);
  } else if (k == "workload") {
    if (v == "poisson") c.workload.kind = WorkloadKind::Poisson;
    else if (v == "pareto") c.workload.kind = WorkloadKind::Pareto;
    else throw ConfigError("workload: expected poisson or pareto, got '" + v + "'");
  } else if (k == "lambda") {
    c.workload.lambda = parse_double(k, v);
    c.workload.rate_fraction.reset();
  } else if (k == "rate_fraction") {
    if (v == "none") c.workload.rate_fraction.reset();
    else c.workload.rate_fraction = parse_double(k, v);
  } else if (k == "alpha") {
    c.workload.alpha = parse_double(k, v);
  } else if (k == "kappa") {
    c.workload.kappa = parse_double(k, v);
  } else if (k == "replicas") {
    c.replica_plan.capacities.clear();
    for (const auto& item : split_list(v)) c.replica_plan.capacities.push_back(parse_double(k, item));
    c.replica_plan.sample_count = 0;
  } else if (k == "replica_sample") {
    c.replica_plan.sample_count = parse_uint(k, v);
    c.replica_plan.capacities.clear();
  } else if (k == "capacity_distribution") {
    CapacityDistribution dist;
    dist.capacities.clear();
    dist.probabilities.clear();
    for (const auto& item : split_list(v)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw ConfigError(k + ": expected capacity:probability pairs");
      dist.capacities.push_back(parse_double(k, trim(item.substr(0, colon))));
      dist.probabilities.push_back(parse_double(k, trim(item.substr(colon + 1))));
    }
    c.replica_plan.distribution = std::move(dist);
  } else if (k == "churn") {
    if (parse_switch(k, v)) churn();
    else c.churn_plan.reset();
  } else if (k == "churn_start") {
    churn().start = parse_double(k, v);
  } else if (k == "churn_interval") {
    churn().interval = parse_double(k, v);
  } else if (k == "churn_swap") {
    churn().swap_count = parse_uint(k, v);
  } else if (k == "churn_pool") {
    churn().pool_size = parse_uint(k, v);
  } else if (k == "xload") {
    if (parse_switch(k, v)) xl();
    else c.extraneous_plan.reset();
  } else if (k == "xload_interval") {
    xl().interval = parse_double(k, v);
  } else if (k == "xload_min") {
    xl().fraction_min = parse_double(k, v);
  } else if (k == "xload_max") {
    xl().fraction_max = parse_double(k, v);
  } else {
    throw ConfigError("line " + std::to_string(line.number) + ": unknown key '" + k + "'");
  }
}

}  // namespace

std::vector<std::string> list_presets() {
  std::vector<std::string> names;
  for (const auto& [name, make] : presets()) names.push_back(name);
  return names;
}

ScenarioConfig preset(std::string_view name) {
  auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + std::string(name) + "'");
  return it->second();
}

ScenarioConfig parse_scenario(std::string_view text) {
  std::vector<Line> lines;
  std::string preset_name;
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    for (const auto& pair : split_pairs(body)) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos)
        throw ConfigError("line " + std::to_string(number) + ": expected 'key: value'");
      Line line{number, trim(pair.substr(0, colon)), trim(pair.substr(colon + 1))};
      if (line.key.empty())
        throw ConfigError("line " + std::to_string(number) + ": missing key");
      if (line.key == "preset") {
        if (!preset_name.empty())
          throw ConfigError("line " + std::to_string(number) + ": preset given twice");
        preset_name = line.value;
        continue;
      }
      lines.push_back(std::move(line));
    }
  }

  ScenarioConfig config;
  bool strategy_set = false;
  if (!preset_name.empty()) {
    config = preset(preset_name);
    strategy_set = true;
  }
  for (const auto& line : lines) apply(config, line, strategy_set);
  if (!strategy_set) throw ConfigError("strategy: missing required field");
  validate(config);
  return config;
}

std::string serialize_scenario(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "strategy: " << to_string(c.strategy) << '\n';
  out << "node_count: " << c.node_count << '\n';
  out << "duration: " << number(c.duration_s) << '\n';
  out << "update_period: " << number(c.update_period) << '\n';
  out << "hop_delay: " << number(c.hop_delay) << '\n';
  out << "max_tree_depth: " << c.max_tree_depth << '\n';
  out << "window: " << number(c.window_s) << '\n';
  out << "overload_window: " << number(c.overload_window) << '\n';
  out << "load_window: " << number(c.load_window) << '\n';
  out << "seed: " << c.seed << '\n';
  const auto& w = c.workload;
  out << "workload: " << (w.kind == WorkloadKind::Poisson ? "poisson" : "pareto") << '\n';
  out << "lambda: " << number(w.lambda) << '\n';
  out << "rate_fraction: " << (w.rate_fraction ? number(*w.rate_fraction) : "none") << '\n';
  out << "alpha: " << number(w.alpha) << '\n';
  out << "kappa: " << number(w.kappa) << '\n';
  const auto& plan = c.replica_plan;
  if (!plan.capacities.empty()) {
    out << "replicas: ";
    for (std::size_t i = 0; i < plan.capacities.size(); ++i)
      out << (i ? "," : "") << number(plan.capacities[i]);
    out << '\n';
  } else {
    out << "replica_sample: " << plan.sample_count << '\n';
  }
  out << "capacity_distribution: ";
  for (std::size_t i = 0; i < plan.distribution.capacities.size(); ++i)
    out << (i ? "," : "") << number(plan.distribution.capacities[i]) << ':'
        << number(plan.distribution.probabilities[i]);
  out << '\n';
  if (c.churn_plan) {
    out << "churn: on\n";
    out << "churn_start: " << number(c.churn_plan->start) << '\n';
    out << "churn_interval: " << number(c.churn_plan->interval) << '\n';
    out << "churn_swap: " << c.churn_plan->swap_count << '\n';
    out << "churn_pool: " << c.churn_plan->pool_size << '\n';
  } else {
    out << "churn: off\n";
  }
  if (c.extraneous_plan) {
    out << "xload: on\n";
    out << "xload_interval: " << number(c.extraneous_plan->interval) << '\n';
    out << "xload_min: " << number(c.extraneous_plan->fraction_min) << '\n';
    out << "xload_max: " << number(c.extraneous_plan->fraction_max) << '\n';
  } else {
    out << "xload: off\n";
  }
  return out.str();
}

}  // namespace lbsim
