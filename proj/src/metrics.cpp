#include "lbsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lbsim {

std::uint64_t MetricsStore::delivered_requests() const {
  std::uint64_t sum = 0;
  for (const auto& [id, c] : overload_counters) sum += c.total;
  return sum;
}

std::optional<double> overloaded_percentage(const MetricsStore& store, ReplicaId id) {
  auto it = store.overload_counters.find(id);
  if (it == store.overload_counters.end() || it->second.total == 0) return std::nullopt;
  return static_cast<double>(it->second.overloaded) / static_cast<double>(it->second.total);
}

double mean_overload_pct(const MetricsStore& store) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [id, c] : store.overload_counters) {
    if (c.total == 0) continue;
    sum += static_cast<double>(c.overloaded) / static_cast<double>(c.total);
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

UtilizationSummary summarize(std::vector<double> values) {
  UtilizationSummary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  auto pct = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
  };
  s.p5 = pct(0.05);
  s.p95 = pct(0.95);
  return s;
}

std::optional<UtilizationSummary> utilization_summary(const MetricsStore& store, ReplicaId id) {
  std::vector<double> values;
  for (const auto& u : store.utilization_series)
    if (u.replica_id == id) values.push_back(u.utilization);
  if (values.empty()) return std::nullopt;
  return summarize(std::move(values));
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

namespace {

// Shortest representation that parses back to the same double.
std::string exact_number(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write", path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read", path.string());
  return in;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

// Yields the data rows of a CSV file after checking its header.
std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path,
                                                const std::string& header) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw IoError("unexpected header in", path.string());
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split(line));
  return rows;
}

}  // namespace

std::vector<std::filesystem::path> write_csv(const MetricsStore& store,
                                             const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create directory", out_dir.string());

  std::vector<std::filesystem::path> written;

  {
    const auto path = out_dir / "utilization.csv";
    auto out = open_out(path);
    out << "time,replica_id,utilization,honored_capacity\n";
    for (const auto& u : store.utilization_series)
      out << format_number(u.time) << ',' << u.replica_id << ',' << format_number(u.utilization)
          << ',' << format_number(u.honored_capacity) << '\n';
    written.push_back(path);
  }
  {
    const auto path = out_dir / "overload.csv";
    auto out = open_out(path);
    out << "replica_id,class,total,overloaded,pct\n";
    for (const auto& [id, c] : store.overload_counters) {
      auto nominal = store.nominal_capacity.find(id);
      const std::string_view cls =
          nominal == store.nominal_capacity.end() ? "other" : capacity_class(nominal->second);
      const double pct = c.total == 0 ? 0.0
                                      : static_cast<double>(c.overloaded) /
                                            static_cast<double>(c.total);
      out << id << ',' << cls << ',' << c.total << ',' << c.overloaded << ','
          << exact_number(pct) << '\n';
    }
    written.push_back(path);
  }
  {
    const auto path = out_dir / "summary.csv";
    auto out = open_out(path);
    out << "strategy,seed,overhead_updates,lost_requests,mean_overload_pct\n";
    if (!store.strategy.empty())
      out << store.strategy << ',' << store.seed << ',' << store.overhead << ','
          << store.lost_requests << ',' << format_number(mean_overload_pct(store)) << '\n';
    written.push_back(path);
  }
  {
    const auto path = out_dir / "ratio.csv";
    auto out = open_out(path);
    out << "time,ratio\n";
    for (const auto& r : store.capacity_ratio_series)
      out << format_number(r.time) << ',' << format_number(r.ratio) << '\n';
    written.push_back(path);
  }
  {
    const auto path = out_dir / "replicas.csv";
    auto out = open_out(path);
    out << "replica_id,max_capacity\n";
    for (const auto& [id, cap] : store.nominal_capacity)
      out << id << ',' << format_number(cap) << '\n';
    written.push_back(path);
  }
  {
    const auto path = out_dir / "demand.csv";
    auto out = open_out(path);
    out << "time,arrivals,honored_total,demand_ratio\n";
    for (const auto& d : store.demand_series)
      out << format_number(d.time) << ',' << d.arrivals << ',' << format_number(d.honored_total)
          << ',' << format_number(d.demand_ratio) << '\n';
    written.push_back(path);
  }
  return written;
}

MetricsStore read_csv(const std::filesystem::path& dir) {
  MetricsStore store;
  for (const auto& row : read_rows(dir / "utilization.csv",
                                   "time,replica_id,utilization,honored_capacity")) {
    if (row.size() != 4) throw IoError("malformed row in", (dir / "utilization.csv").string());
    store.utilization_series.push_back({std::stod(row[0]),
                                        static_cast<ReplicaId>(std::stoul(row[1])),
                                        std::stod(row[2]), std::stod(row[3])});
  }
  for (const auto& row : read_rows(dir / "overload.csv", "replica_id,class,total,overloaded,pct")) {
    if (row.size() != 5) throw IoError("malformed row in", (dir / "overload.csv").string());
    store.overload_counters[static_cast<ReplicaId>(std::stoul(row[0]))] = {
        std::stoull(row[3]), std::stoull(row[2])};
  }
  const auto summary =
      read_rows(dir / "summary.csv", "strategy,seed,overhead_updates,lost_requests,mean_overload_pct");
  if (summary.size() > 1 || (summary.size() == 1 && summary[0].size() != 5))
    throw IoError("malformed", (dir / "summary.csv").string());
  if (summary.size() == 1) {
    store.strategy = summary[0][0];
    store.seed = std::stoull(summary[0][1]);
    store.overhead = std::stoull(summary[0][2]);
    store.lost_requests = std::stoull(summary[0][3]);
  }
  for (const auto& row : read_rows(dir / "ratio.csv", "time,ratio"))
    store.capacity_ratio_series.push_back({std::stod(row.at(0)), std::stod(row.at(1))});
  for (const auto& row : read_rows(dir / "replicas.csv", "replica_id,max_capacity"))
    store.nominal_capacity[static_cast<ReplicaId>(std::stoul(row.at(0)))] = std::stod(row.at(1));
  for (const auto& row :
       read_rows(dir / "demand.csv", "time,arrivals,honored_total,demand_ratio"))
    store.demand_series.push_back({std::stod(row.at(0)), std::stoull(row.at(1)),
                                   std::stod(row.at(2)), std::stod(row.at(3))});
  store.generated_requests = store.delivered_requests() + store.lost_requests;
  return store;
}

}  // namespace lbsim
