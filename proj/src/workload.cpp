#include "lbsim/workload.hpp"

#include <cmath>
#include <numeric>

namespace lbsim {

RngStream::RngStream(std::uint64_t seed, StreamLabel label) : seed_(seed), label_(label) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(label), 0x6c62u};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  // Multiply-shift on the 53-bit uniform keeps one draw per call.
  const auto k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

Seconds poisson_interarrival(Rate lambda, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("poisson_interarrival: u must lie in (0,1)");
  if (!(lambda > 0.0)) throw DomainError("poisson_interarrival: lambda must be positive");
  return -std::log1p(-u) / lambda;
}

Seconds pareto_interarrival(double alpha, double kappa, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("pareto_interarrival: u must lie in [0,1)");
  if (!(alpha > 0.0 && kappa > 0.0))
    throw DomainError("pareto_interarrival: alpha and kappa must be positive");
  return kappa * (std::pow(1.0 - u, -1.0 / alpha) - 1.0);
}

double pareto_cdf(double alpha, double kappa, Seconds x) {
  if (x <= 0.0) return 0.0;
  return 1.0 - std::pow(kappa / (x + kappa), alpha);
}

Rate pareto_mean_rate(double alpha, double kappa) {
  if (alpha <= 1.0) return 0.0;
  return (alpha - 1.0) / kappa;
}

Rate derive_lambda(double rate_fraction, std::span<const Rate> capacities) {
  return rate_fraction * std::accumulate(capacities.begin(), capacities.end(), 0.0);
}

ArrivalProcess::ArrivalProcess(const WorkloadSpec& spec, Rate lambda)
    : spec_(spec), lambda_(lambda) {}

Seconds ArrivalProcess::next_gap(RngStream& rng) const {
  if (spec_.kind == WorkloadKind::Poisson) return poisson_interarrival(lambda_, rng.uniform_open());
  return pareto_interarrival(spec_.alpha, spec_.kappa, rng.uniform());
}

Rate ArrivalProcess::nominal_rate() const {
  if (spec_.kind == WorkloadKind::Poisson) return lambda_;
  return pareto_mean_rate(spec_.alpha, spec_.kappa);
}

}  // namespace lbsim
