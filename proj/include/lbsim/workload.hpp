#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "lbsim/model.hpp"

namespace lbsim {

enum class StreamLabel : std::uint32_t {
  Arrivals = 1,
  Allocation = 2,
  Churn = 3,
  Extraneous = 4,
  Topology = 5,
};

/// A seeded uniform source for one purpose. The same (seed, label) always
/// yields the same sequence; different labels are decorrelated through
/// seed_seq mixing.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamLabel label);

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform in the open interval (0, 1).
  double uniform_open();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  StreamLabel label() const { return label_; }

 private:
  std::uint64_t seed_;
  StreamLabel label_;
  std::mt19937_64 engine_;
};

/// Inverse transform of the exponential distribution: -ln(1-u)/lambda.
Seconds poisson_interarrival(Rate lambda, double u);

/// Inverse of F(x) = 1 - (kappa/(x+kappa))^alpha.
Seconds pareto_interarrival(double alpha, double kappa, double u);

/// F(x) = 1 - (kappa/(x+kappa))^alpha.
double pareto_cdf(double alpha, double kappa, Seconds x);

/// Mean arrivals per second of a Pareto renewal process; zero when the mean
/// inter-arrival time is unbounded (alpha <= 1).
Rate pareto_mean_rate(double alpha, double kappa);

Rate derive_lambda(double rate_fraction, std::span<const Rate> capacities);

/// Draws successive inter-arrival gaps for a workload.
class ArrivalProcess {
 public:
  explicit ArrivalProcess(const WorkloadSpec& spec, Rate lambda);
  Seconds next_gap(RngStream& rng) const;
  Rate nominal_rate() const;

 private:
  WorkloadSpec spec_;
  Rate lambda_;
};

}  // namespace lbsim
