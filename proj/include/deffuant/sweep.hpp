#pragma once

// Theta sweeps: many independent runs per grid point, a per-theta order
// parameter with a Wilson interval, and the grid crossing of 1/2.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deffuant/dynamics.hpp"

namespace deffuant {

enum class OrderParameter { no_blocked_fraction, consensus_fraction };

std::string to_string(OrderParameter o);
OrderParameter order_parameter_from_string(const std::string& name);

struct SweepSpec {
  SimParams base;  // base.theta and base.seed are ignored
  std::vector<double> theta_grid;
  std::size_t trials = 1;
  OrderParameter order_parameter = OrderParameter::no_blocked_fraction;
  std::uint64_t master_seed = 1;

  void validate() const;
};

// Trial t uses derive_seed(master_seed, t) at every theta, so neighbouring grid
// points share initial configurations and clocks.
std::uint64_t trial_seed(const SweepSpec& spec, std::size_t trial);

struct TrialRecord {
  double theta = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool order_parameter = false;
  double blocked_fraction = 0.0;
  double max_deviation = 0.0;
  double max_euclidean_neighbor_distance = 0.0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials);

struct ThetaEstimate {
  double theta = 0.0;
  std::size_t successes = 0;
  std::size_t trials = 0;
  double estimate = 0.0;
  WilsonInterval interval;
};

struct SweepResult {
  std::vector<ThetaEstimate> per_theta;
  std::vector<TrialRecord> records;  // sorted by (theta, trial)
  std::optional<double> theta_c_hat;
  std::optional<double> theta_c_predicted;
  OrderParameter order_parameter = OrderParameter::no_blocked_fraction;
};

bool trial_order_parameter(const TrajectorySummary& s, OrderParameter o);

// First upward crossing of 1/2 by the estimates, linearly interpolated between
// grid points; absent if the estimates never cross.
std::optional<double> crossing_of_half(const std::vector<ThetaEstimate>& per_theta);

// Runs grid points and trials concurrently (OpenMP).
SweepResult run_sweep(const SweepSpec& spec);
// Serial reference; produces the same result as run_sweep.
SweepResult run_sweep_serial(const SweepSpec& spec);

// results.csv: theta,trial,order_parameter,blocked_fraction,max_dev
void write_sweep_csv(std::ostream& out, const SweepResult& r);

// Evenly spaced grid from..to (inclusive up to rounding) with the given step.
std::vector<double> theta_grid_range(double from, double to, double step);

}  // namespace deffuant
