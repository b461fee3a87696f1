#include <algorithm>
#include "deffuant/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "deffuant/error.hpp"
#include "deffuant/geometry.hpp"
#include "deffuant/kernels.hpp"
#include "deffuant/random.hpp"

namespace deffuant {

std::string to_string(OrderParameter o) {
  return o == OrderParameter::consensus_fraction ? "consensus_fraction" : "no_blocked_fraction";
}

OrderParameter order_parameter_from_string(const std::string& name) {
  if (name == "no_blocked_fraction") return OrderParameter::no_blocked_fraction;
  if (name == "consensus_fraction") return OrderParameter::consensus_fraction;
  throw ConfigError("unknown order parameter '" + name + "'");
}

void SweepSpec::validate() const {
  if (theta_grid.empty()) throw ConfigError("sweep: theta_grid is empty");
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] > 0.0) || !std::isfinite(theta_grid[i]))
      throw ConfigError("sweep: theta values must be positive and finite");
    if (i > 0 && !(theta_grid[i] > theta_grid[i - 1]))
      throw ConfigError("sweep: theta_grid must be strictly increasing");
  }
  if (trials < 1) throw ConfigError("sweep: trials must be >= 1");
  SimParams probe = base;
  probe.theta = theta_grid.front();
  probe.validate();
}

std::uint64_t trial_seed(const SweepSpec& spec, std::size_t trial) {
  return derive_seed(spec.master_seed, trial);
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  // Clamp so round-off never pushes a bound past the point estimate.
  return {std::clamp(centre - half, 0.0, p), std::clamp(centre + half, p, 1.0)};
}

bool trial_order_parameter(const TrajectorySummary& s, OrderParameter o) {
  if (o == OrderParameter::consensus_fraction) return classify_outcome(s) == Outcome::consensus_proxy;
  return s.blocked_edge_fraction == 0.0;
}

std::optional<double> crossing_of_half(const std::vector<ThetaEstimate>& per_theta) {
  for (std::size_t i = 0; i < per_theta.size(); ++i) {
    const double e = per_theta[i].estimate;
    if (e < 0.5) continue;
    if (i == 0) return std::nullopt;  // already above 1/2 at the first point
    const auto& a = per_theta[i - 1];
    const auto& b = per_theta[i];
    const double t = (0.5 - a.estimate) / (b.estimate - a.estimate);
    return a.theta + t * (b.theta - a.theta);
  }
  return std::nullopt;
}

namespace {

TrialRecord run_trial(const SweepSpec& spec, std::size_t flat_index) {
  const std::size_t ti = flat_index / spec.trials;
  const std::size_t trial = flat_index % spec.trials;
  SimParams p = spec.base;
  p.theta = spec.theta_grid[ti];
  p.seed = trial_seed(spec, trial);
  p.record_events = false;
  const TrajectorySummary s = run_simulation(p);
  return TrialRecord{p.theta,
                     trial,
                     p.seed,
                     trial_order_parameter(s, spec.order_parameter),
                     s.blocked_edge_fraction,
                     s.max_deviation_from_mean,
                     s.max_euclidean_neighbor_distance};
}

SweepResult collect(const SweepSpec& spec, std::vector<TrialRecord> records) {
  SweepResult r;
  r.order_parameter = spec.order_parameter;
  r.records = std::move(records);
  for (std::size_t ti = 0; ti < spec.theta_grid.size(); ++ti) {
    ThetaEstimate e;
    e.theta = spec.theta_grid[ti];
    e.trials = spec.trials;
    for (std::size_t t = 0; t < spec.trials; ++t) e.successes += r.records[ti * spec.trials + t].order_parameter;
    e.estimate = static_cast<double>(e.successes) / static_cast<double>(e.trials);
    e.interval = wilson_interval(e.successes, e.trials);
    r.per_theta.push_back(e);
  }
  r.theta_c_hat = crossing_of_half(r.per_theta);
  try {
    const ThetaPrediction pred = predicted_theta_c(spec.base.distribution, spec.base.metric);
    if (pred.bounded) r.theta_c_predicted = pred.theta_c;
  } catch (const UnsupportedError&) {
    // No geometry for this metric; the sweep stands on its own.
  }
  return r;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t total = spec.theta_grid.size() * spec.trials;
  return collect(spec, kernels::map_parallel<TrialRecord>(total, [&](std::size_t i) { return run_trial(spec, i); }));
}

SweepResult run_sweep_serial(const SweepSpec& spec) {
  spec.validate();
  const std::size_t total = spec.theta_grid.size() * spec.trials;
  return collect(spec, kernels::map_serial<TrialRecord>(total, [&](std::size_t i) { return run_trial(spec, i); }));
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "theta,trial,order_parameter,blocked_fraction,max_dev\n";
  char buf[160];
  for (const auto& rec : r.records) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%d,%.17g,%.17g\n", rec.theta, rec.trial,
                  rec.order_parameter ? 1 : 0, rec.blocked_fraction, rec.max_deviation);
    out << buf;
  }
}

std::vector<double> theta_grid_range(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from)) throw ConfigError("theta grid: need step > 0 and to >= from");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) grid.push_back(from + static_cast<double>(i) * step);
  return grid;
}

}  // namespace deffuant
