#pragma once

// Event-driven Deffuant dynamics on a finite line lattice (cycle or path).
// Edges carry unit-rate Poisson clocks, realised as one global clock of rate
// |E| with a uniformly chosen edge per event.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deffuant/distribution.hpp"
#include "deffuant/opinion.hpp"
#include "deffuant/random.hpp"

namespace deffuant {

enum class Boundary { cycle, path };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

struct Edge {
  std::size_t u;
  std::size_t v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// n >= 2 vertices; edges <v, v+1> for v < n-1, plus <n-1, 0> on a cycle.
struct Lattice {
  std::size_t n = 2;
  Boundary boundary = Boundary::cycle;

  void validate() const;
  std::size_t edge_count() const noexcept { return boundary == Boundary::cycle ? n : n - 1; }
  Edge edge(std::size_t index) const noexcept { return {index, index + 1 == n ? 0 : index + 1}; }
};

struct SimParams {
  Lattice lattice;
  double theta = 0.5;
  double mu = 0.5;
  double t_max = 100.0;
  MetricSpec metric;
  DistributionSpec distribution = DistributionSpec::uniform_box({0.0}, {1.0});
  std::uint64_t seed = 1;
  bool record_events = false;

  void validate() const;
};

// Opinions are stored flat, vertex-major: opinions[v * dim + i].
struct SimState {
  double time = 0.0;
  std::size_t dim = 1;
  std::vector<double> opinions;
  Rng rng;
  std::uint64_t event_count = 0;

  SimState(std::size_t dim_, std::vector<double> flat, std::uint64_t seed);

  std::size_t size() const noexcept { return opinions.size() / dim; }
  std::span<double> at(std::size_t v) noexcept { return {opinions.data() + v * dim, dim}; }
  std::span<const double> at(std::size_t v) const noexcept {
    return {opinions.data() + v * dim, dim};
  }
};

struct ScheduledEvent {
  double time;
  Edge edge;
};

struct EventRecord {
  double time;
  Edge edge;
  bool effective;
};

enum class UpdateOutcome { updated, blocked };

// Draws the next event after state.time; advances only the RNG.
ScheduledEvent schedule_next_event(SimState& state, const Lattice& lattice);

// Applies the compromise rule to the endpoints of `edge` if their distance is
// at most theta.
UpdateOutcome apply_update(SimState& state, Edge edge, double theta, double mu,
                           const MetricSpec& m);

double total_energy(const SimState& state);
std::vector<double> opinion_sum(const SimState& state);

struct TrajectorySummary {
  std::size_t dim = 1;
  std::vector<double> initial_opinions;  // flat, vertex-major
  std::vector<double> final_opinions;
  double final_time = 0.0;
  std::uint64_t event_count = 0;
  std::uint64_t effective_count = 0;
  double max_neighbor_distance = 0.0;            // working metric
  double max_euclidean_neighbor_distance = 0.0;
  double max_open_neighbor_distance = 0.0;       // over edges with rho <= theta
  double blocked_edge_fraction = 0.0;            // edges with rho > theta at t_max
  double max_deviation_from_mean = 0.0;          // Euclidean, from the initial average
  double total_energy_initial = 0.0;
  double total_energy_final = 0.0;
  std::vector<double> opinion_sum_initial;
  std::vector<double> opinion_sum_final;
  std::optional<std::vector<EventRecord>> event_log;

  friend bool operator==(const TrajectorySummary&, const TrajectorySummary&);
};

// Stepwise driver; run_simulation() is the whole-horizon convenience wrapper.
// Observers that need every intermediate state (e.g. flatness tracking) use
// step() directly.
class Simulation {
 public:
  explicit Simulation(SimParams params);

  // Processes the next event if it falls before t_max. Returns the event, or
  // nullopt once the horizon is reached (state.time is then t_max).
  std::optional<EventRecord> step();
  void run();

  const SimState& state() const noexcept { return state_; }
  const SimParams& params() const noexcept { return params_; }
  std::span<const double> initial_opinions() const noexcept { return initial_; }
  TrajectorySummary summarize() const;

 private:
  SimParams params_;
  SimState state_;
  std::vector<double> initial_;
  std::uint64_t effective_count_ = 0;
  std::vector<EventRecord> log_;
};

TrajectorySummary run_simulation(const SimParams& params);

// Fills the neighbour/blocking statistics of a summary from a configuration.
void summarize_configuration(const SimParams& params, std::span<const double> initial,
                             std::span<const double> final_opinions, TrajectorySummary& out);

// Replays a recorded event log (effective flags are recomputed, not trusted)
// from the given initial configuration.
std::vector<double> replay_events(std::span<const double> initial, std::size_t dim,
                                  const std::vector<EventRecord>& log, double theta, double mu,
                                  const MetricSpec& m);

enum class Outcome { consensus_proxy, fragmented_proxy, undecided };

std::string to_string(Outcome o);

Outcome classify_outcome(const TrajectorySummary& summary, double consensus_tol = 1e-3);

// CSV with header time,u,v,effective and 17 significant digits.
void write_event_log_csv(std::ostream& out, const std::vector<EventRecord>& log);

}  // namespace deffuant
