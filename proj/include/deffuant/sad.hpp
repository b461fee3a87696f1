#pragma once

// Sharing-a-drink: deterministic pairwise averaging of a unit mass, and the
// weight tables that express simulated opinions as averages of initial values.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "deffuant/dynamics.hpp"

namespace deffuant {

// Weights on a contiguous window of Z starting at `first`; zero outside.
class SadProfile {
 public:
  static SadProfile delta(std::int64_t origin);
  static SadProfile from_weights(std::int64_t first, std::vector<double> weights);

  double at(std::int64_t v) const noexcept;
  std::int64_t first() const noexcept { return first_; }
  std::int64_t last() const noexcept { return first_ + static_cast<std::int64_t>(w_.size()) - 1; }
  std::span<const double> weights() const noexcept { return w_; }
  double total() const noexcept;

  // Shares along <u, u+1>: the two entries move toward each other by mu.
  void share(std::int64_t u, double mu);

 private:
  void cover(std::int64_t lo, std::int64_t hi);

  std::int64_t first_ = 0;
  std::vector<double> w_;
};

SadProfile sad_step(SadProfile profile, std::int64_t u, double mu);

// Folds sad_step over edges <u, u+1> given by their left endpoint u.
SadProfile sad_run(const std::vector<std::int64_t>& edge_sequence, double mu, std::int64_t origin);

// Non-decreasing up to a mode, then non-increasing (1e-14 slack).
bool check_unimodality(std::span<const double> weights);
bool check_unimodality(const SadProfile& profile);

// A run of consecutive lattice vertices (wrapping on a cycle) whose boundary
// edges see no effective update.
struct QuietWindow {
  std::size_t first = 0;  // first vertex
  std::size_t length = 0;
  std::size_t lattice_size = 0;

  std::size_t vertex(std::size_t offset) const noexcept { return (first + offset) % lattice_size; }
  // Offset of v inside the window, or length if v lies outside.
  std::size_t offset_of(std::size_t v) const noexcept;
};

// Picks a window from the log: on a cycle, the window is cut at the first edge
// without effective events; with no quiet edge (or on a path) it is the whole
// lattice with path semantics.
QuietWindow find_quiet_window(const std::vector<EventRecord>& log, const Lattice& lattice);

// rows[v][y] = weight of initial value at window offset y in opinion at offset v.
struct WeightTable {
  QuietWindow window;
  std::vector<std::vector<double>> rows;
};

// Throws ContractViolation if an effective event crosses the window boundary.
WeightTable track_weights(const std::vector<EventRecord>& log, const QuietWindow& window, double mu);

// Max over window vertices of || sum_y w(v,y) eta_0(y) - eta_t(v) ||_2; both
// configurations are flat, vertex-major over the whole lattice.
double verify_representation(const WeightTable& table, std::span<const double> initial,
                             std::span<const double> final_opinions, std::size_t dim);

// CSV rows v,y,weight (lattice vertex indices), nonzero weights only.
void write_weight_table_csv(std::ostream& out, const WeightTable& table);

}  // namespace deffuant
