#include "deffuant/sad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "deffuant/error.hpp"

namespace deffuant {

SadProfile SadProfile::delta(std::int64_t origin) {
  SadProfile p;
  p.first_ = origin;
  p.w_ = {1.0};
  return p;
}

SadProfile SadProfile::from_weights(std::int64_t first, std::vector<double> weights) {
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractViolation("SAD weights must be nonnegative");
  }
  SadProfile p;
  p.first_ = first;
  p.w_ = std::move(weights);
  return p;
}

double SadProfile::at(std::int64_t v) const noexcept {
  if (v < first_ || v > last()) return 0.0;
  return w_[static_cast<std::size_t>(v - first_)];
}

double SadProfile::total() const noexcept { return std::accumulate(w_.begin(), w_.end(), 0.0); }

void SadProfile::cover(std::int64_t lo, std::int64_t hi) {
  if (w_.empty()) {
    first_ = lo;
    w_.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    return;
  }
  if (lo < first_) {
    w_.insert(w_.begin(), static_cast<std::size_t>(first_ - lo), 0.0);
    first_ = lo;
  }
  if (hi > last()) w_.resize(static_cast<std::size_t>(hi - first_ + 1), 0.0);
}

void SadProfile::share(std::int64_t u, double mu) {
  const double a = at(u);
  const double b = at(u + 1);
  if (a == 0.0 && b == 0.0) return;
  cover(u, u + 1);
  auto& wa = w_[static_cast<std::size_t>(u - first_)];
  auto& wb = w_[static_cast<std::size_t>(u + 1 - first_)];
  wa = (1.0 - mu) * a + mu * b;
  wb = mu * a + (1.0 - mu) * b;
}

SadProfile sad_step(SadProfile profile, std::int64_t u, double mu) {
  if (!(mu > 0.0 && mu <= 0.5)) throw ConfigError("sad_step needs mu in (0, 1/2]");
  profile.share(u, mu);
  return profile;
}

SadProfile sad_run(const std::vector<std::int64_t>& edge_sequence, double mu, std::int64_t origin) {
  if (!(mu > 0.0 && mu <= 0.5)) throw ConfigError("sad_run needs mu in (0, 1/2]");
  SadProfile p = SadProfile::delta(origin);
  for (std::int64_t u : edge_sequence) p.share(u, mu);
  return p;
}

bool check_unimodality(std::span<const double> w) {
  constexpr double kSlack = 1e-14;
  std::size_t i = 1;
  while (i < w.size() && w[i] >= w[i - 1] - kSlack) ++i;
  while (i < w.size() && w[i] <= w[i - 1] + kSlack) ++i;
  return i >= w.size();
}

bool check_unimodality(const SadProfile& profile) { return check_unimodality(profile.weights()); }

std::size_t QuietWindow::offset_of(std::size_t v) const noexcept {
  const std::size_t off = (v + lattice_size - first % lattice_size) % lattice_size;
  return off < length ? off : length;
}

QuietWindow find_quiet_window(const std::vector<EventRecord>& log, const Lattice& lattice) {
  lattice.validate();
  QuietWindow whole{0, lattice.n, lattice.n};
  if (lattice.boundary == Boundary::path) return whole;
  std::vector<char> busy(lattice.n, 0);
  for (const auto& ev : log) {
    if (!ev.effective) continue;
    // On a cycle edge index e joins e and e+1 (mod n); its lower endpoint
    // identifies it except for the wrap edge <n-1, 0>.
    const std::size_t e = (ev.edge.v == (ev.edge.u + 1) % lattice.n) ? ev.edge.u : ev.edge.v;
    busy[e] = 1;
  }
  for (std::size_t e = 0; e < lattice.n; ++e) {
    if (!busy[e]) return QuietWindow{(e + 1) % lattice.n, lattice.n, lattice.n};
  }
  // No quiet edge on the cycle: fall back to the wrap edge as boundary. The
  // caller's track_weights will reject the log if it crosses it.
  return whole;
}

WeightTable track_weights(const std::vector<EventRecord>& log, const QuietWindow& window, double mu) {
  if (!(mu > 0.0 && mu <= 0.5)) throw ConfigError("track_weights needs mu in (0, 1/2]");
  if (window.length == 0 || window.lattice_size == 0)
    throw ConfigError("track_weights: empty window");
  WeightTable table;
  table.window = window;
  table.rows.assign(window.length, std::vector<double>(window.length, 0.0));
  for (std::size_t v = 0; v < window.length; ++v) table.rows[v][v] = 1.0;

  for (const auto& ev : log) {
    if (!ev.effective) continue;
    std::size_t a = window.offset_of(ev.edge.u);
    std::size_t b = window.offset_of(ev.edge.v);
    const bool in_a = a < window.length;
    const bool in_b = b < window.length;
    if (!in_a && !in_b) continue;
    if (in_a != in_b || (a + 1 != b && b + 1 != a))
      throw ContractViolation("track_weights: effective event on a quiet boundary edge");
    auto& ra = table.rows[a];
    auto& rb = table.rows[b];
    for (std::size_t y = 0; y < window.length; ++y) {
      const double wa = ra[y];
      const double wb = rb[y];
      ra[y] = (1.0 - mu) * wa + mu * wb;
      rb[y] = mu * wa + (1.0 - mu) * wb;
    }
  }
  return table;
}

double verify_representation(const WeightTable& table, std::span<const double> initial,
                             std::span<const double> final_opinions, std::size_t dim) {
  const auto& w = table.window;
  if (initial.size() != final_opinions.size() || initial.size() != w.lattice_size * dim)
    throw ContractViolation("verify_representation: configurations do not match the window");
  double worst = 0.0;
  std::vector<double> acc(dim);
  for (std::size_t v = 0; v < w.length; ++v) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t y = 0; y < w.length; ++y) {
      const double weight = table.rows[v][y];
      if (weight == 0.0) continue;
      const std::size_t src = w.vertex(y);
      for (std::size_t i = 0; i < dim; ++i) acc[i] += weight * initial[src * dim + i];
    }
    const std::size_t dst = w.vertex(v);
    double err2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = acc[i] - final_opinions[dst * dim + i];
      err2 += d * d;
    }
    worst = std::max(worst, std::sqrt(err2));
  }
  return worst;
}

void write_weight_table_csv(std::ostream& out, const WeightTable& table) {
  out << "v,y,weight\n";
  char buf[64];
  for (std::size_t v = 0; v < table.rows.size(); ++v) {
    for (std::size_t y = 0; y < table.rows[v].size(); ++y) {
      const double w = table.rows[v][y];
      if (w == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", w);
      out << table.window.vertex(v) << ',' << table.window.vertex(y) << ',' << buf << '\n';
    }
  }
}

}  // namespace deffuant
