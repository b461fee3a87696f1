#include "deffuant/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "deffuant/error.hpp"

namespace deffuant {

std::string to_string(Boundary b) { return b == Boundary::cycle ? "cycle" : "path"; }

Boundary boundary_from_string(const std::string& name) {
  if (name == "cycle") return Boundary::cycle;
  if (name == "path") return Boundary::path;
  throw ConfigError("unknown lattice boundary '" + name + "'");
}

void Lattice::validate() const {
  if (n < 2) throw ConfigError("lattice needs n >= 2 vertices");
}

void SimParams::validate() const {
  lattice.validate();
  if (!(theta > 0.0)) throw ConfigError("confidence bound theta must be > 0");
  if (!(mu > 0.0 && mu <= 0.5)) throw ConfigError("convergence parameter mu must lie in (0, 1/2]");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be finite and > 0");
  metric.validate_dimension(distribution.dim());
}

SimState::SimState(std::size_t dim_, std::vector<double> flat, std::uint64_t seed)
    : dim(dim_), opinions(std::move(flat)), rng(seed) {}

ScheduledEvent schedule_next_event(SimState& state, const Lattice& lattice) {
  const std::size_t edges = lattice.edge_count();
  const double gap =
      std::exponential_distribution<double>(static_cast<double>(edges))(state.rng);
  const std::size_t index = std::uniform_int_distribution<std::size_t>(0, edges - 1)(state.rng);
  return {state.time + gap, lattice.edge(index)};
}

UpdateOutcome apply_update(SimState& state, Edge edge, double theta, double mu,
                           const MetricSpec& m) {
  auto a = state.at(edge.u);
  auto b = state.at(edge.v);
  if (!(metric_distance(m, a, b) <= theta)) return UpdateOutcome::blocked;
  for (std::size_t i = 0; i < state.dim; ++i) {
    const double ai = a[i];
    const double bi = b[i];
    a[i] = ai + mu * (bi - ai);
    b[i] = bi + mu * (ai - bi);
  }
  return UpdateOutcome::updated;
}

double total_energy(const SimState& state) {
  double e = 0.0;
  for (double c : state.opinions) e += c * c;
  return e;
}

std::vector<double> opinion_sum(const SimState& state) {
  std::vector<double> s(state.dim, 0.0);
  for (std::size_t v = 0; v < state.size(); ++v) {
    const auto x = state.at(v);
    for (std::size_t i = 0; i < state.dim; ++i) s[i] += x[i];
  }
  return s;
}

bool operator==(const TrajectorySummary& a, const TrajectorySummary& b) {
  auto same_log = [](const auto& x, const auto& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    if (x->size() != y->size()) return false;
    for (std::size_t i = 0; i < x->size(); ++i) {
      const auto& p = (*x)[i];
      const auto& q = (*y)[i];
      if (p.time != q.time || !(p.edge == q.edge) || p.effective != q.effective) return false;
    }
    return true;
  };
  return a.dim == b.dim && a.initial_opinions == b.initial_opinions &&
         a.final_opinions == b.final_opinions && a.final_time == b.final_time &&
         a.event_count == b.event_count && a.effective_count == b.effective_count &&
         a.max_neighbor_distance == b.max_neighbor_distance &&
         a.max_euclidean_neighbor_distance == b.max_euclidean_neighbor_distance &&
         a.max_open_neighbor_distance == b.max_open_neighbor_distance &&
         a.blocked_edge_fraction == b.blocked_edge_fraction &&
         a.max_deviation_from_mean == b.max_deviation_from_mean &&
         a.total_energy_initial == b.total_energy_initial &&
         a.total_energy_final == b.total_energy_final &&
         a.opinion_sum_initial == b.opinion_sum_initial &&
         a.opinion_sum_final == b.opinion_sum_final && same_log(a.event_log, b.event_log);
}

namespace {

std::vector<double> draw_initial(const SimParams& p, Rng& rng) {
  const std::size_t k = p.distribution.dim();
  std::vector<double> flat(p.lattice.n * k);
  OpinionSampler sampler(p.distribution);
  for (std::size_t v = 0; v < p.lattice.n; ++v) {
    sampler.draw(rng, std::span<double>(flat.data() + v * k, k));
  }
  return flat;
}

SimState initial_state(const SimParams& p) {
  p.validate();
  SimState s(p.distribution.dim(), {}, p.seed);
  s.opinions = draw_initial(p, s.rng);
  return s;
}

}  // namespace

Simulation::Simulation(SimParams params)
    : params_(std::move(params)), state_(initial_state(params_)), initial_(state_.opinions) {}

std::optional<EventRecord> Simulation::step() {
  if (state_.time >= params_.t_max) return std::nullopt;
  const ScheduledEvent ev = schedule_next_event(state_, params_.lattice);
  if (ev.time > params_.t_max) {
    state_.time = params_.t_max;
    return std::nullopt;
  }
  state_.time = ev.time;
  ++state_.event_count;
  const bool effective =
      apply_update(state_, ev.edge, params_.theta, params_.mu, params_.metric) ==
      UpdateOutcome::updated;
  if (effective) ++effective_count_;
  EventRecord rec{ev.time, ev.edge, effective};
  if (params_.record_events) log_.push_back(rec);
  return rec;
}

void Simulation::run() {
  while (step()) {
  }
}

void summarize_configuration(const SimParams& params, std::span<const double> initial,
                             std::span<const double> final_opinions, TrajectorySummary& out) {
  const std::size_t k = params.distribution.dim();
  const std::size_t n = params.lattice.n;
  auto at = [k](std::span<const double> flat, std::size_t v) { return flat.subspan(v * k, k); };

  out.dim = k;
  out.max_neighbor_distance = 0.0;
  out.max_euclidean_neighbor_distance = 0.0;
  out.max_open_neighbor_distance = 0.0;
  std::size_t blocked = 0;
  const std::size_t edges = params.lattice.edge_count();
  for (std::size_t e = 0; e < edges; ++e) {
    const Edge edge = params.lattice.edge(e);
    const double rho = metric_distance(params.metric, at(final_opinions, edge.u), at(final_opinions, edge.v));
    const double euc = euclidean_distance(at(final_opinions, edge.u), at(final_opinions, edge.v));
    out.max_neighbor_distance = std::max(out.max_neighbor_distance, rho);
    out.max_euclidean_neighbor_distance = std::max(out.max_euclidean_neighbor_distance, euc);
    if (rho > params.theta) {
      ++blocked;
    } else {
      out.max_open_neighbor_distance = std::max(out.max_open_neighbor_distance, rho);
    }
  }
  out.blocked_edge_fraction = static_cast<double>(blocked) / static_cast<double>(edges);

  std::vector<double> sum0(k, 0.0), sum1(k, 0.0);
  double e0 = 0.0, e1 = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < k; ++i) {
      const double a = initial[v * k + i];
      const double b = final_opinions[v * k + i];
      sum0[i] += a;
      sum1[i] += b;
      e0 += a * a;
      e1 += b * b;
    }
  }
  std::vector<double> avg(k);
  for (std::size_t i = 0; i < k; ++i) avg[i] = sum0[i] / static_cast<double>(n);
  out.max_deviation_from_mean = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    out.max_deviation_from_mean =
        std::max(out.max_deviation_from_mean, euclidean_distance(at(final_opinions, v), avg));
  }
  out.total_energy_initial = e0;
  out.total_energy_final = e1;
  out.opinion_sum_initial = std::move(sum0);
  out.opinion_sum_final = std::move(sum1);
  out.initial_opinions.assign(initial.begin(), initial.end());
  out.final_opinions.assign(final_opinions.begin(), final_opinions.end());
}

TrajectorySummary Simulation::summarize() const {
  TrajectorySummary s;
  summarize_configuration(params_, initial_, state_.opinions, s);
  s.final_time = state_.time;
  s.event_count = state_.event_count;
  s.effective_count = effective_count_;
  if (params_.record_events) s.event_log = log_;
  return s;
}

TrajectorySummary run_simulation(const SimParams& params) {
  Simulation sim(params);
  sim.run();
  return sim.summarize();
}

std::vector<double> replay_events(std::span<const double> initial, std::size_t dim,
                                  const std::vector<EventRecord>& log, double theta, double mu,
                                  const MetricSpec& m) {
  SimState s(dim, std::vector<double>(initial.begin(), initial.end()), 0);
  for (const auto& ev : log) {
    if (ev.edge.u >= s.size() || ev.edge.v >= s.size())
      throw ContractViolation("replay_events: edge outside the configuration");
    apply_update(s, ev.edge, theta, mu, m);
  }
  return s.opinions;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::consensus_proxy: return "consensus_proxy";
    case Outcome::fragmented_proxy: return "fragmented_proxy";
    case Outcome::undecided: return "undecided";
  }
  return "undecided";
}

Outcome classify_outcome(const TrajectorySummary& summary, double consensus_tol) {
  if (!(consensus_tol > 0.0)) throw ConfigError("consensus_tol must be > 0");
  if (summary.max_neighbor_distance < consensus_tol &&
      summary.max_deviation_from_mean < consensus_tol)
    return Outcome::consensus_proxy;
  if (summary.blocked_edge_fraction > 0.0 && summary.max_open_neighbor_distance < consensus_tol)
    return Outcome::fragmented_proxy;
  return Outcome::undecided;
}

void write_event_log_csv(std::ostream& out, const std::vector<EventRecord>& log) {
  out << "time,u,v,effective\n";
  char buf[64];
  for (const auto& ev : log) {
    std::snprintf(buf, sizeof buf, "%.17g", ev.time);
    out << buf << ',' << ev.edge.u << ',' << ev.edge.v << ',' << (ev.effective ? 1 : 0) << '\n';
  }
}

}  // namespace deffuant
