#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "deffuant/dynamics.hpp"
#include "deffuant/error.hpp"
#include "deffuant/geometry.hpp"
#include "deffuant/random.hpp"

using namespace deffuant;

namespace {

SimState two_vertices(std::vector<double> flat, std::size_t dim = 1) { return SimState(dim, std::move(flat), 1); }

SimParams uniform_line(std::size_t n, double theta, double t_max, std::uint64_t seed) {
  SimParams p;
  p.lattice = {n, Boundary::cycle};
  p.theta = theta;
  p.mu = 0.5;
  p.t_max = t_max;
  p.seed = seed;
  return p;
}

// Energy change measured as a sum of factored square differences, which keeps
// the cancellation between the two totals out of the comparison.
double energy_drop(const std::vector<double>& before, const std::vector<double>& after) {
  double d = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) d += (before[i] - after[i]) * (before[i] + after[i]);
  return d;
}

}  // namespace

TEST_CASE("lattice and parameter validation") {
  CHECK_THROWS_AS((Lattice{1, Boundary::cycle}.validate()), ConfigError);
  CHECK(Lattice{5, Boundary::cycle}.edge_count() == 5);
  CHECK(Lattice{5, Boundary::path}.edge_count() == 4);
  CHECK(Lattice{5, Boundary::cycle}.edge(4) == Edge{4, 0});
  SimParams p;
  p.mu = 0.6;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.mu = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.mu = 0.5;
  p.theta = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.theta = 1.0;
  p.t_max = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK(boundary_from_string("path") == Boundary::path);
  CHECK_THROWS_AS(boundary_from_string("torus"), ConfigError);
}

TEST_CASE("apply_update examples") {
  SimState s = two_vertices({0.2, 0.6});
  CHECK(apply_update(s, {0, 1}, 0.5, 0.5, MetricSpec::euclidean()) == UpdateOutcome::updated);
  CHECK(s.opinions[0] == doctest::Approx(0.4));
  CHECK(s.opinions[1] == doctest::Approx(0.4));

  SimState b = two_vertices({0.0, 1.0});
  CHECK(apply_update(b, {0, 1}, 0.5, 0.5, MetricSpec::euclidean()) == UpdateOutcome::blocked);
  CHECK(b.opinions == std::vector<double>{0.0, 1.0});

  SimState v = two_vertices({0.0, 0.0, 1.0, 0.0}, 2);
  CHECK(apply_update(v, {0, 1}, 2.0, 0.3, MetricSpec::euclidean()) == UpdateOutcome::updated);
  CHECK(v.opinions[0] == doctest::Approx(0.3));
  CHECK(v.opinions[1] == 0.0);
  CHECK(v.opinions[2] == doctest::Approx(0.7));
  CHECK(v.opinions[3] == 0.0);
}

TEST_CASE("energy and sum examples") {
  SimState s = two_vertices({0.0, 1.0});
  CHECK(total_energy(s) == 1.0);
  CHECK(opinion_sum(s) == std::vector<double>{1.0});
  SimState u = two_vertices({0.2, 0.6});
  const double before = total_energy(u);
  apply_update(u, {0, 1}, 0.5, 0.5, MetricSpec::euclidean());
  CHECK(before - total_energy(u) == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("property: exact energy identity on random effective updates") {
  Rng rng(5);
  for (std::size_t k : {1, 2, 5}) {
    for (int t = 0; t < 3000; ++t) {
      std::vector<double> flat(2 * k);
      for (auto& x : flat) x = uniform_in(rng, -3, 3);
      const double mu = uniform_in(rng, 1e-3, 0.5);
      SimState s(k, flat, 1);
      const double d = euclidean_distance(s.at(0), s.at(1));
      REQUIRE(apply_update(s, {0, 1}, d + 1.0, mu, MetricSpec::euclidean()) == UpdateOutcome::updated);
      const double drop = energy_drop(flat, s.opinions);
      const double expect = 2.0 * mu * (1.0 - mu) * d * d;
      REQUIRE(std::abs(drop - expect) <= 1e-10 * expect);
    }
  }
}

TEST_CASE("global clock: inter-event gaps and edge uniformity") {
  SimState s(1, {0.0, 0.0}, 42);
  const Lattice single{2, Boundary::path};
  double last = 0.0, total = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const ScheduledEvent e = schedule_next_event(s, single);
    total += e.time - last;
    last = s.time = e.time;
  }
  const double mean_gap = total / 1e6;
  CHECK(mean_gap >= 0.997);
  CHECK(mean_gap <= 1.003);

  SimState c(1, std::vector<double>(100, 0.0), 43);
  const Lattice cyc{100, Boundary::cycle};
  std::vector<double> hist(100, 0.0);
  for (int i = 0; i < 1000000; ++i) {
    const ScheduledEvent e = schedule_next_event(c, cyc);
    hist[e.edge.u] += 1.0;
    c.time = e.time;
  }
  double chi2 = 0.0;
  for (double h : hist) chi2 += (h - 1e4) * (h - 1e4) / 1e4;
  // 99 degrees of freedom: the 0.999 quantile is 148.23.
  CHECK(chi2 < 148.23);
}

TEST_CASE("determinism and replay") {
  SimParams p = uniform_line(60, 0.3, 50.0, 77);
  p.record_events = true;
  const TrajectorySummary a = run_simulation(p);
  const TrajectorySummary b = run_simulation(p);
  CHECK(a == b);
  REQUIRE(a.event_log.has_value());
  const auto replayed = replay_events(a.initial_opinions, 1, *a.event_log, p.theta, p.mu, p.metric);
  CHECK(replayed == a.final_opinions);
  p.seed = 78;
  CHECK_FALSE(run_simulation(p) == a);

  std::ostringstream csv;
  write_event_log_csv(csv, *a.event_log);
  CHECK(csv.str().rfind("time,u,v,effective\n", 0) == 0);
}

TEST_CASE("event times increase and the horizon is respected") {
  Simulation sim(uniform_line(20, 0.5, 30.0, 3));
  double last = 0.0;
  while (auto ev = sim.step()) {
    REQUIRE(ev->time >= last);
    REQUIRE(ev->time < 30.0);
    last = ev->time;
  }
  CHECK(sim.state().time == 30.0);
}

TEST_CASE("constant configuration is a fixed point") {
  SimParams p;
  p.lattice = {2, Boundary::path};
  p.distribution = DistributionSpec::point_mass(OpinionPoint{0.0});
  p.theta = 0.1;
  const auto s = run_simulation(p);
  CHECK(s.final_opinions == std::vector<double>{0.0, 0.0});
  CHECK(s.max_neighbor_distance == 0.0);
  CHECK(classify_outcome(s) == Outcome::consensus_proxy);
}

TEST_CASE("classify_outcome") {
  SimParams p;
  p.lattice = {4, Boundary::path};
  p.theta = 0.5;
  TrajectorySummary frozen;
  const std::vector<double> init{0.0, 0.0, 1.0, 1.0};
  summarize_configuration(p, init, init, frozen);
  CHECK(classify_outcome(frozen) == Outcome::fragmented_proxy);

  TrajectorySummary mid;
  summarize_configuration(p, std::vector<double>{0.0, 0.2, 0.4, 0.6}, std::vector<double>{0.0, 0.2, 0.4, 0.6}, mid);
  CHECK(classify_outcome(mid) == Outcome::undecided);
}

TEST_CASE("property: mass conservation and monotone energy on random runs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimParams p;
    p.lattice = {50, Boundary::cycle};
    p.theta = 0.3 + 0.1 * static_cast<double>(seed);
    p.mu = 0.05 * static_cast<double>(seed);
    p.t_max = 40.0;
    p.distribution = DistributionSpec::uniform_sphere(2);
    p.seed = seed;
    Simulation sim(p);
    double energy = total_energy(sim.state());
    const auto sum0 = opinion_sum(sim.state());
    while (sim.step()) {
      const double e = total_energy(sim.state());
      REQUIRE(e <= energy + 1e-12);
      energy = e;
    }
    const auto sum1 = opinion_sum(sim.state());
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(sum1[i] - sum0[i]) <= 1e-9 * std::max(1.0, std::abs(sum0[i])));
  }
}

TEST_CASE("property: opinions stay in the convex hull of the initial configuration") {
  SimParams p = uniform_line(40, 0.4, 30.0, 9);
  const auto line = run_simulation(p);
  const auto [lo, hi] = std::minmax_element(line.initial_opinions.begin(), line.initial_opinions.end());
  for (double x : line.final_opinions) {
    CHECK(x >= *lo - 1e-15);
    CHECK(x <= *hi + 1e-15);
  }

  SimParams q;
  q.lattice = {12, Boundary::cycle};
  q.theta = 1.0;
  q.t_max = 10.0;
  q.distribution = DistributionSpec::uniform_box({0.0, 0.0}, {1.0, 1.0});
  q.seed = 4;
  const auto plane = run_simulation(q);
  ConvexCluster hull;
  for (std::size_t v = 0; v < 12; ++v) hull.generators.emplace_back(std::vector<double>{plane.initial_opinions[2 * v], plane.initial_opinions[2 * v + 1]});
  for (std::size_t v = 0; v < 12; ++v) {
    CHECK(hull_contains(hull, OpinionPoint{plane.final_opinions[2 * v], plane.final_opinions[2 * v + 1]}));
  }
}

TEST_CASE("property: blocked pairs on distinct atoms never update") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimParams p;
    p.lattice = {100, Boundary::cycle};
    p.theta = 0.4;
    p.t_max = 100.0;
    p.distribution = DistributionSpec::uniform_atoms({OpinionPoint{0.0}, OpinionPoint{1.0}});
    p.seed = seed;
    p.record_events = true;
    const auto s = run_simulation(p);
    CHECK(s.final_opinions == s.initial_opinions);
    for (const auto& ev : *s.event_log) {
      if (s.initial_opinions[ev.edge.u] != s.initial_opinions[ev.edge.v]) REQUIRE_FALSE(ev.effective);
    }
  }
}

TEST_CASE("supercritical and subcritical proxies on the unit interval") {
  int converged = 0, blocked = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto hi = run_simulation(uniform_line(200, 0.8, 1000.0, derive_seed(100, t)));
    converged += hi.max_deviation_from_mean < 0.05;
    const auto lo = run_simulation(uniform_line(200, 0.2, 1000.0, derive_seed(200, t)));
    blocked += lo.blocked_edge_fraction > 0.0;
  }
  CHECK(converged >= 45);
  CHECK(blocked >= 45);
}
