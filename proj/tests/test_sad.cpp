#include <doctest.h>

#include <cmath>
#include <numeric>

#include "deffuant/error.hpp"
#include "deffuant/random.hpp"
#include "deffuant/sad.hpp"

using namespace deffuant;

namespace {

std::vector<std::int64_t> random_edges(Rng& rng, std::size_t len, std::int64_t spread) {
  std::uniform_int_distribution<std::int64_t> pick(-spread, spread);
  std::vector<std::int64_t> e(len);
  for (auto& u : e) u = pick(rng);
  return e;
}

// Independent replay of a log on plain arrays, used as the oracle for rows.
std::vector<std::vector<double>> naive_weights(const std::vector<EventRecord>& log, std::size_t n, double mu) {
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) w[i][i] = 1.0;
  for (const auto& ev : log) {
    if (!ev.effective) continue;
    for (std::size_t y = 0; y < n; ++y) {
      const double a = w[ev.edge.u][y], b = w[ev.edge.v][y];
      w[ev.edge.u][y] = a + mu * (b - a);
      w[ev.edge.v][y] = b + mu * (a - b);
    }
  }
  return w;
}

}  // namespace

TEST_CASE("sad_step examples") {
  SadProfile p = sad_step(SadProfile::delta(0), 0, 0.5);
  CHECK(p.at(0) == 0.5);
  CHECK(p.at(1) == 0.5);
  p = sad_step(p, 1, 0.5);
  CHECK(p.at(0) == 0.5);
  CHECK(p.at(1) == 0.25);
  CHECK(p.at(2) == 0.25);
  const SadProfile q = sad_step(p, 10, 0.5);
  CHECK(q.first() == p.first());
  CHECK(q.last() == p.last());
  CHECK_THROWS_AS(sad_step(p, 0, 0.7), ConfigError);
}

TEST_CASE("sad_run examples") {
  const SadProfile d = sad_run({}, 0.3, 5);
  CHECK(d.at(5) == 1.0);
  CHECK(d.total() == 1.0);
  const SadProfile p = sad_run({0, 1}, 0.5, 0);
  CHECK(p.at(0) == 0.5);
  CHECK(p.at(1) == 0.25);
  CHECK(p.at(2) == 0.25);
}

TEST_CASE("unimodality examples") {
  CHECK(check_unimodality(sad_run({0, 1}, 0.5, 0)));
  CHECK(check_unimodality(SadProfile::delta(3)));
  const std::vector<double> bad{0.4, 0.1, 0.5};
  CHECK_FALSE(check_unimodality(bad));
}

TEST_CASE("property: random SAD runs are valid unimodal profiles") {
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const double mu = uniform_in(rng, 1e-3, 0.5);
    const auto edges = random_edges(rng, 1 + t % 1000, 8);
    const SadProfile p = sad_run(edges, mu, 0);
    REQUIRE(std::abs(p.total() - 1.0) <= 1e-12);
    for (double w : p.weights()) REQUIRE(w >= 0.0);
    REQUIRE(check_unimodality(p));
  }
}

TEST_CASE("track_weights examples") {
  const QuietWindow w{0, 6, 6};
  const WeightTable id = track_weights({}, w, 0.3);
  for (std::size_t v = 0; v < 6; ++v)
    for (std::size_t y = 0; y < 6; ++y) CHECK(id.rows[v][y] == (v == y ? 1.0 : 0.0));

  const WeightTable one = track_weights({EventRecord{0.1, {2, 3}, true}}, w, 0.3);
  CHECK(one.rows[2][2] == doctest::Approx(0.7));
  CHECK(one.rows[2][3] == doctest::Approx(0.3));
  CHECK(one.rows[3][2] == doctest::Approx(0.3));
  CHECK(one.rows[3][3] == doctest::Approx(0.7));

  // Window [1, 4) has quiet boundary edges <0,1> and <3,4>; an event on one of
  // them breaks the contract.
  const QuietWindow inner{1, 3, 6};
  CHECK_THROWS_AS(track_weights({EventRecord{0.1, {3, 4}, true}}, inner, 0.3), ContractViolation);
  CHECK_NOTHROW(track_weights({EventRecord{0.1, {3, 4}, false}}, inner, 0.3));
}

TEST_CASE("verify_representation with no events is exact") {
  const QuietWindow w{0, 4, 4};
  const std::vector<double> init{0.1, 0.2, 0.3, 0.4};
  CHECK(verify_representation(track_weights({}, w, 0.5), init, init, 1) == 0.0);
}

TEST_CASE("representation on simulated runs") {
  SimParams p;
  p.lattice = {50, Boundary::cycle};
  p.theta = 2.0;
  p.mu = 0.5;
  p.t_max = 10.0;
  p.record_events = true;
  p.seed = 8;
  auto s = run_simulation(p);
  QuietWindow w = find_quiet_window(*s.event_log, p.lattice);
  WeightTable t;
  try {
    t = track_weights(*s.event_log, w, p.mu);
  } catch (const ContractViolation&) {
    // Every cycle edge was active: fall back to the path lattice.
    p.lattice.boundary = Boundary::path;
    s = run_simulation(p);
    w = find_quiet_window(*s.event_log, p.lattice);
    t = track_weights(*s.event_log, w, p.mu);
  }
  CHECK(verify_representation(t, s.initial_opinions, s.final_opinions, 1) <= 1e-8);
  for (const auto& row : t.rows) {
    CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) <= 1e-10);
    CHECK(check_unimodality(row));
  }

  SimParams q;
  q.lattice = {30, Boundary::path};
  q.theta = 3.0;
  q.t_max = 5.0;
  q.distribution = DistributionSpec::uniform_sphere(2);
  q.record_events = true;
  q.seed = 9;
  const auto s2 = run_simulation(q);
  const auto t2 = track_weights(*s2.event_log, find_quiet_window(*s2.event_log, q.lattice), q.mu);
  CHECK(verify_representation(t2, s2.initial_opinions, s2.final_opinions, 2) <= 1e-8);
}

TEST_CASE("weight rows match an independent replay and ignore blocked events") {
  SimParams p;
  p.lattice = {25, Boundary::path};
  p.theta = 0.35;
  p.mu = 0.3;
  p.t_max = 20.0;
  p.record_events = true;
  p.seed = 10;
  const auto s = run_simulation(p);
  const QuietWindow w = find_quiet_window(*s.event_log, p.lattice);
  const WeightTable t = track_weights(*s.event_log, w, p.mu);
  const auto oracle = naive_weights(*s.event_log, 25, p.mu);
  for (std::size_t v = 0; v < 25; ++v)
    for (std::size_t y = 0; y < 25; ++y) REQUIRE(std::abs(t.rows[v][y] - oracle[v][y]) <= 1e-14);

  std::vector<EventRecord> padded;
  for (const auto& ev : *s.event_log) {
    padded.push_back(EventRecord{ev.time, ev.edge, false});
    padded.push_back(ev);
  }
  CHECK(track_weights(padded, w, p.mu).rows == t.rows);
}

TEST_CASE("quiet windows on a cycle") {
  const Lattice cyc{6, Boundary::cycle};
  std::vector<EventRecord> log{{0.1, {0, 1}, true}, {0.2, {1, 2}, true}, {0.3, {3, 4}, false}};
  const QuietWindow w = find_quiet_window(log, cyc);
  CHECK(w.first == 3);  // edge <2,3> is the first quiet one
  CHECK(w.length == 6);
  CHECK_NOTHROW(track_weights(log, w, 0.5));
}
