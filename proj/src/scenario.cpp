#include "deffuant/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>

#include "deffuant/config.hpp"
#include "deffuant/error.hpp"
#include "deffuant/kernels.hpp"
#include "deffuant/random.hpp"
#include "deffuant/sweep.hpp"

namespace deffuant {

using nlohmann::json;

double hypercube_theta_c_formula(std::size_t k, double p) {
  const double rk = std::sqrt(static_cast<double>(k));
  if (k == 1) return 1.0;
  if ((k == 2 || k == 3) && p >= 1.0 - 1.0 / rk && p <= 1.0 / rk) return 1.0;
  return rk * std::max(p, 1.0 - p);
}

std::string prediction_statement(const ThetaPrediction& p, const MetricSpec& m) {
  if (!p.bounded) return "unbounded support in a sensitive coordinate: no consensus for every theta";
  if (!m.declared_weakly_convex || !m.declared_locally_dominated)
    return "metric is not declared weakly convex and locally dominated; max{R, h} is only a heuristic here";
  if (p.gap > p.radius) return "theta_c = max{R, h} = h: the support has a gap wider than the radius";
  return "theta_c = max{R, h} = R: the radius dominates the largest gap";
}

json to_json(const ThetaPrediction& p) {
  json j{{"bounded", p.bounded},
         {"radius", format_real(p.radius)},
         {"gap", format_real(p.gap)},
         {"theta_c", format_real(p.theta_c)},
         {"discretized", p.discretized},
         {"support_points", p.support_points}};
  if (p.discretized) j["discretization_spacing"] = format_real(p.discretization_spacing);
  if (!p.note.empty()) j["note"] = p.note;
  return j;
}

json to_json(const MergeTimeline& t) {
  json th = json::array();
  for (double x : t.thresholds) th.push_back(format_real(x));
  return json{{"thresholds", th}, {"component_counts", t.component_counts}};
}

json to_json(const ComponentDecomposition& d) {
  json clusters = json::array();
  for (const auto& c : d.clusters) {
    json gens = json::array();
    for (const auto& g : c.generators) {
      json pt = json::array();
      for (double x : g.coords()) pt.push_back(format_real(x));
      gens.push_back(pt);
    }
    clusters.push_back(gens);
  }
  return json{{"theta", format_real(d.theta)},
              {"metric", to_json(d.metric)},
              {"clusters", clusters},
              {"at_jump_threshold", d.at_jump_threshold}};
}

void write_timeline_csv(std::ostream& out, const MergeTimeline& t) {
  out << "threshold,components_after\n";
  char buf[64];
  for (std::size_t i = 0; i < t.thresholds.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu\n", t.thresholds[i], t.component_counts[i + 1]);
    out << buf;
  }
}

std::vector<OpinionPoint> four_point_set(double a) {
  return {OpinionPoint{a, 1.0, 0.0}, OpinionPoint{a, -1.0, 0.0}, OpinionPoint{-a, 0.0, 1.0},
          OpinionPoint{-a, 0.0, -1.0}};
}

namespace {

std::ofstream open_out(const ScenarioOptions& o, const std::string& file) {
  std::filesystem::create_directories(o.out_dir);
  std::ofstream out(o.out_dir / file);
  if (!out) throw ConfigError("cannot write " + (o.out_dir / file).string());
  return out;
}

void write_summary(const ScenarioOptions& o, const json& summary) {
  open_out(o, "summary.json") << summary.dump(2) << '\n';
}

json sweep_summary(const SweepResult& r) {
  json rows = json::array();
  for (const auto& e : r.per_theta) {
    rows.push_back(json{{"theta", format_real(e.theta)},
                        {"estimate", format_real(e.estimate)},
                        {"wilson_lo", format_real(e.interval.lo)},
                        {"wilson_hi", format_real(e.interval.hi)},
                        {"trials", e.trials}});
  }
  json j{{"order_parameter", to_string(r.order_parameter)}, {"per_theta", rows}};
  j["theta_c_hat"] = r.theta_c_hat ? json(format_real(*r.theta_c_hat)) : json(nullptr);
  j["theta_c_predicted"] = r.theta_c_predicted ? json(format_real(*r.theta_c_predicted)) : json(nullptr);
  return j;
}

SweepResult sweep_and_write(const ScenarioOptions& o, const SweepSpec& spec) {
  SweepResult r = run_sweep(spec);
  auto out = open_out(o, "results.csv");
  write_sweep_csv(out, r);
  return r;
}

json scenario_uniform_line(const ScenarioOptions& o) {
  SweepSpec s;
  s.base.lattice = {500, Boundary::cycle};
  s.base.mu = 0.5;
  s.base.t_max = 2000.0;
  s.base.distribution = DistributionSpec::uniform_box({0.0}, {1.0});
  s.theta_grid = theta_grid_range(0.30, 0.70, 0.05);
  s.trials = o.trials.value_or(50);
  s.master_seed = o.seed.value_or(1);
  const SweepResult r = sweep_and_write(o, s);
  return json{{"scenario", "uniform_line"},
              {"note", "uniform initial opinions on [0,1]; the critical bound is 1/2"},
              {"sweep", sweep_summary(r)}};
}

json scenario_sphere(const ScenarioOptions& o) {
  const MetricSpec e = MetricSpec::euclidean();
  const ThetaPrediction k1 = predicted_theta_c(DistributionSpec::uniform_sphere(1), e);
  const ThetaPrediction k2 = predicted_theta_c(DistributionSpec::uniform_sphere(2), e, 10000);
  SweepSpec s;
  s.base.lattice = {500, Boundary::cycle};
  s.base.mu = 0.5;
  s.base.t_max = 2000.0;
  s.base.distribution = DistributionSpec::uniform_sphere(2);
  s.theta_grid = theta_grid_range(0.80, 1.20, 0.05);
  s.trials = o.trials.value_or(20);
  s.master_seed = o.seed.value_or(1);
  const SweepResult r = sweep_and_write(o, s);
  return json{{"scenario", "sphere"},
              {"note", "uniform law on the unit sphere: critical bound 2 on the line, 1 in dimension >= 2"},
              {"prediction_k1", to_json(k1)},
              {"prediction_k2", to_json(k2)},
              {"sweep_k2", sweep_summary(r)}};
}

json scenario_hypercube(const ScenarioOptions& o) {
  auto out = open_out(o, "hypercube.csv");
  out << "k,p,radius,gap,theta_c,formula\n";
  json rows = json::array();
  for (std::size_t k : {1, 2, 3, 4, 6}) {
    for (double p : {0.3, 0.5, 0.7}) {
      const ThetaPrediction pred = predicted_theta_c(DistributionSpec::bernoulli_product(k, p), MetricSpec::euclidean());
      const double formula = hypercube_theta_c_formula(k, p);
      char buf[200];
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", k, p, pred.radius, pred.gap, pred.theta_c,
                    formula);
      out << buf;
      rows.push_back(json{{"k", k},
                          {"p", format_real(p)},
                          {"prediction", to_json(pred)},
                          {"formula", format_real(formula)}});
    }
  }
  return json{{"scenario", "hypercube"},
              {"note", "independent Bernoulli(p) coordinates: R = sqrt(k) max{p, 1-p}, h = 1"},
              {"table", rows}};
}

json timeline_scenario(const ScenarioOptions& o, const std::string& name, double a, const std::string& note) {
  const MergeTimeline t = merge_timeline(four_point_set(a), MetricSpec::euclidean());
  auto out = open_out(o, "timeline.csv");
  write_timeline_csv(out, t);
  const DistributionSpec d = DistributionSpec::uniform_atoms(four_point_set(a));
  return json{{"scenario", name},
              {"note", note},
              {"timeline", to_json(t)},
              {"prediction", to_json(predicted_theta_c(d, MetricSpec::euclidean()))}};
}

json scenario_ln2(const ScenarioOptions& o) {
  const DistributionSpec d = DistributionSpec::harmonic_geometric(40);
  const MetricSpec e = MetricSpec::euclidean();
  const ThetaPrediction pred = predicted_theta_c(d, e);
  const ComponentDecomposition dec = components_at(support_of(d).points, 0.4, e);
  const MergeTimeline t = merge_timeline(support_of(d).points, e);
  auto out = open_out(o, "timeline.csv");
  write_timeline_csv(out, t);
  return json{{"scenario", "ln2"},
              {"note", "atoms 1/n with mass 2^-n (40 terms, tail mass on 0): mean ln 2 and a jump in D_theta"},
              {"prediction", to_json(pred)},
              {"components_at_0.4", to_json(dec)}};
}

json scenario_cubic(const ScenarioOptions&) {
  const MetricSpec c = MetricSpec::cubic();
  const ThetaPrediction a =
      predicted_theta_c(DistributionSpec::uniform_atoms({OpinionPoint{-0.5}, OpinionPoint{0.5}}), c);
  const ThetaPrediction b =
      predicted_theta_c(DistributionSpec::uniform_atoms({OpinionPoint{1.0}, OpinionPoint{2.0}}), c);
  return json{{"scenario", "cubic"},
              {"note", "rho(x, y) = |x^3 - y^3| is not translation invariant"},
              {"atoms_minus_half_half", to_json(a)},
              {"atoms_one_two", to_json(b)}};
}

json scenario_mu_critical(const ScenarioOptions& o) {
  const DistributionSpec d = DistributionSpec::uniform_atoms(
      {OpinionPoint{0.0, 0.0}, OpinionPoint{1.0, 0.0}, OpinionPoint{1.0 / std::numbers::pi, 1.0}});
  json runs = json::array();
  auto out = open_out(o, "results.csv");
  out << "mu,trial,blocked_fraction,max_dev\n";
  const std::size_t trials = o.trials.value_or(20);
  for (double mu : {0.5, 1.0 / std::numbers::pi}) {
    SweepSpec s;
    s.base.lattice = {200, Boundary::cycle};
    s.base.mu = mu;
    s.base.t_max = 1000.0;
    s.base.distribution = d;
    s.theta_grid = {1.0};
    s.trials = trials;
    s.master_seed = o.seed.value_or(1);
    const SweepResult r = run_sweep(s);
    double mean_blocked = 0.0;
    for (const auto& rec : r.records) {
      mean_blocked += rec.blocked_fraction;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", mu, rec.trial, rec.blocked_fraction, rec.max_deviation);
      out << buf;
    }
    mean_blocked /= static_cast<double>(r.records.size());
    runs.push_back(json{{"mu", format_real(mu)}, {"mean_blocked_fraction", format_real(mean_blocked)}});
  }
  return json{{"scenario", "mu_critical"},
              {"note", "critical case theta = h = 1 for three atoms; outcome may depend on whether mu is rational"},
              {"prediction", to_json(predicted_theta_c(d, MetricSpec::euclidean()))},
              {"runs", runs}};
}

struct AnomalyStats {
  double mean_differing_fraction = 0.0;
  double mean_max_euclidean = 0.0;
};

json scenario_discrete_anomaly(const ScenarioOptions& o) {
  SimParams base;
  base.lattice = {400, Boundary::cycle};
  base.theta = 2.0;
  base.mu = 1.0 / std::numbers::pi;
  base.t_max = 500.0;
  base.metric = MetricSpec::discrete();
  base.distribution = DistributionSpec::mixed_1d(0.0, 0.5, -1.0, 1.0);
  const std::size_t trials = o.trials.value_or(50);
  const std::uint64_t master = o.seed.value_or(1);
  struct Row {
    double differing;
    double max_euclid;
  };
  const auto rows = kernels::map_parallel<Row>(trials, [&](std::size_t t) {
    SimParams p = base;
    p.seed = derive_seed(master, t);
    const TrajectorySummary s = run_simulation(p);
    std::size_t differing = 0;
    for (std::size_t e = 0; e < p.lattice.edge_count(); ++e) {
      const Edge ed = p.lattice.edge(e);
      if (std::abs(s.final_opinions[ed.u] - s.final_opinions[ed.v]) > 1e-12) ++differing;
    }
    return Row{static_cast<double>(differing) / static_cast<double>(p.lattice.edge_count()),
               s.max_euclidean_neighbor_distance};
  });
  auto out = open_out(o, "results.csv");
  out << "trial,differing_fraction,max_euclidean_neighbor_distance\n";
  AnomalyStats st;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", t, rows[t].differing, rows[t].max_euclid);
    out << buf;
    st.mean_differing_fraction += rows[t].differing / static_cast<double>(trials);
    st.mean_max_euclidean += rows[t].max_euclid / static_cast<double>(trials);
  }
  return json{{"scenario", "discrete_anomaly"},
              {"note", "discrete metric at theta = 2: everyone always talks, but exact agreement is never reached"},
              {"trials", trials},
              {"mean_differing_fraction", format_real(st.mean_differing_fraction)},
              {"mean_max_euclidean_neighbor_distance", format_real(st.mean_max_euclidean)}};
}

using Runner = std::function<json(const ScenarioOptions&)>;

const std::map<std::string, Runner>& catalog() {
  static const std::map<std::string, Runner> c{
      {"uniform_line", scenario_uniform_line},
      {"sphere", scenario_sphere},
      {"hypercube", scenario_hypercube},
      {"figure1",
       [](const ScenarioOptions& o) {
         return timeline_scenario(o, "figure1", 2.0, "two segments at distance 4: thresholds 2 and 4");
       }},
      {"chain_reaction",
       [](const ScenarioOptions& o) {
         return timeline_scenario(o, "chain_reaction", 0.99,
                                  "segments at distance 1.98: once each pair merges at 2, the hulls merge at once");
       }},
      {"ln2", scenario_ln2},
      {"cubic", scenario_cubic},
      {"mu_critical", scenario_mu_critical},
      {"discrete_anomaly", scenario_discrete_anomaly},
  };
  return c;
}

}  // namespace

std::vector<std::string> scenario_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : catalog()) names.push_back(name);
  return names;
}

json run_scenario(const std::string& name, const ScenarioOptions& options) {
  const auto it = catalog().find(name);
  if (it == catalog().end()) throw ConfigError("unknown scenario '" + name + "'");
  json summary = it->second(options);
  write_summary(options, summary);
  return summary;
}

}  // namespace deffuant
