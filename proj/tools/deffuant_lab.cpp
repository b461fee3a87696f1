// deffuant_lab: command-line front end for simulations, theta sweeps, critical
// value predictions, reachable-set timelines and the scenario catalog.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "deffuant/config.hpp"
#include "deffuant/error.hpp"
#include "deffuant/geometry.hpp"
#include "deffuant/sad.hpp"
#include "deffuant/scenario.hpp"
#include "deffuant/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace deffuant;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<std::size_t> trials;
  std::optional<int> jobs;
};

std::ofstream open_file(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name);
  if (!out) throw ConfigError("cannot write " + (fs::path(dir) / name).string());
  return out;
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
  open_file(dir, name) << j.dump(2) << '\n';
}

LabConfig load(const CommonFlags& f) {
  if (f.config.empty()) throw ConfigError("--config is required");
  LabConfig c = load_config(f.config);
  if (f.seed) c.sim.seed = *f.seed;
  if (f.trials && c.sweep) c.sweep->trials = *f.trials;
  return c;
}

int cmd_simulate(const CommonFlags& f) {
  const LabConfig c = load(f);
  const TrajectorySummary s = run_simulation(c.sim);
  json j = to_json(s);
  j["config"] = to_json(c);
  write_json(f.out, "summary.json", j);
  if (s.event_log) {
    auto out = open_file(f.out, "events.csv");
    write_event_log_csv(out, *s.event_log);
  }
  std::printf("events %llu (effective %llu), blocked fraction %.6g, max deviation %.6g, outcome %s\n",
              static_cast<unsigned long long>(s.event_count), static_cast<unsigned long long>(s.effective_count),
              s.blocked_edge_fraction, s.max_deviation_from_mean, to_string(classify_outcome(s)).c_str());
  return 0;
}

int cmd_sweep(const CommonFlags& f) {
  const LabConfig c = load(f);
  const SweepSpec spec = c.sweep_spec();
  const SweepResult r = run_sweep(spec);
  {
    auto out = open_file(f.out, "results.csv");
    write_sweep_csv(out, r);
  }
  json rows = json::array();
  std::printf("theta,estimate,wilson_lo,wilson_hi\n");
  for (const auto& e : r.per_theta) {
    std::printf("%.6g,%.4f,%.4f,%.4f\n", e.theta, e.estimate, e.interval.lo, e.interval.hi);
    rows.push_back(json{{"theta", format_real(e.theta)},
                        {"estimate", format_real(e.estimate)},
                        {"wilson_lo", format_real(e.interval.lo)},
                        {"wilson_hi", format_real(e.interval.hi)}});
  }
  json j{{"config", to_json(c)}, {"order_parameter", to_string(r.order_parameter)}, {"per_theta", rows}};
  j["theta_c_hat"] = r.theta_c_hat ? json(format_real(*r.theta_c_hat)) : json(nullptr);
  j["theta_c_predicted"] = r.theta_c_predicted ? json(format_real(*r.theta_c_predicted)) : json(nullptr);
  write_json(f.out, "summary.json", j);
  if (r.theta_c_hat) {
    std::printf("theta_c_hat %.6g\n", *r.theta_c_hat);
  } else {
    std::printf("theta_c_hat absent (no crossing of 1/2 on the grid)\n");
  }
  if (r.theta_c_predicted) std::printf("theta_c_predicted %.6g\n", *r.theta_c_predicted);
  return 0;
}

int cmd_predict(const CommonFlags& f, std::optional<std::size_t> m) {
  const LabConfig c = load(f);
  const ThetaPrediction p = predicted_theta_c(c.sim.distribution, c.sim.metric, m);
  const std::string statement = prediction_statement(p, c.sim.metric);
  json j = to_json(p);
  j["statement"] = statement;
  j["distribution"] = to_json(c.sim.distribution);
  j["metric"] = to_json(c.sim.metric);
  write_json(f.out, "summary.json", j);
  if (!p.bounded) {
    std::printf("R = inf\n%s\n", statement.c_str());
    return 0;
  }
  std::printf("R = %.17g\nh = %.17g\ntheta_c = %.17g\n%s\n", p.radius, p.gap, p.theta_c, statement.c_str());
  if (p.discretized) std::printf("(%s; spacing %.3g)\n", p.note.c_str(), p.discretization_spacing);
  return 0;
}

int cmd_dtheta(const CommonFlags& f, std::optional<double> theta, std::optional<std::size_t> m) {
  const LabConfig c = load(f);
  const SupportDescription sup = support_of(c.sim.distribution);
  const std::vector<OpinionPoint> pts = sup.analytic ? sup.discretize(m.value_or(2000)) : sup.points;
  const MergeTimeline t = merge_timeline(pts, c.sim.metric);
  {
    auto out = open_file(f.out, "timeline.csv");
    write_timeline_csv(out, t);
  }
  write_timeline_csv(std::cout, t);
  json j{{"timeline", to_json(t)}, {"support_points", pts.size()}};
  if (theta) {
    const ComponentDecomposition d = components_at(pts, *theta, c.sim.metric);
    j["components"] = to_json(d);
    std::printf("%zu component(s) at theta = %.17g%s\n", d.clusters.size(), *theta,
                d.at_jump_threshold ? " (theta sits on a jump)" : "");
  }
  write_json(f.out, "summary.json", j);
  return 0;
}

int cmd_sad_check(const CommonFlags& f) {
  LabConfig c = load(f);
  c.sim.record_events = true;
  const TrajectorySummary s = run_simulation(c.sim);
  const QuietWindow w = find_quiet_window(*s.event_log, c.sim.lattice);
  WeightTable table;
  try {
    table = track_weights(*s.event_log, w, c.sim.mu);
  } catch (const ContractViolation&) {
    throw UnsupportedError("every cycle edge saw an effective update; rerun on a path lattice");
  }
  const double err = verify_representation(table, s.initial_opinions, s.final_opinions, s.dim);
  std::size_t unimodal = 0;
  for (const auto& row : table.rows) unimodal += check_unimodality(row);
  {
    auto out = open_file(f.out, "weights.csv");
    write_weight_table_csv(out, table);
    auto ev = open_file(f.out, "events.csv");
    write_event_log_csv(ev, *s.event_log);
  }
  write_json(f.out, "summary.json",
             json{{"window_first", w.first},
                  {"window_length", w.length},
                  {"max_representation_error", format_real(err)},
                  {"unimodal_rows", unimodal},
                  {"rows", table.rows.size()}});
  std::printf("window [%zu, +%zu), max representation error %.3g, unimodal rows %zu/%zu\n", w.first, w.length, err,
              unimodal, table.rows.size());
  return 0;
}

int cmd_metric_check(const CommonFlags& f, std::size_t samples) {
  const LabConfig c = load(f);
  const MetricSpec& m = c.sim.metric;
  const std::size_t k = c.sim.distribution.dim();
  const Box box = Box::cube(k, -1.0, 1.0);
  const std::uint64_t seed = c.sim.seed;
  const WeakConvexityVerdict wc = check_weak_convexity(m, box, samples, seed);
  const DominationVerdict dom = check_local_domination(m, 1.0, box, samples, seed);
  json sens = json::array();
  bool all_sensitive = true;
  for (std::size_t i = 0; i < k; ++i) {
    const SensitivityVerdict v = check_coordinate_sensitivity(m, k, i, {1.0, 100.0, 1e4}, seed);
    all_sensitive = all_sensitive && v.sensitive;
    json env = json::array();
    for (double x : v.lower_envelope) env.push_back(format_real(x));
    sens.push_back(json{{"coordinate", i}, {"sensitive", v.sensitive}, {"lower_envelope", env}});
  }
  json j{{"metric", to_json(m)},
         {"dimension", k},
         {"weakly_convex", wc.passed},
         {"locally_dominated", dom.dominated},
         {"c_hat", format_real(dom.c_hat)},
         {"sensitivity", sens}};
  if (wc.counterexample) {
    const auto& ce = *wc.counterexample;
    auto pt = [](const OpinionPoint& p) {
      json a = json::array();
      for (double x : p.coords()) a.push_back(format_real(x));
      return a;
    };
    j["convexity_counterexample"] = json{{"x", pt(ce.x)},
                                         {"y", pt(ce.y)},
                                         {"z", pt(ce.z)},
                                         {"alpha", format_real(ce.alpha)},
                                         {"excess", format_real(ce.excess)}};
  }
  write_json(f.out, "summary.json", j);
  std::printf("weakly convex: %s\nlocally dominated: %s (c_hat %.4g)\nsensitive to every coordinate: %s\n",
              wc.passed ? "yes" : "no (counterexample found)", dom.dominated ? "yes" : "no", dom.c_hat,
              all_sensitive ? "yes" : "no");
  return 0;
}

int cmd_scenario(const CommonFlags& f, const std::string& name) {
  ScenarioOptions o;
  o.out_dir = f.out;
  o.seed = f.seed;
  o.trials = f.trials;
  const json summary = run_scenario(name, o);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

void add_common(CLI::App* sub, CommonFlags& f, bool needs_config) {
  auto* opt = sub->add_option("--config", f.config, "JSON configuration file");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "master seed (overrides the config)");
  sub->add_option("--out", f.out, "output directory")->capture_default_str();
  sub->add_option("--trials", f.trials, "trials per theta (overrides the config)")->check(CLI::PositiveNumber);
  sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded-confidence opinion dynamics on line lattices"};
  app.require_subcommand(1);
  CommonFlags f;

  auto* simulate = app.add_subcommand("simulate", "run one trajectory");
  add_common(simulate, f, true);
  auto* sweep = app.add_subcommand("sweep", "theta sweep with order-parameter estimates");
  add_common(sweep, f, true);
  auto* predict = app.add_subcommand("predict", "critical value max{R, h} for the configured law");
  add_common(predict, f, true);
  std::optional<std::size_t> disc;
  predict->add_option("--discretization", disc, "points used for analytic supports")->check(CLI::PositiveNumber);
  auto* dtheta = app.add_subcommand("dtheta", "merge timeline of the reachable set (CSV)");
  add_common(dtheta, f, true);
  std::optional<double> theta;
  dtheta->add_option("--theta", theta, "also list the components at this theta");
  dtheta->add_option("--discretization", disc, "points used for analytic supports")->check(CLI::PositiveNumber);
  auto* sad = app.add_subcommand("sad-check", "weight-table representation of a recorded run");
  add_common(sad, f, true);
  auto* metric = app.add_subcommand("metric-check", "randomized metric property checks");
  add_common(metric, f, true);
  std::size_t samples = 20000;
  metric->add_option("--samples", samples, "samples per check")->capture_default_str();
  auto* scenario = app.add_subcommand("scenario", "run a catalog scenario");
  add_common(scenario, f, false);
  std::string name;
  std::string names;
  for (const auto& n : scenario_names()) names += (names.empty() ? "" : ", ") + n;
  scenario->add_option("name", name, "one of: " + names)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (f.jobs) omp_set_num_threads(*f.jobs);
    if (*simulate) return cmd_simulate(f);
    if (*sweep) return cmd_sweep(f);
    if (*predict) return cmd_predict(f, disc);
    if (*dtheta) return cmd_dtheta(f, theta, disc);
    if (*sad) return cmd_sad_check(f);
    if (*metric) return cmd_metric_check(f, samples);
    if (*scenario) return cmd_scenario(f, name);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const UnsupportedError& e) {
    std::fprintf(stderr, "unsupported: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
