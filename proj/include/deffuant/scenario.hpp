#pragma once

// Named experiment pipelines. Each writes its artifacts (summary.json plus
// CSV tables) into an output directory and returns the summary document.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deffuant/geometry.hpp"

namespace deffuant {

struct ScenarioOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
};

std::vector<std::string> scenario_names();

// Throws ConfigError for an unknown name.
nlohmann::json run_scenario(const std::string& name, const ScenarioOptions& options);

// Closed-form critical value for the Bernoulli(p)^k hypercube, Euclidean.
double hypercube_theta_c_formula(std::size_t k, double p);

// One-line reading of a prediction: which bound is active, or why none applies.
std::string prediction_statement(const ThetaPrediction& p, const MetricSpec& m);

nlohmann::json to_json(const ThetaPrediction& p);
nlohmann::json to_json(const MergeTimeline& t);
nlohmann::json to_json(const ComponentDecomposition& d);

// CSV with header threshold,components_after.
void write_timeline_csv(std::ostream& out, const MergeTimeline& t);

// {(a,1,0), (a,-1,0), (-a,0,1), (-a,0,-1)}: two segments of length 2 facing
// each other at distance 2a. a = 2 merges in two steps, a = 0.99 in one.
std::vector<OpinionPoint> four_point_set(double a);

}  // namespace deffuant
