#pragma once

// JSON configuration documents: lattice, dynamics, metric, distribution,
// sweep and seed. Reals are written as 17-digit decimal strings; on input a
// real may be a JSON number or a string such as "0.25", "1/3", "pi", "1/pi".

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deffuant/dynamics.hpp"
#include "deffuant/sweep.hpp"

namespace deffuant {

struct SweepSettings {
  std::vector<double> theta_grid;
  std::size_t trials = 1;
  OrderParameter order_parameter = OrderParameter::no_blocked_fraction;
};

struct LabConfig {
  SimParams sim;
  std::optional<SweepSettings> sweep;

  SweepSpec sweep_spec() const;  // throws ConfigError without a sweep section
};

// Parses a real written as a number or an arithmetic string (products and
// quotients of decimals, pi, e, inf). Throws ConfigError.
double parse_real(const nlohmann::json& j);
double parse_real_string(const std::string& text);
std::string format_real(double x);

nlohmann::json to_json(const MetricSpec& m);
MetricSpec metric_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistributionSpec& d);
DistributionSpec distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LabConfig& c);
LabConfig config_from_json(const nlohmann::json& j);

LabConfig load_config(const std::string& path);
void save_config(const std::string& path, const LabConfig& c);

nlohmann::json to_json(const TrajectorySummary& s);

}  // namespace deffuant
