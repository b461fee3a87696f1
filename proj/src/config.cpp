#include "deffuant/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <variant>

#include "deffuant/error.hpp"

namespace deffuant {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

double real_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? parse_real(j.at(key)) : fallback;
}

double require_real(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  return parse_real(j.at(key));
}

std::vector<double> real_list(const json& j) {
  if (!j.is_array()) throw ConfigError("config: expected a list of reals");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(parse_real(v));
  return out;
}

json real_list_json(std::span<const double> xs) {
  json a = json::array();
  for (double x : xs) a.push_back(format_real(x));
  return a;
}

std::uint64_t parse_seed(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::size_t used = 0;
    try {
      const auto v = std::stoull(s, &used, 10);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("config: seed must be an unsigned 64-bit integer");
}

// Recursive-descent reader for factor (('*' | '/') factor)*.
class RealParser {
 public:
  explicit RealParser(const std::string& s) : s_(s) {}

  double parse() {
    double v = product();
    skip_space();
    if (pos_ != s_.size()) fail();
    return v;
  }

 private:
  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail() const { throw ConfigError("cannot parse real '" + s_ + "'"); }

  double product() {
    double v = factor();
    for (;;) {
      skip_space();
      if (pos_ >= s_.size()) return v;
      const char op = s_[pos_];
      if (op != '*' && op != '/') return v;
      ++pos_;
      const double rhs = factor();
      v = op == '*' ? v * rhs : v / rhs;
    }
  }

  double factor() {
    skip_space();
    if (pos_ >= s_.size()) fail();
    if (s_[pos_] == '-') {
      ++pos_;
      return -factor();
    }
    if (s_[pos_] == '+') {
      ++pos_;
      return factor();
    }
    if (std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalpha(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string word = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (word == "pi") return std::numbers::pi;
      if (word == "e") return std::numbers::e;
      if (word == "inf" || word == "infinity") return std::numeric_limits<double>::infinity();
      fail();
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail();
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

json phi_to_json(const PhiComponent& c) {
  return json{{"shape", c.shape == PhiComponent::Shape::huber ? "huber" : "power"},
              {"scale", format_real(c.scale)},
              {"param", format_real(c.param)}};
}

PhiComponent phi_from_json(const json& j) {
  PhiComponent c;
  const std::string shape = get_or<std::string>(j, "shape", "power");
  if (shape == "power") {
    c.shape = PhiComponent::Shape::power;
  } else if (shape == "huber") {
    c.shape = PhiComponent::Shape::huber;
  } else {
    throw ConfigError("phi component: unknown shape '" + shape + "'");
  }
  c.scale = real_or(j, "scale", 1.0);
  c.param = real_or(j, "param", 1.0);
  return c;
}

}  // namespace

double parse_real_string(const std::string& text) { return RealParser(text).parse(); }

double parse_real(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_real_string(j.get<std::string>());
  throw ConfigError("expected a real, got " + j.dump());
}

std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(const MetricSpec& m) {
  json j{{"kind", to_string(m.kind)},
         {"declared_weakly_convex", m.declared_weakly_convex},
         {"declared_locally_dominated", m.declared_locally_dominated}};
  switch (m.kind) {
    case MetricKind::lp:
    case MetricKind::lp_pow:
      j["p"] = format_real(m.p);
      break;
    case MetricKind::bounded_euclid:
      j["cap"] = format_real(m.cap);
      break;
    case MetricKind::phi: {
      json a = json::array();
      for (const auto& c : m.phi) a.push_back(phi_to_json(c));
      j["phi"] = a;
      break;
    }
    default:
      break;
  }
  return j;
}

MetricSpec metric_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("metric: expected an object");
  const MetricKind kind = metric_kind_from_string(get_or<std::string>(j, "kind", "euclidean"));
  MetricSpec m;
  switch (kind) {
    case MetricKind::euclidean: m = MetricSpec::euclidean(); break;
    case MetricKind::lp: m = MetricSpec::lp(real_or(j, "p", 2.0)); break;
    case MetricKind::lp_pow: m = MetricSpec::lp_pow(real_or(j, "p", 2.0)); break;
    case MetricKind::phi: {
      std::vector<PhiComponent> comps;
      if (j.contains("phi")) {
        if (!j.at("phi").is_array()) throw ConfigError("metric: phi must be a list");
        for (const auto& c : j.at("phi")) comps.push_back(phi_from_json(c));
      }
      m = MetricSpec::phi_metric(std::move(comps));
      break;
    }
    case MetricKind::discrete: m = MetricSpec::discrete(); break;
    case MetricKind::bounded_euclid: m = MetricSpec::bounded_euclid(real_or(j, "cap", 1.0)); break;
    case MetricKind::cubic: m = MetricSpec::cubic(); break;
  }
  m.declared_weakly_convex = get_or<bool>(j, "declared_weakly_convex", m.declared_weakly_convex);
  m.declared_locally_dominated = get_or<bool>(j, "declared_locally_dominated", m.declared_locally_dominated);
  m.validate();
  return m;
}

json to_json(const DistributionSpec& d) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FiniteAtoms>) {
          json pts = json::array(), probs = json::array();
          for (const auto& a : v.atoms) {
            pts.push_back(real_list_json(a.point.coords()));
            probs.push_back(format_real(a.probability));
          }
          json j{{"kind", "atoms"}, {"points", pts}, {"probabilities", probs}};
          if (v.relocated_tail_mass > 0.0) j["relocated_tail_mass"] = format_real(v.relocated_tail_mass);
          return j;
        } else if constexpr (std::is_same_v<T, BernoulliProduct>) {
          return json{{"kind", "bernoulli_product"}, {"k", v.k}, {"p", format_real(v.p)}};
        } else if constexpr (std::is_same_v<T, UniformSphere>) {
          return json{{"kind", "uniform_sphere"}, {"k", v.k}};
        } else if constexpr (std::is_same_v<T, UniformBox>) {
          return json{{"kind", "uniform_box"}, {"lo", real_list_json(v.lo)}, {"hi", real_list_json(v.hi)}};
        } else {
          return json{{"kind", "mixed_1d"},
                      {"atom_at", format_real(v.atom_at)},
                      {"atom_mass", format_real(v.atom_mass)},
                      {"lo", format_real(v.lo)},
                      {"hi", format_real(v.hi)}};
        }
      },
      d.kind());
}

DistributionSpec distribution_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("distribution: expected an object");
  const std::string kind = get_or<std::string>(j, "kind", "");
  if (kind == "atoms") {
    if (!j.contains("points")) throw ConfigError("distribution atoms: missing points");
    const json& pts = j.at("points");
    if (!pts.is_array() || pts.empty()) throw ConfigError("distribution atoms: points must be a non-empty list");
    std::vector<OpinionPoint> points;
    for (const auto& p : pts) points.emplace_back(p.is_array() ? real_list(p) : std::vector<double>{parse_real(p)});
    if (!j.contains("probabilities")) return DistributionSpec::uniform_atoms(std::move(points));
    const std::vector<double> probs = real_list(j.at("probabilities"));
    if (probs.size() != points.size()) throw ConfigError("distribution atoms: probabilities/points size mismatch");
    FiniteAtoms fa;
    for (std::size_t i = 0; i < points.size(); ++i) fa.atoms.push_back(Atom{points[i], probs[i]});
    fa.relocated_tail_mass = real_or(j, "relocated_tail_mass", 0.0);
    return DistributionSpec(std::move(fa));
  }
  if (kind == "bernoulli_product")
    return DistributionSpec::bernoulli_product(get_or<std::size_t>(j, "k", 1), require_real(j, "p"));
  if (kind == "uniform_sphere") return DistributionSpec::uniform_sphere(get_or<std::size_t>(j, "k", 2));
  if (kind == "uniform_box") {
    if (!j.contains("lo") || !j.contains("hi")) throw ConfigError("distribution uniform_box: needs lo and hi");
    auto bound = [](const json& b) { return b.is_array() ? real_list(b) : std::vector<double>{parse_real(b)}; };
    return DistributionSpec::uniform_box(bound(j.at("lo")), bound(j.at("hi")));
  }
  if (kind == "mixed_1d")
    return DistributionSpec::mixed_1d(real_or(j, "atom_at", 0.0), real_or(j, "atom_mass", 0.5),
                                      real_or(j, "lo", -1.0), real_or(j, "hi", 1.0));
  if (kind == "harmonic_geometric") return DistributionSpec::harmonic_geometric(get_or<std::size_t>(j, "terms", 40));
  throw ConfigError("distribution: unknown kind '" + kind + "'");
}

SweepSpec LabConfig::sweep_spec() const {
  if (!sweep) throw ConfigError("config has no sweep section");
  SweepSpec s;
  s.base = sim;
  s.theta_grid = sweep->theta_grid;
  s.trials = sweep->trials;
  s.order_parameter = sweep->order_parameter;
  s.master_seed = sim.seed;
  return s;
}

json to_json(const LabConfig& c) {
  json j;
  j["lattice"] = {{"n", c.sim.lattice.n}, {"boundary", to_string(c.sim.lattice.boundary)}};
  j["dynamics"] = {{"theta", format_real(c.sim.theta)},
                   {"mu", format_real(c.sim.mu)},
                   {"t_max", format_real(c.sim.t_max)},
                   {"record_events", c.sim.record_events}};
  j["metric"] = to_json(c.sim.metric);
  j["distribution"] = to_json(c.sim.distribution);
  j["seed"] = std::to_string(c.sim.seed);
  if (c.sweep) {
    j["sweep"] = {{"theta_grid", real_list_json(c.sweep->theta_grid)},
                  {"trials", c.sweep->trials},
                  {"order_parameter", to_string(c.sweep->order_parameter)}};
  }
  return j;
}

LabConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "lattice" && key != "dynamics" && key != "metric" && key != "distribution" && key != "sweep" &&
        key != "seed")
      throw ConfigError("config: unknown top-level key '" + key + "'");
  }
  LabConfig c;
  if (j.contains("lattice")) {
    const json& l = j.at("lattice");
    c.sim.lattice.n = get_or<std::size_t>(l, "n", c.sim.lattice.n);
    c.sim.lattice.boundary = boundary_from_string(get_or<std::string>(l, "boundary", "cycle"));
  }
  if (j.contains("dynamics")) {
    const json& d = j.at("dynamics");
    c.sim.theta = real_or(d, "theta", c.sim.theta);
    c.sim.mu = real_or(d, "mu", c.sim.mu);
    c.sim.t_max = real_or(d, "t_max", c.sim.t_max);
    c.sim.record_events = get_or<bool>(d, "record_events", false);
  }
  if (j.contains("metric")) c.sim.metric = metric_from_json(j.at("metric"));
  if (j.contains("distribution")) c.sim.distribution = distribution_from_json(j.at("distribution"));
  if (j.contains("seed")) c.sim.seed = parse_seed(j.at("seed"));
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    SweepSettings sw;
    if (s.contains("theta_grid")) {
      sw.theta_grid = real_list(s.at("theta_grid"));
    } else if (s.contains("from") && s.contains("to") && s.contains("step")) {
      sw.theta_grid = theta_grid_range(require_real(s, "from"), require_real(s, "to"), require_real(s, "step"));
    } else {
      throw ConfigError("sweep: give theta_grid or from/to/step");
    }
    const auto trials = get_or<long long>(s, "trials", 1);
    if (trials < 1) throw ConfigError("sweep: trials must be >= 1");
    sw.trials = static_cast<std::size_t>(trials);
    sw.order_parameter = order_parameter_from_string(get_or<std::string>(s, "order_parameter", "no_blocked_fraction"));
    c.sweep = std::move(sw);
  }
  c.sim.validate();
  if (c.sweep) c.sweep_spec().validate();
  return c;
}

LabConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::string& path, const LabConfig& c) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << to_json(c).dump(2) << '\n';
}

json to_json(const TrajectorySummary& s) {
  return json{{"dim", s.dim},
              {"final_time", format_real(s.final_time)},
              {"event_count", s.event_count},
              {"effective_count", s.effective_count},
              {"max_neighbor_distance", format_real(s.max_neighbor_distance)},
              {"max_euclidean_neighbor_distance", format_real(s.max_euclidean_neighbor_distance)},
              {"max_open_neighbor_distance", format_real(s.max_open_neighbor_distance)},
              {"blocked_edge_fraction", format_real(s.blocked_edge_fraction)},
              {"max_deviation_from_mean", format_real(s.max_deviation_from_mean)},
              {"total_energy_initial", format_real(s.total_energy_initial)},
              {"total_energy_final", format_real(s.total_energy_final)},
              {"opinion_sum_initial", real_list_json(s.opinion_sum_initial)},
              {"opinion_sum_final", real_list_json(s.opinion_sum_final)},
              {"outcome", to_string(classify_outcome(s))}};
}

}  // namespace deffuant
