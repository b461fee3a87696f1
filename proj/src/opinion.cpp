#include "deffuant/opinion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deffuant/error.hpp"
#include "deffuant/random.hpp"

namespace deffuant {

namespace {

void require_finite(std::span<const double> coords) {
  if (coords.empty()) throw ConfigError("opinion vector must have dimension >= 1");
  for (double c : coords) {
    if (!std::isfinite(c)) throw ConfigError("opinion coordinates must be finite");
  }
}

}  // namespace

OpinionPoint::OpinionPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  require_finite(coords_);
}

OpinionPoint::OpinionPoint(std::initializer_list<double> coords) : coords_(coords) {
  require_finite(coords_);
}

OpinionPoint::OpinionPoint(std::span<const double> coords)
    : coords_(coords.begin(), coords.end()) {
  require_finite(coords_);
}

double PhiComponent::operator()(double s) const {
  switch (shape) {
    case Shape::power:
      return scale * std::pow(s, param);
    case Shape::huber:
      return scale * (s <= param ? s * s / (2.0 * param) : s - 0.5 * param);
  }
  return 0.0;
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::lp: return "lp";
    case MetricKind::lp_pow: return "lp_pow";
    case MetricKind::phi: return "phi";
    case MetricKind::discrete: return "discrete";
    case MetricKind::bounded_euclid: return "bounded_euclid";
    case MetricKind::cubic: return "cubic";
  }
  return "unknown";
}

MetricKind metric_kind_from_string(const std::string& name) {
  for (auto k : {MetricKind::euclidean, MetricKind::lp, MetricKind::lp_pow, MetricKind::phi,
                 MetricKind::discrete, MetricKind::bounded_euclid, MetricKind::cubic}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown metric kind '" + name + "'");
}

MetricSpec MetricSpec::euclidean() { return {}; }

MetricSpec MetricSpec::lp(double p) {
  MetricSpec m;
  m.kind = MetricKind::lp;
  m.p = p;
  m.validate();
  return m;
}

MetricSpec MetricSpec::lp_pow(double p) {
  MetricSpec m;
  m.kind = MetricKind::lp_pow;
  m.p = p;
  m.declared_weakly_convex = p >= 1.0;
  m.declared_locally_dominated = p >= 1.0;
  m.validate();
  return m;
}

MetricSpec MetricSpec::phi_metric(std::vector<PhiComponent> components) {
  MetricSpec m;
  m.kind = MetricKind::phi;
  m.phi = std::move(components);
  m.validate();
  return m;
}

MetricSpec MetricSpec::discrete() {
  MetricSpec m;
  m.kind = MetricKind::discrete;
  m.declared_locally_dominated = false;
  return m;
}

MetricSpec MetricSpec::bounded_euclid(double cap) {
  MetricSpec m;
  m.kind = MetricKind::bounded_euclid;
  m.cap = cap;
  m.validate();
  return m;
}

MetricSpec MetricSpec::cubic() {
  MetricSpec m;
  m.kind = MetricKind::cubic;
  // Dominated on bounded regions only.
  m.declared_locally_dominated = false;
  return m;
}

void MetricSpec::validate() const {
  switch (kind) {
    case MetricKind::lp:
      if (!(p >= 1.0)) throw ConfigError("lp metric requires p >= 1 (or infinity)");
      break;
    case MetricKind::lp_pow:
      if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("lp_pow metric requires finite p > 0");
      break;
    case MetricKind::bounded_euclid:
      if (!(cap > 0.0) || !std::isfinite(cap)) throw ConfigError("bounded_euclid requires cap > 0");
      break;
    case MetricKind::phi:
      if (phi.empty()) throw ConfigError("phi metric requires at least one component");
      for (const auto& c : phi) {
        if (!(c.scale > 0.0)) throw ConfigError("phi component scale must be > 0");
        if (c.shape == PhiComponent::Shape::power && !(c.param >= 1.0))
          throw ConfigError("phi power component needs exponent >= 1 to stay convex");
        if (c.shape == PhiComponent::Shape::huber && !(c.param > 0.0))
          throw ConfigError("phi huber component needs delta > 0");
      }
      break;
    default:
      break;
  }
}

void MetricSpec::validate_dimension(std::size_t k) const {
  validate();
  if (k == 0) throw ConfigError("opinion dimension must be >= 1");
  if (kind == MetricKind::cubic && k != 1)
    throw ConfigError("cubic metric is defined for k = 1 only");
  if (kind == MetricKind::phi && phi.size() != 1 && phi.size() != k)
    throw ConfigError("phi metric needs one component per coordinate (or a single shared one)");
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double metric_distance(const MetricSpec& m, std::span<const double> x,
                       std::span<const double> y) {
  const std::size_t k = x.size();
  switch (m.kind) {
    case MetricKind::euclidean:
      return euclidean_distance(x, y);
    case MetricKind::lp: {
      if (m.p > kInfinityExponent) {
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) acc = std::max(acc, std::abs(x[i] - y[i]));
        return acc;
      }
      if (m.p == 2.0) return euclidean_distance(x, y);
      double acc = 0.0;
      if (m.p == 1.0) {
        for (std::size_t i = 0; i < k; ++i) acc += std::abs(x[i] - y[i]);
        return acc;
      }
      for (std::size_t i = 0; i < k; ++i) acc += std::pow(std::abs(x[i] - y[i]), m.p);
      return std::pow(acc, 1.0 / m.p);
    }
    case MetricKind::lp_pow: {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += std::pow(std::abs(x[i] - y[i]), m.p);
      return acc;
    }
    case MetricKind::phi: {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const auto& c = m.phi.size() == 1 ? m.phi.front() : m.phi[i];
        acc += c(std::abs(x[i] - y[i]));
      }
      return acc;
    }
    case MetricKind::discrete:
      for (std::size_t i = 0; i < k; ++i) {
        if (x[i] != y[i]) return 1.0;
      }
      return 0.0;
    case MetricKind::bounded_euclid:
      return std::min(euclidean_distance(x, y), m.cap);
    case MetricKind::cubic: {
      const double a = x[0], b = y[0];
      return std::abs(a * a * a - b * b * b);
    }
  }
  return 0.0;
}

double metric_distance(const MetricSpec& m, const OpinionPoint& x, const OpinionPoint& y) {
  if (x.dim() != y.dim()) throw ConfigError("metric_distance: dimension mismatch");
  m.validate_dimension(x.dim());
  return metric_distance(m, x.coords(), y.coords());
}

Box Box::cube(std::size_t k, double lo, double hi) {
  return Box{std::vector<double>(k, lo), std::vector<double>(k, hi)};
}

bool Box::empty() const {
  if (lo.empty() || lo.size() != hi.size()) return true;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) return true;
  }
  return false;
}

namespace {

void draw_in_box(const Box& box, Rng& rng, std::vector<double>& out) {
  out.resize(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) out[i] = uniform_in(rng, box.lo[i], box.hi[i]);
}

void check_box(const MetricSpec& m, const Box& box) {
  if (box.empty()) throw ConfigError("sample region is empty");
  m.validate_dimension(box.dim());
}

}  // namespace

WeakConvexityVerdict check_weak_convexity(const MetricSpec& m, const Box& box,
                                          std::size_t n_samples, std::uint64_t rng_seed) {
  check_box(m, box);
  if (n_samples == 0) throw ConfigError("weak convexity check needs n_samples >= 1");

  constexpr double kTolerance = 1e-9;
  Rng rng(rng_seed);
  std::vector<double> x, y, z, mid(box.dim());
  WeakConvexityVerdict verdict;
  verdict.seed = rng_seed;
  for (std::size_t s = 0; s < n_samples; ++s) {
    draw_in_box(box, rng, x);
    draw_in_box(box, rng, y);
    draw_in_box(box, rng, z);
    const double alpha = uniform01(rng);
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = alpha * y[i] + (1.0 - alpha) * z[i];
    const double lhs = metric_distance(m, x, mid);
    const double rhs = std::max(metric_distance(m, x, y), metric_distance(m, x, z));
    verdict.samples = s + 1;
    if (lhs > rhs + kTolerance * std::max(1.0, rhs)) {
      verdict.passed = false;
      verdict.counterexample =
          ConvexityCounterexample{OpinionPoint(x), OpinionPoint(y), OpinionPoint(z), alpha, lhs - rhs};
      return verdict;
    }
  }
  return verdict;
}

DominationVerdict check_local_domination(const MetricSpec& m, double gamma, const Box& box,
                                         std::size_t n_samples, std::uint64_t rng_seed) {
  check_box(m, box);
  if (!(gamma > 0.0)) throw ConfigError("local domination check needs gamma > 0");
  if (n_samples == 0) throw ConfigError("local domination check needs n_samples >= 1");

  // Each rung probes separations 1000x smaller than the previous one with twice
  // the samples. A ratio that keeps growing by more than 10x per rung is read as
  // unbounded; a Lipschitz-type metric keeps the ratio flat or shrinking.
  constexpr int kRungs = 4;
  constexpr double kRungShrink = 1e-3;
  constexpr double kGrowth = 10.0;

  Rng rng(rng_seed);
  std::normal_distribution<double> gauss;
  const std::size_t k = box.dim();
  std::vector<double> x, y(k), dir(k);
  DominationVerdict verdict;
  double scale = gamma;
  for (int r = 0; r < kRungs; ++r, scale *= kRungShrink) {
    const std::size_t count = n_samples << r;
    double best = 0.0;
    std::vector<double> best_x, best_y;
    for (std::size_t s = 0; s < count; ++s) {
      draw_in_box(box, rng, x);
      double norm = 0.0;
      do {
        norm = 0.0;
        for (auto& d : dir) {
          d = gauss(rng);
          norm += d * d;
        }
        norm = std::sqrt(norm);
      } while (norm == 0.0);
      const double sep = scale * uniform_in(rng, 0.1, 1.0);
      for (std::size_t i = 0; i < k; ++i) y[i] = x[i] + sep * dir[i] / norm;
      const double e = euclidean_distance(x, y);
      if (e == 0.0 || e > gamma) continue;
      const double ratio = metric_distance(m, x, y) / e;
      if (ratio > best) {
        best = ratio;
        best_x = x;
        best_y = y;
      }
    }
    verdict.rung_max_ratio.push_back(best);
    verdict.rung_scale.push_back(scale);
    if (!best_x.empty())
      verdict.witness_sequence.emplace_back(OpinionPoint(best_x), OpinionPoint(best_y));
    verdict.c_hat = std::max(verdict.c_hat, best);
  }
  bool always_growing = true;
  for (std::size_t r = 1; r < verdict.rung_max_ratio.size(); ++r) {
    if (!(verdict.rung_max_ratio[r] > kGrowth * verdict.rung_max_ratio[r - 1])) {
      always_growing = false;
    }
  }
  verdict.dominated = !always_growing;
  return verdict;
}

SensitivityVerdict check_coordinate_sensitivity(const MetricSpec& m, std::size_t k,
                                                std::size_t i,
                                                const std::vector<double>& s_grid,
                                                std::uint64_t rng_seed) {
  m.validate_dimension(k);
  if (i >= k) throw ConfigError("sensitivity check: coordinate index out of range");
  if (s_grid.empty()) throw ConfigError("sensitivity check: empty grid");
  for (std::size_t j = 0; j < s_grid.size(); ++j) {
    if (!(s_grid[j] > 0.0) || (j > 0 && !(s_grid[j] > s_grid[j - 1])))
      throw ConfigError("sensitivity check: grid must be positive and increasing");
  }

  constexpr int kStarts = 16;
  constexpr int kMaxPolls = 20000;
  Rng rng(rng_seed);
  SensitivityVerdict verdict;
  std::vector<double> x(k), d(k), y(k);

  auto objective = [&](const std::vector<double>& xs, const std::vector<double>& ds) {
    for (std::size_t j = 0; j < k; ++j) y[j] = xs[j] + ds[j];
    return metric_distance(m, xs, y);
  };

  for (double s : s_grid) {
    const double constrained = s * (1.0 + 1e-9);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_x, best_y;
    for (int start = 0; start < kStarts; ++start) {
      for (std::size_t j = 0; j < k; ++j) {
        x[j] = uniform_in(rng, -s, s);
        d[j] = uniform_in(rng, -s, s);
      }
      d[i] = uniform01(rng) < 0.5 ? -constrained : constrained;
      double f = objective(x, d);
      // Compass search over x (all coordinates) and d (all but coordinate i).
      double step = 0.5 * s;
      for (int poll = 0; poll < kMaxPolls && step > s * 1e-10; ++poll) {
        bool improved = false;
        for (std::size_t var = 0; var < 2 * k; ++var) {
          if (var == k + i) continue;
          double& slot = var < k ? x[var] : d[var - k];
          for (double sign : {1.0, -1.0}) {
            const double saved = slot;
            slot = saved + sign * step;
            const double g = objective(x, d);
            if (g < f) {
              f = g;
              improved = true;
              break;
            }
            slot = saved;
          }
        }
        if (!improved) step *= 0.5;
      }
      if (f < best) {
        best = f;
        best_x = x;
        for (std::size_t j = 0; j < k; ++j) y[j] = x[j] + d[j];
        best_y = y;
      }
    }
    verdict.lower_envelope.push_back(best);
    verdict.witness.emplace(OpinionPoint(best_x), OpinionPoint(best_y));
  }

  const auto& env = verdict.lower_envelope;
  bool monotone = true;
  for (std::size_t j = 1; j < env.size(); ++j) {
    if (env[j] < env[j - 1] * (1.0 - 1e-9)) monotone = false;
  }
  verdict.sensitive = monotone && env.back() > 10.0 * env.front();
  if (verdict.sensitive) verdict.witness.reset();
  return verdict;
}

}  // namespace deffuant
