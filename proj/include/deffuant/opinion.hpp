#pragma once

// Opinion vectors and the distance measures used to decide whether two
// neighbours are close enough to compromise, together with randomized checkers
// for the metric properties the critical-value results depend on.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deffuant {

// One agent's opinion: a finite real vector of dimension k >= 1.
class OpinionPoint {
 public:
  explicit OpinionPoint(std::vector<double> coords);
  OpinionPoint(std::initializer_list<double> coords);
  explicit OpinionPoint(std::span<const double> coords);

  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const OpinionPoint&, const OpinionPoint&) = default;

 private:
  std::vector<double> coords_;
};

// A convex, nonnegative per-coordinate profile phi_i used by the separable
// metric rho_phi(x, y) = sum_i phi_i(|x_i - y_i|).
struct PhiComponent {
  enum class Shape {
    power,  // scale * s^exponent, exponent >= 1
    huber,  // scale * (s^2 / (2 delta) if s <= delta else s - delta / 2)
  };
  Shape shape = Shape::power;
  double scale = 1.0;
  double param = 1.0;  // exponent for power, delta for huber

  double operator()(double s) const;
};

enum class MetricKind { euclidean, lp, lp_pow, phi, discrete, bounded_euclid, cubic };

std::string to_string(MetricKind kind);
MetricKind metric_kind_from_string(const std::string& name);

// Declarative distance measure plus the properties the caller claims for it.
struct MetricSpec {
  MetricKind kind = MetricKind::euclidean;
  double p = 2.0;      // lp / lp_pow exponent; lp treats p > 1e6 as infinity
  double cap = 1.0;    // bounded_euclid saturation level
  std::vector<PhiComponent> phi;
  bool declared_weakly_convex = true;
  bool declared_locally_dominated = true;

  static MetricSpec euclidean();
  static MetricSpec lp(double p);
  static MetricSpec lp_pow(double p);
  static MetricSpec phi_metric(std::vector<PhiComponent> components);
  static MetricSpec discrete();
  static MetricSpec bounded_euclid(double cap = 1.0);
  static MetricSpec cubic();

  bool is_max_norm() const noexcept { return kind == MetricKind::lp && p > 1e6; }

  // Throws ConfigError on out-of-domain parameters.
  void validate() const;
  // Throws ConfigError if the metric cannot act on k-dimensional opinions.
  void validate_dimension(std::size_t k) const;
};

inline constexpr double kInfinityExponent = 1e6;

// rho(x, y). Kernels call the span overload directly; dimensions are checked
// by the OpinionPoint overload only.
double metric_distance(const MetricSpec& m, std::span<const double> x,
                       std::span<const double> y);
double metric_distance(const MetricSpec& m, const OpinionPoint& x, const OpinionPoint& y);

double euclidean_distance(std::span<const double> x, std::span<const double> y);

// Axis-aligned sampling region for the property checkers.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box cube(std::size_t k, double lo, double hi);
  std::size_t dim() const noexcept { return lo.size(); }
  bool empty() const;
};

struct ConvexityCounterexample {
  OpinionPoint x;
  OpinionPoint y;
  OpinionPoint z;
  double alpha;
  double excess;  // rho(x, alpha y + (1-alpha) z) - max(rho(x,y), rho(x,z))
};

// Counterexamples are conclusive; a pass only means none was found in
// `samples` draws from the stated seed.
struct WeakConvexityVerdict {
  bool passed = true;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::optional<ConvexityCounterexample> counterexample;
};

WeakConvexityVerdict check_weak_convexity(const MetricSpec& m, const Box& box,
                                          std::size_t n_samples, std::uint64_t rng_seed);

struct DominationVerdict {
  bool dominated = true;
  double c_hat = 0.0;                   // largest sampled rho / euclid ratio
  std::vector<double> rung_max_ratio;   // per ladder rung
  std::vector<double> rung_scale;       // Euclidean separation scale per rung
  std::vector<std::pair<OpinionPoint, OpinionPoint>> witness_sequence;  // argmax pair per rung
};

DominationVerdict check_local_domination(const MetricSpec& m, double gamma, const Box& box,
                                         std::size_t n_samples, std::uint64_t rng_seed);

struct SensitivityVerdict {
  bool sensitive = false;
  std::vector<double> lower_envelope;  // minimised rho for each grid value s
  std::optional<std::pair<OpinionPoint, OpinionPoint>> witness;  // minimiser at the last s
};

// Coordinate index i is zero-based.
SensitivityVerdict check_coordinate_sensitivity(const MetricSpec& m, std::size_t k,
                                                std::size_t i,
                                                const std::vector<double>& s_grid,
                                                std::uint64_t rng_seed = 1);

}  // namespace deffuant
