#pragma once

// Catalog of initial opinion laws with closed-form mean, support description
// and radius with respect to a working metric.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "deffuant/opinion.hpp"
#include "deffuant/random.hpp"

namespace deffuant {

struct Atom {
  OpinionPoint point;
  double probability;
};

struct FiniteAtoms {
  std::vector<Atom> atoms;
  // Mass that a truncated infinite law moved onto its accumulation point.
  double relocated_tail_mass = 0.0;
};

// Independent Bernoulli(p) coordinates; support is the hypercube {0,1}^k.
struct BernoulliProduct {
  std::size_t k = 1;
  double p = 0.5;
};

struct UniformSphere {
  std::size_t k = 2;
};

struct UniformBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

// One-dimensional law: an atom of mass atom_mass at atom_at plus the remaining
// mass spread uniformly on [lo, hi].
struct Mixed1d {
  double atom_at = 0.0;
  double atom_mass = 0.5;
  double lo = -1.0;
  double hi = 1.0;
};

class DistributionSpec {
 public:
  using Kind = std::variant<FiniteAtoms, BernoulliProduct, UniformSphere, UniformBox, Mixed1d>;

  explicit DistributionSpec(Kind kind);

  static DistributionSpec point_mass(OpinionPoint x);
  static DistributionSpec uniform_atoms(std::vector<OpinionPoint> points);
  static DistributionSpec atoms(std::vector<Atom> atoms);
  static DistributionSpec bernoulli_product(std::size_t k, double p);
  static DistributionSpec uniform_sphere(std::size_t k);
  static DistributionSpec uniform_box(std::vector<double> lo, std::vector<double> hi);
  static DistributionSpec mixed_1d(double atom_at, double atom_mass, double lo, double hi);
  // P(1/n) = 2^-n for n = 1..terms; the tail mass 2^-terms sits on the
  // accumulation point 0 so the support keeps its infimum.
  static DistributionSpec harmonic_geometric(std::size_t terms);

  const Kind& kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::string name() const;

 private:
  Kind kind_;
  std::size_t dim_;
};

// Either an explicit finite point set or an analytic support that can be
// discretised into exactly m points lying on it.
struct SupportDescription {
  bool analytic = false;
  std::string tag;
  std::vector<OpinionPoint> points;  // finite supports only
  std::function<std::vector<OpinionPoint>(std::size_t)> discretizer;

  std::vector<OpinionPoint> discretize(std::size_t m) const;
};

OpinionPoint distribution_mean(const DistributionSpec& d);

SupportDescription support_of(const DistributionSpec& d);

// sup over the support of rho(mean, x); +infinity for unbounded supports.
double distribution_radius(const DistributionSpec& d, const MetricSpec& m);

std::vector<OpinionPoint> sample_initial(const DistributionSpec& d, std::size_t n,
                                         std::uint64_t rng_seed);

// Draws one opinion into `out` (size d.dim()); shared by the simulator so the
// initial configuration comes from the run's own stream.
class OpinionSampler {
 public:
  explicit OpinionSampler(const DistributionSpec& d);
  void draw(Rng& rng, std::span<double> out);

 private:
  const DistributionSpec& dist_;
  std::vector<double> cumulative_;
};

}  // namespace deffuant
