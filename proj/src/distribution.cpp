#include "deffuant/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "deffuant/error.hpp"

namespace deffuant {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::size_t kMaxCornerDim = 20;

std::size_t validate_and_dim(const DistributionSpec::Kind& kind) {
  return std::visit(
      overloaded{
          [](const FiniteAtoms& f) -> std::size_t {
            if (f.atoms.empty()) throw ConfigError("finite_atoms needs at least one atom");
            const std::size_t k = f.atoms.front().point.dim();
            double total = 0.0;
            for (const auto& a : f.atoms) {
              if (a.point.dim() != k) throw ConfigError("finite_atoms: mixed dimensions");
              if (!(a.probability >= 0.0)) throw ConfigError("finite_atoms: negative probability");
              total += a.probability;
            }
            if (std::abs(total - 1.0) > 1e-12)
              throw ConfigError("finite_atoms: probabilities must sum to 1 within 1e-12");
            return k;
          },
          [](const BernoulliProduct& b) -> std::size_t {
            if (b.k == 0) throw ConfigError("bernoulli_product needs k >= 1");
            if (b.k > kMaxCornerDim) throw ConfigError("bernoulli_product: k too large");
            if (!(b.p > 0.0 && b.p < 1.0)) throw ConfigError("bernoulli_product needs p in (0,1)");
            return b.k;
          },
          [](const UniformSphere& s) -> std::size_t {
            if (s.k == 0) throw ConfigError("uniform_sphere needs k >= 1");
            return s.k;
          },
          [](const UniformBox& b) -> std::size_t {
            if (b.lo.empty() || b.lo.size() != b.hi.size())
              throw ConfigError("uniform_box: lo/hi must be non-empty and of equal length");
            for (std::size_t i = 0; i < b.lo.size(); ++i) {
              if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i]) || !(b.lo[i] < b.hi[i]))
                throw ConfigError("uniform_box: need finite lo < hi per coordinate");
            }
            return b.lo.size();
          },
          [](const Mixed1d& m) -> std::size_t {
            if (!(m.atom_mass >= 0.0 && m.atom_mass <= 1.0))
              throw ConfigError("mixed_1d: atom_mass must lie in [0,1]");
            if (!std::isfinite(m.atom_at) || !std::isfinite(m.lo) || !std::isfinite(m.hi) ||
                !(m.lo < m.hi))
              throw ConfigError("mixed_1d: need finite atom and lo < hi");
            return 1;
          },
      },
      kind);
}

std::vector<OpinionPoint> hypercube_corners(std::size_t k) {
  std::vector<OpinionPoint> corners;
  corners.reserve(std::size_t{1} << k);
  std::vector<double> c(k);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    for (std::size_t i = 0; i < k; ++i) c[i] = (mask >> i) & 1U ? 1.0 : 0.0;
    corners.emplace_back(c);
  }
  return corners;
}

std::vector<OpinionPoint> box_corners(const UniformBox& b) {
  const std::size_t k = b.lo.size();
  if (k > kMaxCornerDim) throw UnsupportedError("uniform_box: too many dimensions for corners");
  std::vector<OpinionPoint> corners;
  std::vector<double> c(k);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    for (std::size_t i = 0; i < k; ++i) c[i] = (mask >> i) & 1U ? b.hi[i] : b.lo[i];
    corners.emplace_back(c);
  }
  return corners;
}

// Radical inverse in base `base`; the Halton component for box discretisation.
double radical_inverse(std::size_t index, std::size_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

std::vector<OpinionPoint> sphere_points(std::size_t k, std::size_t m) {
  std::vector<OpinionPoint> pts;
  pts.reserve(m);
  if (k == 1) {
    for (std::size_t j = 0; j < m; ++j) pts.push_back(OpinionPoint{j % 2 == 0 ? -1.0 : 1.0});
    return pts;
  }
  if (k == 2) {
    for (std::size_t j = 0; j < m; ++j) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
      pts.push_back(OpinionPoint{std::cos(a), std::sin(a)});
    }
    return pts;
  }
  if (k == 3) {
    // Fibonacci lattice.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t j = 0; j < m; ++j) {
      const double z = m == 1 ? 0.0 : 1.0 - 2.0 * static_cast<double>(j) / static_cast<double>(m - 1);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * static_cast<double>(j);
      pts.push_back(OpinionPoint{r * std::cos(a), r * std::sin(a), z});
    }
    return pts;
  }
  Rng rng(0x5eedULL + k);
  std::normal_distribution<double> gauss;
  std::vector<double> v(k);
  for (std::size_t j = 0; j < m; ++j) {
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (auto& c : v) {
        c = gauss(rng);
        n2 += c * c;
      }
    } while (n2 == 0.0);
    const double n = std::sqrt(n2);
    for (auto& c : v) c /= n;
    pts.emplace_back(v);
  }
  return pts;
}

double max_distance_from(const MetricSpec& m, const OpinionPoint& center,
                         const std::vector<OpinionPoint>& pts) {
  double r = 0.0;
  for (const auto& p : pts) r = std::max(r, metric_distance(m, center.coords(), p.coords()));
  return r;
}

}  // namespace

DistributionSpec::DistributionSpec(Kind kind) : kind_(std::move(kind)), dim_(validate_and_dim(kind_)) {}

DistributionSpec DistributionSpec::point_mass(OpinionPoint x) {
  return DistributionSpec(FiniteAtoms{{Atom{std::move(x), 1.0}}});
}

DistributionSpec DistributionSpec::uniform_atoms(std::vector<OpinionPoint> points) {
  if (points.empty()) throw ConfigError("uniform_atoms needs at least one point");
  const double w = 1.0 / static_cast<double>(points.size());
  FiniteAtoms f;
  for (auto& p : points) f.atoms.push_back(Atom{std::move(p), w});
  return DistributionSpec(std::move(f));
}

DistributionSpec DistributionSpec::atoms(std::vector<Atom> atoms) {
  return DistributionSpec(FiniteAtoms{std::move(atoms)});
}

DistributionSpec DistributionSpec::bernoulli_product(std::size_t k, double p) {
  return DistributionSpec(BernoulliProduct{k, p});
}

DistributionSpec DistributionSpec::uniform_sphere(std::size_t k) {
  return DistributionSpec(UniformSphere{k});
}

DistributionSpec DistributionSpec::uniform_box(std::vector<double> lo, std::vector<double> hi) {
  return DistributionSpec(UniformBox{std::move(lo), std::move(hi)});
}

DistributionSpec DistributionSpec::mixed_1d(double atom_at, double atom_mass, double lo, double hi) {
  return DistributionSpec(Mixed1d{atom_at, atom_mass, lo, hi});
}

DistributionSpec DistributionSpec::harmonic_geometric(std::size_t terms) {
  if (terms == 0 || terms > 1000) throw ConfigError("harmonic_geometric: terms must be in [1, 1000]");
  FiniteAtoms f;
  const double tail = std::ldexp(1.0, -static_cast<int>(terms));
  for (std::size_t n = 1; n <= terms; ++n) {
    f.atoms.push_back(Atom{OpinionPoint{1.0 / static_cast<double>(n)},
                           std::ldexp(1.0, -static_cast<int>(n))});
  }
  f.atoms.push_back(Atom{OpinionPoint{0.0}, tail});
  f.relocated_tail_mass = tail;
  return DistributionSpec(std::move(f));
}

std::string DistributionSpec::name() const {
  return std::visit(overloaded{
                        [](const FiniteAtoms&) { return std::string("finite_atoms"); },
                        [](const BernoulliProduct&) { return std::string("bernoulli_product"); },
                        [](const UniformSphere&) { return std::string("uniform_sphere"); },
                        [](const UniformBox&) { return std::string("uniform_box"); },
                        [](const Mixed1d&) { return std::string("mixed_1d"); },
                    },
                    kind_);
}

std::vector<OpinionPoint> SupportDescription::discretize(std::size_t m) const {
  if (!analytic) return points;
  if (m == 0) throw ConfigError("discretization needs m >= 1");
  return discretizer(m);
}

OpinionPoint distribution_mean(const DistributionSpec& d) {
  const std::size_t k = d.dim();
  return std::visit(
      overloaded{
          [k](const FiniteAtoms& f) {
            std::vector<double> mean(k, 0.0);
            for (const auto& a : f.atoms) {
              for (std::size_t i = 0; i < k; ++i) mean[i] += a.probability * a.point[i];
            }
            return OpinionPoint(std::move(mean));
          },
          [k](const BernoulliProduct& b) { return OpinionPoint(std::vector<double>(k, b.p)); },
          [k](const UniformSphere&) { return OpinionPoint(std::vector<double>(k, 0.0)); },
          [k](const UniformBox& b) {
            std::vector<double> mean(k);
            for (std::size_t i = 0; i < k; ++i) mean[i] = 0.5 * (b.lo[i] + b.hi[i]);
            return OpinionPoint(std::move(mean));
          },
          [](const Mixed1d& m) {
            return OpinionPoint{m.atom_mass * m.atom_at + (1.0 - m.atom_mass) * 0.5 * (m.lo + m.hi)};
          },
      },
      d.kind());
}

SupportDescription support_of(const DistributionSpec& d) {
  return std::visit(
      overloaded{
          [](const FiniteAtoms& f) {
            SupportDescription s;
            s.tag = "finite_atoms";
            for (const auto& a : f.atoms) {
              if (a.probability > 0.0 &&
                  std::find(s.points.begin(), s.points.end(), a.point) == s.points.end())
                s.points.push_back(a.point);
            }
            return s;
          },
          [](const BernoulliProduct& b) {
            SupportDescription s;
            s.tag = "hypercube";
            s.points = hypercube_corners(b.k);
            return s;
          },
          [](const UniformSphere& u) {
            SupportDescription s;
            if (u.k == 1) {
              s.tag = "sphere_1";
              s.points = {OpinionPoint{-1.0}, OpinionPoint{1.0}};
              return s;
            }
            s.analytic = true;
            s.tag = "sphere_" + std::to_string(u.k);
            s.discretizer = [k = u.k](std::size_t m) { return sphere_points(k, m); };
            return s;
          },
          [](const UniformBox& b) {
            SupportDescription s;
            s.analytic = true;
            s.tag = "box";
            s.discretizer = [b](std::size_t m) {
              // Corners first, then a Halton fill; exactly m points in the box.
              static constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29,
                                                        31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
              const std::size_t k = b.lo.size();
              std::vector<OpinionPoint> pts;
              if (k == 1) {
                for (std::size_t j = 0; j < m; ++j) {
                  const double t = m == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(m - 1);
                  pts.push_back(OpinionPoint{b.lo[0] + t * (b.hi[0] - b.lo[0])});
                }
                return pts;
              }
              pts = box_corners(b);
              if (pts.size() > m) pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(m), pts.end());
              std::vector<double> c(k);
              for (std::size_t idx = 1; pts.size() < m; ++idx) {
                for (std::size_t i = 0; i < k; ++i)
                  c[i] = b.lo[i] + radical_inverse(idx, kPrimes[i % 20]) * (b.hi[i] - b.lo[i]);
                pts.emplace_back(c);
              }
              return pts;
            };
            return s;
          },
          [](const Mixed1d& mx) {
            SupportDescription s;
            s.analytic = true;
            s.tag = "interval_plus_atom";
            s.discretizer = [mx](std::size_t m) {
              std::vector<OpinionPoint> pts;
              pts.push_back(OpinionPoint{mx.atom_at});
              const std::size_t rest = m - 1;
              for (std::size_t j = 0; j < rest; ++j) {
                const double t = rest == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(rest - 1);
                pts.push_back(OpinionPoint{mx.lo + t * (mx.hi - mx.lo)});
              }
              return pts;
            };
            return s;
          },
      },
      d.kind());
}

double distribution_radius(const DistributionSpec& d, const MetricSpec& m) {
  m.validate_dimension(d.dim());
  const OpinionPoint mean = distribution_mean(d);
  return std::visit(
      overloaded{
          [&](const FiniteAtoms&) { return max_distance_from(m, mean, support_of(d).points); },
          [&](const BernoulliProduct& b) {
            if (m.kind == MetricKind::euclidean)
              return std::sqrt(static_cast<double>(b.k)) * std::max(b.p, 1.0 - b.p);
            return max_distance_from(m, mean, hypercube_corners(b.k));
          },
          [&](const UniformSphere& u) {
            const double k = static_cast<double>(u.k);
            if (u.k == 1) return max_distance_from(m, mean, support_of(d).points);
            switch (m.kind) {
              case MetricKind::euclidean:
                return 1.0;
              case MetricKind::lp:
                if (m.is_max_norm()) return 1.0;
                return m.p <= 2.0 ? std::pow(k, 1.0 / m.p - 0.5) : 1.0;
              case MetricKind::lp_pow:
                return m.p <= 2.0 ? std::pow(k, 1.0 - 0.5 * m.p) : 1.0;
              case MetricKind::bounded_euclid:
                return std::min(1.0, m.cap);
              case MetricKind::discrete:
                return 1.0;
              default:
                return max_distance_from(m, mean, sphere_points(u.k, 4096));
            }
          },
          [&](const UniformBox& b) {
            // rho(mean, .) is quasi-convex for every weakly convex metric, so
            // its supremum over the box is attained at a corner.
            return max_distance_from(m, mean, box_corners(b));
          },
          [&](const Mixed1d& mx) {
            return max_distance_from(
                m, mean, {OpinionPoint{mx.lo}, OpinionPoint{mx.hi}, OpinionPoint{mx.atom_at}});
          },
      },
      d.kind());
}

OpinionSampler::OpinionSampler(const DistributionSpec& d) : dist_(d) {
  if (const auto* f = std::get_if<FiniteAtoms>(&d.kind())) {
    double acc = 0.0;
    for (const auto& a : f->atoms) {
      acc += a.probability;
      cumulative_.push_back(acc);
    }
  }
}

void OpinionSampler::draw(Rng& rng, std::span<double> out) {
  std::visit(overloaded{
                 [&](const FiniteAtoms& f) {
                   const double u = uniform01(rng) * cumulative_.back();
                   auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
                   std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
                   if (idx >= f.atoms.size()) idx = f.atoms.size() - 1;
                   // Skip zero-mass atoms that share a cumulative value.
                   while (f.atoms[idx].probability == 0.0 && idx + 1 < f.atoms.size()) ++idx;
                   const auto c = f.atoms[idx].point.coords();
                   std::copy(c.begin(), c.end(), out.begin());
                 },
                 [&](const BernoulliProduct& b) {
                   for (auto& c : out) c = uniform01(rng) < b.p ? 1.0 : 0.0;
                 },
                 [&](const UniformSphere&) {
                   std::normal_distribution<double> gauss;
                   double n2 = 0.0;
                   do {
                     n2 = 0.0;
                     for (auto& c : out) {
                       c = gauss(rng);
                       n2 += c * c;
                     }
                   } while (n2 < 1e-24);
                   const double n = std::sqrt(n2);
                   for (auto& c : out) c /= n;
                 },
                 [&](const UniformBox& b) {
                   for (std::size_t i = 0; i < out.size(); ++i) out[i] = uniform_in(rng, b.lo[i], b.hi[i]);
                 },
                 [&](const Mixed1d& m) {
                   out[0] = uniform01(rng) < m.atom_mass ? m.atom_at : uniform_in(rng, m.lo, m.hi);
                 },
             },
             dist_.kind());
}

std::vector<OpinionPoint> sample_initial(const DistributionSpec& d, std::size_t n,
                                         std::uint64_t rng_seed) {
  if (n == 0) throw ConfigError("sample_initial needs n >= 1");
  Rng rng(rng_seed);
  OpinionSampler sampler(d);
  std::vector<double> buf(d.dim());
  std::vector<OpinionPoint> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    sampler.draw(rng, buf);
    out.emplace_back(buf);
  }
  return out;
}

}  // namespace deffuant
