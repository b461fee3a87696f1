#include <doctest.h>

#include <cmath>
#include <numbers>

#include "deffuant/distribution.hpp"
#include "deffuant/error.hpp"
#include "deffuant/opinion.hpp"
#include "deffuant/random.hpp"

using namespace deffuant;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t k, double lo, double hi) {
  std::vector<double> v(k);
  for (auto& x : v) x = uniform_in(rng, lo, hi);
  return v;
}

std::vector<MetricSpec> shipped_metrics() {
  return {MetricSpec::euclidean(),      MetricSpec::lp(1.0),   MetricSpec::lp(3.0),
          MetricSpec::lp(INFINITY),     MetricSpec::lp_pow(0.5), MetricSpec::lp_pow(1.0),
          MetricSpec::discrete(),       MetricSpec::bounded_euclid(1.0),
          MetricSpec::phi_metric({PhiComponent{PhiComponent::Shape::power, 2.0, 1.0},
                                  PhiComponent{PhiComponent::Shape::power, 0.5, 1.0}})};
}

}  // namespace

TEST_CASE("opinion point rejects empty and non-finite coordinates") {
  CHECK_THROWS_AS(OpinionPoint(std::vector<double>{}), ConfigError);
  CHECK_THROWS_AS(OpinionPoint({1.0, NAN}), ConfigError);
  CHECK_THROWS_AS(OpinionPoint({INFINITY}), ConfigError);
  const OpinionPoint p{1.0, 2.0};
  CHECK(p.dim() == 2);
  CHECK(p[1] == 2.0);
}

TEST_CASE("metric examples") {
  CHECK(metric_distance(MetricSpec::euclidean(), OpinionPoint{0.0, 0.0}, OpinionPoint{1.0, 0.0}) == 1.0);
  CHECK(metric_distance(MetricSpec::cubic(), OpinionPoint{1.0}, OpinionPoint{2.0}) == 7.0);
  CHECK(metric_distance(MetricSpec::lp_pow(2.0), OpinionPoint{0.0}, OpinionPoint{0.5}) == doctest::Approx(0.25));
  CHECK(metric_distance(MetricSpec::discrete(), OpinionPoint{0.3}, OpinionPoint{0.3}) == 0.0);
  CHECK(metric_distance(MetricSpec::discrete(), OpinionPoint{0.3}, OpinionPoint{0.300001}) == 1.0);
  CHECK(metric_distance(MetricSpec::lp(INFINITY), OpinionPoint{0.0, 0.0}, OpinionPoint{-3.0, 2.0}) == 3.0);
  CHECK(metric_distance(MetricSpec::bounded_euclid(1.0), OpinionPoint{0.0}, OpinionPoint{5.0}) == 1.0);
}

TEST_CASE("lp_pow matches the coordinate sum formula") {
  Rng rng(7);
  for (double p : {0.3, 0.5, 1.0, 2.0, 3.5}) {
    for (int t = 0; t < 200; ++t) {
      const auto x = random_vec(rng, 4, -2, 2), y = random_vec(rng, 4, -2, 2);
      double expect = 0.0;
      for (int i = 0; i < 4; ++i) expect += std::pow(std::abs(x[i] - y[i]), p);
      CHECK(metric_distance(MetricSpec::lp_pow(p), x, y) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("metric dimension and parameter errors") {
  CHECK_THROWS_AS(metric_distance(MetricSpec::cubic(), OpinionPoint{1.0, 2.0}, OpinionPoint{0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(metric_distance(MetricSpec::euclidean(), OpinionPoint{1.0}, OpinionPoint{0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(MetricSpec::lp(0.5).validate(), ConfigError);
  CHECK_THROWS_AS(MetricSpec::lp_pow(0.0).validate(), ConfigError);
  CHECK_THROWS_AS(MetricSpec::bounded_euclid(-1.0).validate(), ConfigError);
  CHECK(metric_kind_from_string("lp_pow") == MetricKind::lp_pow);
  CHECK_THROWS_AS(metric_kind_from_string("manhattan"), ConfigError);
}

TEST_CASE("property: metric axioms on random triples") {
  Rng rng(11);
  for (const auto& m : shipped_metrics()) {
    CAPTURE(to_string(m.kind));
    CAPTURE(m.p);
    for (int t = 0; t < 20000; ++t) {
      const auto x = random_vec(rng, 2, -3, 3), y = random_vec(rng, 2, -3, 3), z = random_vec(rng, 2, -3, 3);
      const double dxy = metric_distance(m, x, y);
      REQUIRE(dxy >= 0.0);
      REQUIRE(dxy == metric_distance(m, y, x));
      REQUIRE(metric_distance(m, x, x) <= 1e-15);
      REQUIRE(dxy > 0.0);
      const double slack = 1e-12 * (1.0 + dxy);
      REQUIRE(dxy <= metric_distance(m, x, z) + metric_distance(m, z, y) + slack);
    }
  }
}

TEST_CASE("strictly convex phi shapes break the triangle inequality") {
  // Convexity with phi(0) = 0 makes phi superadditive, so only linear shapes
  // give a metric. The distance is still usable as a dissimilarity.
  const MetricSpec m = MetricSpec::phi_metric({PhiComponent{PhiComponent::Shape::power, 1.0, 1.5}});
  const double direct = metric_distance(m, OpinionPoint{0.0}, OpinionPoint{2.0});
  const double via = 2.0 * metric_distance(m, OpinionPoint{0.0}, OpinionPoint{1.0});
  CHECK(direct > via);
  const MetricSpec h = MetricSpec::phi_metric({PhiComponent{PhiComponent::Shape::huber, 1.0, 0.3}});
  CHECK(metric_distance(h, OpinionPoint{0.0}, OpinionPoint{0.2}) > 2.0 * metric_distance(h, OpinionPoint{0.0}, OpinionPoint{0.1}));
}

TEST_CASE("property: cubic metric axioms on the line") {
  Rng rng(12);
  const MetricSpec m = MetricSpec::cubic();
  for (int t = 0; t < 20000; ++t) {
    const auto x = random_vec(rng, 1, -3, 3), y = random_vec(rng, 1, -3, 3), z = random_vec(rng, 1, -3, 3);
    const double dxy = metric_distance(m, x, y);
    REQUIRE(dxy == metric_distance(m, y, x));
    REQUIRE(dxy <= metric_distance(m, x, z) + metric_distance(m, z, y) + 1e-12 * (1.0 + dxy));
  }
}

TEST_CASE("property: lp norms are bounded by sqrt(k) times Euclidean") {
  Rng rng(13);
  for (std::size_t k : {1, 2, 3, 5, 8}) {
    for (double p : {1.0, 1.5, 2.0, 4.0, static_cast<double>(INFINITY)}) {
      for (int t = 0; t < 2000; ++t) {
        const auto x = random_vec(rng, k, -5, 5), y = random_vec(rng, k, -5, 5);
        const double bound = std::sqrt(static_cast<double>(k)) * euclidean_distance(x, y);
        REQUIRE(metric_distance(MetricSpec::lp(p), x, y) <= bound * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("weak convexity checker") {
  const Box sq = Box::cube(2, -1.0, 1.0);
  CHECK(check_weak_convexity(MetricSpec::lp(1.0), sq, 100000, 3).passed);
  const auto bad = check_weak_convexity(MetricSpec::lp_pow(0.5), sq, 100000, 3);
  REQUIRE_FALSE(bad.passed);
  REQUIRE(bad.counterexample.has_value());
  // The counterexample is conclusive: re-evaluate it independently.
  const auto& ce = *bad.counterexample;
  std::vector<double> mix(2);
  for (int i = 0; i < 2; ++i) mix[i] = ce.alpha * ce.y[i] + (1.0 - ce.alpha) * ce.z[i];
  const MetricSpec m = MetricSpec::lp_pow(0.5);
  CHECK(metric_distance(m, ce.x.coords(), mix) >
        std::max(metric_distance(m, ce.x, ce.y), metric_distance(m, ce.x, ce.z)) + 1e-9);
  CHECK(check_weak_convexity(MetricSpec::discrete(), sq, 20000, 3).passed);
  CHECK_THROWS_AS(check_weak_convexity(MetricSpec::euclidean(), Box{{0.0}, {0.0}}, 10, 1), ConfigError);
}

TEST_CASE("property: weakly convex metrics have convex sampled balls") {
  Rng rng(17);
  for (const auto& m : {MetricSpec::euclidean(), MetricSpec::lp(1.0), MetricSpec::lp(INFINITY), MetricSpec::lp(3.0)}) {
    REQUIRE(check_weak_convexity(m, Box::cube(2, -1, 1), 20000, 5).passed);
    for (int t = 0; t < 20000; ++t) {
      const auto x = random_vec(rng, 2, -1, 1), y = random_vec(rng, 2, -1, 1), z = random_vec(rng, 2, -1, 1);
      const double r = std::max(metric_distance(m, x, y), metric_distance(m, x, z));
      const std::vector<double> mid{(y[0] + z[0]) / 2, (y[1] + z[1]) / 2};
      REQUIRE(metric_distance(m, x, mid) <= r + 1e-12);
    }
  }
}

TEST_CASE("local domination checker") {
  const auto inf = check_local_domination(MetricSpec::lp(INFINITY), 1.0, Box::cube(3, -1, 1), 20000, 4);
  CHECK(inf.dominated);
  CHECK(inf.c_hat <= 1.0 + 1e-9);
  const auto disc = check_local_domination(MetricSpec::discrete(), 1.0, Box::cube(1, -1, 1), 20000, 4);
  CHECK_FALSE(disc.dominated);
  CHECK(disc.witness_sequence.size() == disc.rung_max_ratio.size());
  const auto cubic = check_local_domination(MetricSpec::cubic(), 1.0, Box::cube(1, -10, 10), 20000, 4);
  CHECK(cubic.dominated);
  CHECK(std::isfinite(cubic.c_hat));
  CHECK(cubic.c_hat <= 3.0 * 11.0 * 11.0);
}

TEST_CASE("coordinate sensitivity checker") {
  const std::vector<double> grid{1.0, 10.0, 100.0};
  CHECK(check_coordinate_sensitivity(MetricSpec::lp(2.0), 2, 0, grid).sensitive);
  CHECK(check_coordinate_sensitivity(MetricSpec::lp(1.0), 2, 1, grid).sensitive);
  const auto bounded = check_coordinate_sensitivity(MetricSpec::bounded_euclid(1.0), 2, 0, grid);
  CHECK_FALSE(bounded.sensitive);
  CHECK(bounded.witness.has_value());
  CHECK(bounded.lower_envelope.back() == doctest::Approx(1.0));
  CHECK_FALSE(check_coordinate_sensitivity(MetricSpec::discrete(), 1, 0, grid).sensitive);
  CHECK_THROWS_AS(check_coordinate_sensitivity(MetricSpec::lp(2.0), 2, 2, grid), ConfigError);
}

TEST_CASE("distribution means") {
  const auto ln2 = distribution_mean(DistributionSpec::harmonic_geometric(40));
  CHECK(std::abs(ln2[0] - std::numbers::ln2) < 1e-10);
  const auto sph = distribution_mean(DistributionSpec::uniform_sphere(3));
  CHECK(sph == OpinionPoint{0.0, 0.0, 0.0});
  const double ip = 1.0 / std::numbers::pi;
  const auto mu = distribution_mean(
      DistributionSpec::uniform_atoms({OpinionPoint{0.0, 0.0}, OpinionPoint{1.0, 0.0}, OpinionPoint{ip, 1.0}}));
  CHECK(mu[0] == doctest::Approx((1.0 + ip) / 3.0).epsilon(1e-15));
  CHECK(mu[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto bern = distribution_mean(DistributionSpec::bernoulli_product(3, 0.3));
  for (int i = 0; i < 3; ++i) CHECK(bern[i] == doctest::Approx(0.3));
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(DistributionSpec::atoms({Atom{OpinionPoint{0.0}, 0.5}, Atom{OpinionPoint{1.0}, 0.4}}), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::bernoulli_product(2, 1.0), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::uniform_box({1.0}, {0.0}), ConfigError);
  CHECK_THROWS_AS(DistributionSpec::mixed_1d(0.0, 1.5, -1.0, 1.0), ConfigError);
  const auto d = DistributionSpec::harmonic_geometric(40);
  const auto& fa = std::get<FiniteAtoms>(d.kind());
  CHECK(fa.relocated_tail_mass == std::ldexp(1.0, -40));
}

TEST_CASE("distribution radius") {
  const MetricSpec e = MetricSpec::euclidean();
  CHECK(distribution_radius(DistributionSpec::bernoulli_product(4, 0.7), e) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(distribution_radius(DistributionSpec::uniform_sphere(2), e) == 1.0);
  const auto two = DistributionSpec::uniform_atoms({OpinionPoint{1.0}, OpinionPoint{2.0}});
  CHECK(distribution_radius(two, MetricSpec::cubic()) == doctest::Approx(37.0 / 8.0).epsilon(1e-15));
}

TEST_CASE("property: radius of finite atoms equals brute-force max distance to the mean") {
  Rng rng(19);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 1 + t % 4;
    const std::size_t count = 1 + t % 7;
    std::vector<Atom> atoms;
    std::vector<double> w(count);
    double total = 0.0;
    for (auto& x : w) total += (x = uniform_in(rng, 0.1, 1.0));
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double p = i + 1 == count ? 1.0 - acc : w[i] / total;
      acc += p;
      atoms.push_back(Atom{OpinionPoint(random_vec(rng, k, -2, 2)), p});
    }
    const auto d = DistributionSpec::atoms(atoms);
    std::vector<double> mean(k, 0.0);
    for (const auto& a : atoms)
      for (std::size_t i = 0; i < k; ++i) mean[i] += a.probability * a.point[i];
    double best = 0.0;
    for (const auto& a : atoms) best = std::max(best, euclidean_distance(mean, a.point.coords()));
    CHECK(distribution_radius(d, MetricSpec::euclidean()) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("sampling") {
  const auto five = sample_initial(DistributionSpec::point_mass(OpinionPoint{0.0}), 5, 1);
  REQUIRE(five.size() == 5);
  for (const auto& p : five) CHECK(p == OpinionPoint{0.0});

  const auto box = sample_initial(DistributionSpec::uniform_box({0.0}, {1.0}), 1000000, 2);
  double mean = 0.0;
  for (const auto& p : box) mean += p[0];
  mean /= 1e6;
  CHECK(mean >= 0.498);
  CHECK(mean <= 0.502);

  for (const auto& p : sample_initial(DistributionSpec::uniform_sphere(2), 10000, 3)) {
    const double r = std::hypot(p[0], p[1]);
    REQUIRE(std::abs(r - 1.0) <= 1e-12);
  }
  const auto a = sample_initial(DistributionSpec::uniform_sphere(3), 50, 9);
  const auto b = sample_initial(DistributionSpec::uniform_sphere(3), 50, 9);
  CHECK(a == b);
}

TEST_CASE("empirical means of sampled catalog laws") {
  const std::vector<DistributionSpec> laws{
      DistributionSpec::bernoulli_product(3, 0.3), DistributionSpec::uniform_sphere(2),
      DistributionSpec::mixed_1d(0.4, 0.5, -1.0, 1.0), DistributionSpec::harmonic_geometric(40),
      DistributionSpec::uniform_box({-1.0, 2.0}, {1.0, 5.0})};
  for (const auto& d : laws) {
    CAPTURE(d.name());
    const auto xs = sample_initial(d, 1000000, 21);
    const auto mean = distribution_mean(d);
    for (std::size_t i = 0; i < d.dim(); ++i) {
      double m = 0.0, m2 = 0.0;
      for (const auto& x : xs) m += x[i], m2 += x[i] * x[i];
      m /= 1e6;
      const double sigma = std::sqrt(std::max(m2 / 1e6 - m * m, 0.0));
      CHECK(std::abs(m - mean[i]) <= 4.0 * sigma / 1e3 + 1e-12);
    }
  }
}

TEST_CASE("support discretisation stays on the support and has exactly m points") {
  for (const auto& d : {DistributionSpec::uniform_sphere(2), DistributionSpec::uniform_sphere(3),
                        DistributionSpec::uniform_sphere(5)}) {
    const auto s = support_of(d);
    REQUIRE(s.analytic);
    const auto pts = s.discretize(500);
    REQUIRE(pts.size() == 500);
    for (const auto& p : pts) {
      double r2 = 0.0;
      for (double x : p.coords()) r2 += x * x;
      REQUIRE(std::abs(std::sqrt(r2) - 1.0) <= 1e-12);
    }
  }
  const auto box = support_of(DistributionSpec::uniform_box({0.0, -1.0}, {1.0, 1.0})).discretize(37);
  REQUIRE(box.size() == 37);
  for (const auto& p : box) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] <= 1.0);
    CHECK(p[1] >= -1.0);
    CHECK(p[1] <= 1.0);
  }
  const auto mixed = support_of(DistributionSpec::mixed_1d(3.0, 0.5, -1.0, 1.0)).discretize(11);
  REQUIRE(mixed.size() == 11);
  const auto sphere1 = support_of(DistributionSpec::uniform_sphere(1));
  CHECK_FALSE(sphere1.analytic);
  CHECK(sphere1.points.size() == 2);
}
