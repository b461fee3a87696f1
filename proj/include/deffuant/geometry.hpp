#pragma once

// Reachable-set geometry for finite supports: the components of D_theta as
// convex clusters, their merge timeline over theta, the largest gap h, the
// predicted critical bound max{R, h}, and epsilon-flatness checks.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deffuant/distribution.hpp"
#include "deffuant/opinion.hpp"

namespace deffuant {

// The convex hull of a non-empty generator list.
struct ConvexCluster {
  std::vector<OpinionPoint> generators;

  std::size_t dim() const { return generators.front().dim(); }
};

inline constexpr double kHullTolerance = 1e-9;

// min rho(x, y) over x in hull(A), y in hull(B). Exact for singletons and for
// k = 1; Euclidean-type metrics use a GJK-style support descent, other convex
// metrics a multistart coefficient descent. Throws UnsupportedError for
// metrics without convex structure (discrete, lp_pow with p < 1).
double hull_distance(const ConvexCluster& a, const ConvexCluster& b, const MetricSpec& m,
                     double tol = kHullTolerance);

bool hull_contains(const ConvexCluster& c, const OpinionPoint& x, double tol = kHullTolerance);

bool supports_hull_geometry(const MetricSpec& m, std::size_t k);

struct ComponentDecomposition {
  double theta = 0.0;
  std::vector<ConvexCluster> clusters;
  MetricSpec metric;
  // Some inter-cluster distance equals theta (within 1e-9): theta sits on a
  // jump of theta -> D_theta, where attainability can depend on mu.
  bool at_jump_threshold = false;
};

// Fixpoint of: link clusters at hull distance <= theta, replace linked groups
// by the hull of their union.
ComponentDecomposition components_at(const std::vector<OpinionPoint>& support, double theta,
                                     const MetricSpec& m);

struct MergeTimeline {
  std::vector<double> thresholds;             // ascending
  std::vector<std::size_t> component_counts;  // thresholds.size() + 1 entries
};

MergeTimeline merge_timeline(const std::vector<OpinionPoint>& support, const MetricSpec& m);

double largest_gap(const std::vector<OpinionPoint>& support, const MetricSpec& m);

struct ThetaPrediction {
  bool bounded = true;
  double radius = 0.0;
  double gap = 0.0;
  double theta_c = 0.0;
  bool discretized = false;
  std::size_t support_points = 0;
  double discretization_spacing = 0.0;  // coarsest nearest-neighbour distance
  std::string note;
};

// max{R, h} for the metric; analytic supports are discretised into m points
// (default 2000).
ThetaPrediction predicted_theta_c(const DistributionSpec& d, const MetricSpec& m,
                                  std::optional<std::size_t> discretization_m = std::nullopt);

enum class FlatSide { left, right, two_sided };

std::string to_string(FlatSide s);

struct FlatnessReport {
  std::size_t vertex = 0;
  double epsilon = 0.0;
  FlatSide side = FlatSide::two_sided;
  std::size_t horizon = 0;
  bool holds_up_to_horizon = false;
};

// Checks that every window average of `config` (flat, vertex-major) anchored
// at v, up to `horizon` sites per side, lies in the closed rho-ball of radius
// epsilon around `mean`. Throws ContractViolation if a window leaves the array.
FlatnessReport epsilon_flat(std::span<const double> config, std::size_t dim, std::size_t v,
                            double epsilon, FlatSide side, std::size_t horizon,
                            const OpinionPoint& mean, const MetricSpec& m);

}  // namespace deffuant
