#pragma once

// Data-parallel inner loops. Each OpenMP kernel has a serial twin with the
// same contract; tests check they agree and bench/ compares their speed.
// Results never depend on thread count or scheduling.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace deffuant::kernels {

using IndexPair = std::pair<std::size_t, std::size_t>;

// min over i < j < n of dist(i, j); +infinity when n < 2.
template <class Dist>
double min_pair_serial(std::size_t n, const Dist& dist) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) best = std::min(best, dist(i, j));
  }
  return best;
}

template <class Dist>
double min_pair_parallel(std::size_t n, const Dist& dist) {
  double best = std::numeric_limits<double>::infinity();
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16) reduction(min : best)
  for (long long i = 0; i < count; ++i) {
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
      best = std::min(best, dist(static_cast<std::size_t>(i), j));
    }
  }
  return best;
}

// All pairs i < j with dist(i, j) <= threshold, in lexicographic order.
template <class Dist>
std::vector<IndexPair> pairs_within_serial(std::size_t n, const Dist& dist, double threshold) {
  std::vector<IndexPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist(i, j) <= threshold) out.emplace_back(i, j);
    }
  }
  return out;
}

template <class Dist>
std::vector<IndexPair> pairs_within_parallel(std::size_t n, const Dist& dist, double threshold) {
  std::vector<std::vector<IndexPair>> per_row(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < count; ++i) {
    auto& row = per_row[static_cast<std::size_t>(i)];
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
      if (dist(static_cast<std::size_t>(i), j) <= threshold) row.emplace_back(i, j);
    }
  }
  std::vector<IndexPair> out;
  for (auto& row : per_row) out.insert(out.end(), row.begin(), row.end());
  return out;
}

// max over i of min over j != i of dist(i, j): the coarsest nearest-neighbour
// spacing of a point set. Zero when n < 2.
template <class Dist>
double max_nearest_serial(std::size_t n, const Dist& dist) {
  if (n < 2) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) nearest = std::min(nearest, dist(i, j));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

template <class Dist>
double max_nearest_parallel(std::size_t n, const Dist& dist) {
  if (n < 2) return 0.0;
  double worst = 0.0;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (long long i = 0; i < count; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != static_cast<std::size_t>(i)) nearest = std::min(nearest, dist(static_cast<std::size_t>(i), j));
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

// Evaluates f(i) for i < n into a vector; the parallel version writes disjoint
// slots so the result is order independent.
template <class T, class F>
std::vector<T> map_serial(std::size_t n, const F& f) {
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  return out;
}

template <class T, class F>
std::vector<T> map_parallel(std::size_t n, const F& f) {
  std::vector<T> out(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
  return out;
}

}  // namespace deffuant::kernels
