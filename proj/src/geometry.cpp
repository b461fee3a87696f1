#include "deffuant/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "deffuant/error.hpp"
#include "deffuant/kernels.hpp"
#include "deffuant/random.hpp"

namespace deffuant {

namespace {

constexpr std::size_t kMaxGjkDim = 10;
constexpr int kDescentStarts = 32;

struct Hull {
  std::size_t dim = 1;
  std::vector<double> flat;
  std::uint32_t id = 0;

  std::size_t count() const noexcept { return flat.size() / dim; }
  std::span<const double> point(std::size_t i) const noexcept { return {flat.data() + i * dim, dim}; }
};

Hull to_hull(const ConvexCluster& c) {
  if (c.generators.empty()) throw ContractViolation("convex cluster needs at least one generator");
  Hull h;
  h.dim = c.dim();
  for (const auto& g : c.generators) {
    if (g.dim() != h.dim) throw ConfigError("convex cluster: mixed dimensions");
    h.flat.insert(h.flat.end(), g.coords().begin(), g.coords().end());
  }
  return h;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Solves the dense n x n system in place (row-major); false if singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& rhs, std::size_t n, double scale) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) <= 1e-13 * scale) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(rhs[col], rhs[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * rhs[c];
    rhs[i] = s / a[i * n + i];
  }
  return true;
}

// Minimum-norm point of conv(pts). Every feasible affine minimiser of a
// subset is a point of the hull, and the optimum is the affine minimiser of
// its own support face, so the smallest feasible candidate is the answer.
struct SimplexSolution {
  std::vector<double> x;
  std::vector<double> lambda;
};

SimplexSolution min_norm_in_hull(const std::vector<std::vector<double>>& pts) {
  const std::size_t m = pts.size();
  const std::size_t k = pts.front().size();
  SimplexSolution best;
  double best_norm = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx;
  std::vector<double> g, rhs, x(k);
  for (std::uint32_t mask = 1; mask < (1U << m); ++mask) {
    idx.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1U << i)) idx.push_back(i);
    }
    if (idx.size() > k + 1) continue;
    const std::size_t s = idx.size() - 1;
    std::vector<double> coeff(idx.size(), 0.0);
    const auto& p0 = pts[idx[0]];
    if (s == 0) {
      coeff[0] = 1.0;
      x = p0;
    } else {
      g.assign(s * s, 0.0);
      rhs.assign(s, 0.0);
      double scale = 0.0;
      for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
          double v = 0.0;
          for (std::size_t t = 0; t < k; ++t)
            v += (pts[idx[r + 1]][t] - p0[t]) * (pts[idx[c + 1]][t] - p0[t]);
          g[r * s + c] = v;
        }
        scale = std::max(scale, g[r * s + r]);
        double v = 0.0;
        for (std::size_t t = 0; t < k; ++t) v -= (pts[idx[r + 1]][t] - p0[t]) * p0[t];
        rhs[r] = v;
      }
      if (!solve_dense(g, rhs, s, scale)) continue;
      double rest = 1.0;
      bool feasible = true;
      for (std::size_t r = 0; r < s; ++r) {
        coeff[r + 1] = rhs[r];
        rest -= rhs[r];
        if (rhs[r] < -1e-12) feasible = false;
      }
      coeff[0] = rest;
      if (rest < -1e-12 || !feasible) continue;
      for (std::size_t t = 0; t < k; ++t) {
        double v = 0.0;
        for (std::size_t r = 0; r < idx.size(); ++r) v += coeff[r] * pts[idx[r]][t];
        x[t] = v;
      }
    }
    const double nrm = dot(x, x);
    if (nrm < best_norm) {
      best_norm = nrm;
      best.x = x;
      best.lambda.assign(m, 0.0);
      for (std::size_t r = 0; r < idx.size(); ++r) best.lambda[idx[r]] = std::max(0.0, coeff[r]);
    }
  }
  return best;
}

// GJK on a convex set given by its support map: support(x, out) writes a
// point of the set minimising <x, .>. Returns the closest point found and the
// value of that minimum at it, which certifies a lower bound.
struct GjkResult {
  std::vector<double> x;
  double support_value = 0.0;
};

template <class Support>
GjkResult gjk_core(std::size_t k, std::vector<double> x, Support&& support) {
  if (k > kMaxGjkDim) throw UnsupportedError("hull distance supports dimension <= 10");
  std::vector<double> w(k);
  std::vector<std::vector<double>> simplex{x};
  double xx = dot(x, x);
  const double floor = 1e-30 * std::max(1.0, xx);
  for (int iter = 0; iter < 1000; ++iter) {
    if (xx <= floor) return {std::vector<double>(k, 0.0), 0.0};
    support(x, w);
    const double gap = xx - dot(x, w);
    if (gap <= 1e-13 * xx) break;
    if (std::find(simplex.begin(), simplex.end(), w) != simplex.end()) break;
    simplex.push_back(w);
    SimplexSolution sol = min_norm_in_hull(simplex);
    std::vector<std::vector<double>> kept;
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (sol.lambda[i] > 0.0) kept.push_back(simplex[i]);
    }
    if (kept.empty()) kept.push_back(sol.x);
    simplex = std::move(kept);
    const double nxx = dot(sol.x, sol.x);
    if (!(nxx < xx)) break;
    x = std::move(sol.x);
    xx = nxx;
  }
  support(x, w);
  return {x, dot(x, w)};
}

// Writes the minimiser of <x, .> over conv(a) - conv(b).
void difference_support(const Hull& a, const Hull& b, std::span<const double> x, std::span<double> out) {
  std::size_t ia = 0, ib = 0;
  double best_a = std::numeric_limits<double>::infinity();
  double best_b = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.count(); ++i) {
    const double v = dot(x, a.point(i));
    if (v < best_a) best_a = v, ia = i;
  }
  for (std::size_t i = 0; i < b.count(); ++i) {
    const double v = dot(x, b.point(i));
    if (v > best_b) best_b = v, ib = i;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.point(ia)[i] - b.point(ib)[i];
}

std::vector<double> first_difference(const Hull& a, const Hull& b) {
  std::vector<double> x(a.dim);
  for (std::size_t i = 0; i < a.dim; ++i) x[i] = a.point(0)[i] - b.point(0)[i];
  return x;
}

double gjk_distance(const Hull& a, const Hull& b) {
  const auto r = gjk_core(a.dim, first_difference(a, b),
                          [&](std::span<const double> x, std::span<double> out) { difference_support(a, b, x, out); });
  return std::sqrt(dot(r.x, r.x));
}

// The lp unit ball through its support map and the dual norm.
struct LpBall {
  double p;

  bool one() const noexcept { return p == 1.0; }
  bool inf() const noexcept { return std::isinf(p); }

  double norm(std::span<const double> v) const {
    return metric_distance(MetricSpec::lp(p), v, std::vector<double>(v.size(), 0.0));
  }

  double dual_norm(std::span<const double> v) const {
    double m = 0.0, s = 0.0;
    for (double c : v) m = std::max(m, std::abs(c)), s += std::abs(c);
    if (one()) return m;
    if (inf()) return s;
    if (m == 0.0) return 0.0;
    const double q = p / (p - 1.0);
    double acc = 0.0;
    for (double c : v) acc += std::pow(std::abs(c) / m, q);
    return m * std::pow(acc, 1.0 / q);
  }

  // Maximiser of <d, z> over the unit ball.
  void argmax(std::span<const double> d, std::span<double> z) const {
    std::fill(z.begin(), z.end(), 0.0);
    double m = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (std::abs(d[i]) > m) m = std::abs(d[i]), j = i;
    }
    if (m == 0.0) return;
    if (one()) {
      z[j] = std::copysign(1.0, d[j]);
      return;
    }
    if (inf()) {
      for (std::size_t i = 0; i < d.size(); ++i) z[i] = d[i] == 0.0 ? 0.0 : std::copysign(1.0, d[i]);
      return;
    }
    const double q = p / (p - 1.0);
    double acc = 0.0;
    for (double c : d) acc += std::pow(std::abs(c) / m, q);
    const double scale = std::pow(acc, 1.0 / p);
    for (std::size_t i = 0; i < d.size(); ++i) z[i] = std::copysign(std::pow(std::abs(d[i]) / m, q - 1.0) / scale, d[i]);
  }
};

// lp distance between two hulls: the smallest t for which conv(a) - conv(b)
// meets the ball of radius t. The Euclidean gap g(t) between the two is
// convex and decreasing, and the lower bound read off a GJK direction at t is
// a Newton step on g from the left, so t climbs to the answer without ever
// having to resolve a near-zero gap. Each run also yields an upper bound.
double norm_ball_distance(const Hull& a, const Hull& b, double p) {
  const std::size_t k = a.dim;
  const LpBall ball{p};
  double hi = std::numeric_limits<double>::infinity();
  std::vector<double> diff(k);
  for (std::size_t i = 0; i < a.count(); ++i) {
    for (std::size_t j = 0; j < b.count(); ++j) {
      for (std::size_t c = 0; c < k; ++c) diff[c] = a.point(i)[c] - b.point(j)[c];
      hi = std::min(hi, ball.norm(diff));
    }
  }
  if (hi == 0.0) return 0.0;
  double lo = 0.0;
  std::vector<double> z(k);
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * hi; ++iter) {
    const double t = lo;
    const auto r = gjk_core(k, first_difference(a, b), [&](std::span<const double> x, std::span<double> out) {
      difference_support(a, b, x, out);
      ball.argmax(x, z);
      for (std::size_t c = 0; c < k; ++c) out[c] -= t * z[c];
    });
    if (dot(r.x, r.x) == 0.0) {
      hi = std::min(hi, t);
      break;
    }
    hi = std::min(hi, t + ball.norm(r.x));
    const double dn = ball.dual_norm(r.x);
    const double next = r.support_value > 0.0 && dn > 0.0 ? t + r.support_value / dn : t;
    if (!(next > lo)) break;  // the gap is below what GJK can resolve
    lo = std::min(next, hi);
  }
  return lo;  // the certified bound; hi is limited by the GJK resolution
}

// Every supported metric on the line is monotone in each argument away from
// the diagonal, so the closest points of two intervals are facing endpoints.
double interval_distance(const Hull& a, const Hull& b, const MetricSpec& m) {
  const auto [alo, ahi] = std::minmax_element(a.flat.begin(), a.flat.end());
  const auto [blo, bhi] = std::minmax_element(b.flat.begin(), b.flat.end());
  if (*ahi < *blo) return metric_distance(m, std::span<const double>(&*ahi, 1), std::span<const double>(&*blo, 1));
  if (*bhi < *alo) return metric_distance(m, std::span<const double>(&*bhi, 1), std::span<const double>(&*alo, 1));
  return 0.0;
}

// Multistart pairwise-transfer descent over convex-combination coefficients
// for metrics of the form g(x - y) with g convex.
double descent_distance(const Hull& a, const Hull& b, const MetricSpec& m, double tol) {
  const std::size_t k = a.dim;
  const std::size_t na = a.count(), nb = b.count();
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0, best_j = 0;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double d = metric_distance(m, a.point(i), b.point(j));
      if (d < best) best = d, best_i = i, best_j = j;
    }
  }
  if (best == 0.0) return 0.0;

  Rng rng(0xdecafULL ^ (na * 1315423911ULL) ^ nb);
  std::vector<double> la(na), lb(nb), x(k), y(k), trial(k);
  auto combine = [k](const Hull& h, const std::vector<double>& w, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < h.count(); ++i) {
      if (w[i] == 0.0) continue;
      for (std::size_t t = 0; t < k; ++t) out[t] += w[i] * h.point(i)[t];
    }
  };
  auto dirichlet = [&](std::vector<double>& w) {
    double s = 0.0;
    for (auto& v : w) {
      v = -std::log(1.0 - uniform01(rng));
      s += v;
    }
    for (auto& v : w) v /= s;
  };

  for (int start = 0; start < kDescentStarts; ++start) {
    if (start == 0) {
      std::fill(la.begin(), la.end(), 0.0);
      std::fill(lb.begin(), lb.end(), 0.0);
      la[best_i] = 1.0;
      lb[best_j] = 1.0;
    } else {
      dirichlet(la);
      dirichlet(lb);
    }
    combine(a, la, x);
    combine(b, lb, y);
    double f = metric_distance(m, x, y);
    for (int sweep = 0; sweep < 400; ++sweep) {
      const double before = f;
      for (int side = 0; side < 2; ++side) {
        const Hull& h = side == 0 ? a : b;
        auto& w = side == 0 ? la : lb;
        auto& pos = side == 0 ? x : y;
        const auto& other = side == 0 ? y : x;
        for (std::size_t i = 0; i < h.count(); ++i) {
          for (std::size_t j = 0; j < h.count(); ++j) {
            if (i == j || (w[i] == 0.0 && w[j] == 0.0)) continue;
            // Move t of mass from generator i to j, t in [-w_j, w_i].
            auto eval = [&](double t) {
              for (std::size_t c = 0; c < k; ++c)
                trial[c] = pos[c] + t * (h.point(j)[c] - h.point(i)[c]);
              return metric_distance(m, trial, other);
            };
            double lo = -w[j], hi = w[i];
            constexpr double kInvPhi = 0.6180339887498949;
            double c1 = hi - kInvPhi * (hi - lo), c2 = lo + kInvPhi * (hi - lo);
            double f1 = eval(c1), f2 = eval(c2);
            while (hi - lo > 1e-14) {
              if (f1 <= f2) {
                hi = c2, c2 = c1, f2 = f1;
                c1 = hi - kInvPhi * (hi - lo);
                f1 = eval(c1);
              } else {
                lo = c1, c1 = c2, f1 = f2;
                c2 = lo + kInvPhi * (hi - lo);
                f2 = eval(c2);
              }
            }
            const double t = 0.5 * (lo + hi);
            const double ft = eval(t);
            if (ft < f) {
              f = ft;
              w[i] = std::max(0.0, w[i] - t);
              w[j] = std::max(0.0, w[j] + t);
              pos = trial;
            }
          }
        }
      }
      if (before - f <= tol * 1e-3) break;
    }
    best = std::min(best, f);
  }
  return best;
}

std::optional<double> common_power(const MetricSpec& m) {
  for (const auto& c : m.phi) {
    if (c.shape != PhiComponent::Shape::power || c.param != m.phi.front().param) return std::nullopt;
  }
  return m.phi.front().param;
}

double hull_distance_impl(const Hull& a, const Hull& b, const MetricSpec& m, double tol) {
  if (a.count() == 1 && b.count() == 1) return metric_distance(m, a.point(0), b.point(0));
  if (m.kind == MetricKind::discrete)
    throw UnsupportedError("hull distance is undefined for the discrete metric");
  if (m.kind == MetricKind::lp_pow && m.p < 1.0)
    throw UnsupportedError("hull distance needs convex balls; lp_pow with p < 1 has none");
  if (a.dim == 1) return interval_distance(a, b, m);
  switch (m.kind) {
    case MetricKind::euclidean:
      return gjk_distance(a, b);
    case MetricKind::bounded_euclid:
      return std::min(gjk_distance(a, b), m.cap);
    case MetricKind::lp:
      if (m.p == 2.0) return gjk_distance(a, b);
      return norm_ball_distance(a, b, m.p);
    case MetricKind::lp_pow: {
      // rho_p = ||.||_p^p is a monotone transform of the lp norm.
      const double base = m.p == 2.0 ? gjk_distance(a, b) : norm_ball_distance(a, b, m.p);
      return std::pow(base, m.p);
    }
    case MetricKind::phi:
      if (const auto e = common_power(m)) {
        // sum_i s_i |z_i|^e is the e-th power of an lp norm after scaling
        // coordinate i by s_i^(1/e).
        Hull sa = a, sb = b;
        for (Hull* h : {&sa, &sb}) {
          for (std::size_t i = 0; i < h->flat.size(); ++i) {
            const auto& c = m.phi.size() == 1 ? m.phi.front() : m.phi[i % h->dim];
            h->flat[i] *= std::pow(c.scale, 1.0 / *e);
          }
        }
        return std::pow(norm_ball_distance(sa, sb, *e), *e);
      }
      return descent_distance(a, b, m, tol);
    default:
      throw UnsupportedError("hull distance: unsupported metric " + to_string(m.kind));
  }
}

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

double link_slack(double theta) { return 1e-12 * std::max(1.0, theta); }

// Union-find over cluster indices.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Current cluster list plus a memo of hull distances for pairs that involve a
// non-singleton (singleton pairs are recomputed on the fly).
class ClusterEngine {
 public:
  ClusterEngine(const std::vector<OpinionPoint>& support, const MetricSpec& m) : metric_(m) {
    if (support.empty()) throw ConfigError("support must contain at least one point");
    const std::size_t k = support.front().dim();
    m.validate_dimension(k);
    if (!supports_hull_geometry(m, k))
      throw UnsupportedError("support geometry is unsupported for metric " + to_string(m.kind));
    std::vector<OpinionPoint> unique;
    for (const auto& p : support) {
      if (p.dim() != k) throw ConfigError("support: mixed dimensions");
      if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
    }
    for (const auto& p : unique) {
      Hull h;
      h.dim = k;
      h.flat.assign(p.coords().begin(), p.coords().end());
      h.id = next_id_++;
      hulls_.push_back(std::move(h));
    }
  }

  std::size_t count() const noexcept { return hulls_.size(); }
  // Some pair distance met during closure was within 1e-9 of theta. Usually
  // such pairs end up inside one cluster anyway; callers confirm by comparing
  // with a slightly smaller theta.
  bool saw_distance_near_theta() const noexcept { return near_theta_; }

  double min_distance() {
    refresh_memo();
    return kernels::min_pair_parallel(hulls_.size(), [this](std::size_t i, std::size_t j) { return dist(i, j); });
  }

  void close_at(double theta) {
    const double slack = link_slack(theta);
    const double jump_band = 1e-9 * std::max(1.0, theta);
    for (;;) {
      refresh_memo();
      auto d = [this](std::size_t i, std::size_t j) { return dist(i, j); };
      const auto near = kernels::pairs_within_parallel(hulls_.size(), d, theta + jump_band);
      std::vector<kernels::IndexPair> links;
      for (const auto& [i, j] : near) {
        const double dij = dist(i, j);
        if (std::abs(dij - theta) <= jump_band) near_theta_ = true;
        if (dij <= theta + slack) links.emplace_back(i, j);
      }
      if (links.empty()) return;
      DisjointSets sets(hulls_.size());
      for (const auto& [i, j] : links) sets.unite(i, j);
      std::vector<Hull> next;
      std::vector<std::size_t> slot(hulls_.size(), SIZE_MAX);
      for (std::size_t i = 0; i < hulls_.size(); ++i) {
        const std::size_t r = sets.find(i);
        if (slot[r] == SIZE_MAX) {
          slot[r] = next.size();
          next.push_back(hulls_[i]);
        } else {
          auto& target = next[slot[r]];
          target.flat.insert(target.flat.end(), hulls_[i].flat.begin(), hulls_[i].flat.end());
          target.id = UINT32_MAX;  // mark as merged
        }
      }
      for (auto& h : next) {
        if (h.id == UINT32_MAX) {
          compact(h);
          h.id = next_id_++;
        }
      }
      hulls_ = std::move(next);
    }
  }

  std::vector<ConvexCluster> clusters() const {
    std::vector<ConvexCluster> out;
    for (const auto& h : hulls_) {
      ConvexCluster c;
      for (std::size_t i = 0; i < h.count(); ++i) c.generators.emplace_back(h.point(i));
      out.push_back(std::move(c));
    }
    return out;
  }

  double pair_distance(std::size_t i, std::size_t j) {
    refresh_memo();
    return dist(i, j);
  }

 private:
  double dist(std::size_t i, std::size_t j) const {
    const Hull& a = hulls_[i];
    const Hull& b = hulls_[j];
    if (a.count() == 1 && b.count() == 1) return metric_distance(metric_, a.point(0), b.point(0));
    return memo_.at(pair_key(a.id, b.id));
  }

  // Drops duplicate generators; on the line only the endpoints matter.
  static void compact(Hull& h) {
    if (h.dim == 1) {
      const auto [lo, hi] = std::minmax_element(h.flat.begin(), h.flat.end());
      h.flat = *lo == *hi ? std::vector<double>{*lo} : std::vector<double>{*lo, *hi};
      return;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < h.count(); ++i) {
      bool seen = false;
      for (std::size_t j = 0; j < out.size() / h.dim && !seen; ++j) {
        seen = std::equal(out.begin() + static_cast<std::ptrdiff_t>(j * h.dim),
                          out.begin() + static_cast<std::ptrdiff_t>((j + 1) * h.dim), h.point(i).begin());
      }
      if (!seen) out.insert(out.end(), h.point(i).begin(), h.point(i).end());
    }
    h.flat = std::move(out);
  }

  void refresh_memo() {
    std::vector<kernels::IndexPair> missing;
    for (std::size_t i = 0; i < hulls_.size(); ++i) {
      for (std::size_t j = i + 1; j < hulls_.size(); ++j) {
        if (hulls_[i].count() == 1 && hulls_[j].count() == 1) continue;
        if (!memo_.contains(pair_key(hulls_[i].id, hulls_[j].id))) missing.emplace_back(i, j);
      }
    }
    if (missing.empty()) return;
    const auto values = kernels::map_parallel<double>(missing.size(), [&](std::size_t t) {
      return hull_distance_impl(hulls_[missing[t].first], hulls_[missing[t].second], metric_, kHullTolerance);
    });
    for (std::size_t t = 0; t < missing.size(); ++t)
      memo_[pair_key(hulls_[missing[t].first].id, hulls_[missing[t].second].id)] = values[t];
  }

  MetricSpec metric_;
  std::vector<Hull> hulls_;
  std::unordered_map<std::uint64_t, double> memo_;
  std::uint32_t next_id_ = 0;
  bool near_theta_ = false;
};

}  // namespace

bool supports_hull_geometry(const MetricSpec& m, std::size_t k) {
  switch (m.kind) {
    case MetricKind::discrete:
      return false;
    case MetricKind::lp_pow:
      return m.p >= 1.0;
    case MetricKind::cubic:
      return k == 1;
    default:
      return true;
  }
}

double hull_distance(const ConvexCluster& a, const ConvexCluster& b, const MetricSpec& m, double tol) {
  if (!(tol > 0.0)) throw ConfigError("hull_distance needs tol > 0");
  const Hull ha = to_hull(a);
  const Hull hb = to_hull(b);
  if (ha.dim != hb.dim) throw ConfigError("hull_distance: dimension mismatch");
  m.validate_dimension(ha.dim);
  return hull_distance_impl(ha, hb, m, tol);
}

bool hull_contains(const ConvexCluster& c, const OpinionPoint& x, double tol) {
  return hull_distance(c, ConvexCluster{{x}}, MetricSpec::euclidean(), tol) <= tol;
}

ComponentDecomposition components_at(const std::vector<OpinionPoint>& support, double theta,
                                     const MetricSpec& m) {
  if (!(theta > 0.0)) throw ConfigError("components_at needs theta > 0");
  ClusterEngine engine(support, m);
  engine.close_at(theta);
  ComponentDecomposition out;
  out.theta = theta;
  out.metric = m;
  out.clusters = engine.clusters();
  if (engine.saw_distance_near_theta()) {
    ClusterEngine below(support, m);
    below.close_at(theta - 2e-9 * std::max(1.0, theta));
    out.at_jump_threshold = below.count() != engine.count();
  }
  return out;
}

MergeTimeline merge_timeline(const std::vector<OpinionPoint>& support, const MetricSpec& m) {
  ClusterEngine engine(support, m);
  MergeTimeline t;
  t.component_counts.push_back(engine.count());
  while (engine.count() > 1) {
    const double next = engine.min_distance();
    engine.close_at(next);
    t.thresholds.push_back(next);
    t.component_counts.push_back(engine.count());
  }
  return t;
}

double largest_gap(const std::vector<OpinionPoint>& support, const MetricSpec& m) {
  const MergeTimeline t = merge_timeline(support, m);
  return t.thresholds.empty() ? 0.0 : t.thresholds.back();
}

ThetaPrediction predicted_theta_c(const DistributionSpec& d, const MetricSpec& m,
                                  std::optional<std::size_t> discretization_m) {
  ThetaPrediction out;
  out.radius = distribution_radius(d, m);
  if (!std::isfinite(out.radius)) {
    out.bounded = false;
    out.theta_c = std::numeric_limits<double>::infinity();
    out.note = "unbounded support: no finite critical value, no consensus for every theta";
    return out;
  }
  const SupportDescription support = support_of(d);
  std::vector<OpinionPoint> pts;
  if (support.analytic) {
    const std::size_t m_points = discretization_m.value_or(2000);
    pts = support.discretize(m_points);
    out.discretized = true;
    const std::size_t k = d.dim();
    std::vector<double> flat;
    for (const auto& p : pts) flat.insert(flat.end(), p.coords().begin(), p.coords().end());
    out.discretization_spacing = kernels::max_nearest_parallel(pts.size(), [&](std::size_t i, std::size_t j) {
      return metric_distance(m, std::span<const double>(flat.data() + i * k, k),
                             std::span<const double>(flat.data() + j * k, k));
    });
    out.note = "gap estimated on a " + std::to_string(m_points) + "-point discretisation of " + support.tag;
  } else {
    pts = support.points;
  }
  out.support_points = pts.size();
  out.gap = largest_gap(pts, m);
  out.theta_c = std::max(out.radius, out.gap);
  return out;
}

std::string to_string(FlatSide s) {
  switch (s) {
    case FlatSide::left: return "left";
    case FlatSide::right: return "right";
    case FlatSide::two_sided: return "two_sided";
  }
  return "two_sided";
}

FlatnessReport epsilon_flat(std::span<const double> config, std::size_t dim, std::size_t v,
                            double epsilon, FlatSide side, std::size_t horizon,
                            const OpinionPoint& mean, const MetricSpec& m) {
  if (dim == 0 || config.size() % dim != 0) throw ConfigError("epsilon_flat: malformed configuration");
  if (mean.dim() != dim) throw ConfigError("epsilon_flat: mean has the wrong dimension");
  const std::size_t n = config.size() / dim;
  const bool need_left = side != FlatSide::right;
  const bool need_right = side != FlatSide::left;
  if (v >= n || (need_left && v < horizon) || (need_right && v + horizon >= n))
    throw ContractViolation("epsilon_flat: horizon exceeds the configuration");

  FlatnessReport report{v, epsilon, side, horizon, true};
  const std::size_t max_left = need_left ? horizon : 0;
  const std::size_t max_right = need_right ? horizon : 0;
  const std::size_t base = v - max_left;
  // prefix[j] = sum of the first j sites from `base`.
  const std::size_t len = max_left + max_right + 1;
  std::vector<double> prefix((len + 1) * dim, 0.0);
  for (std::size_t j = 0; j < len; ++j) {
    for (std::size_t i = 0; i < dim; ++i)
      prefix[(j + 1) * dim + i] = prefix[j * dim + i] + config[(base + j) * dim + i];
  }
  std::vector<double> avg(dim);
  auto window_ok = [&](std::size_t left, std::size_t right) {
    const std::size_t lo = max_left - left;
    const std::size_t hi = max_left + right + 1;
    const double count = static_cast<double>(hi - lo);
    for (std::size_t i = 0; i < dim; ++i) avg[i] = (prefix[hi * dim + i] - prefix[lo * dim + i]) / count;
    return metric_distance(m, avg, mean.coords()) <= epsilon;
  };
  for (std::size_t left = 0; left <= max_left; ++left) {
    const bool one_sided = side != FlatSide::two_sided;
    for (std::size_t right = 0; right <= max_right; ++right) {
      // One-sided windows grow in a single direction only.
      if (one_sided && left != 0 && right != 0) continue;
      if (!window_ok(left, right)) {
        report.holds_up_to_horizon = false;
        return report;
      }
    }
  }
  return report;
}

}  // namespace deffuant
