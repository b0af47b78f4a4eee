#pragma once
// Distance balls measured from round-trip timing, their intersection region,
// and placement checks (convex hull membership, collinear projection).
//
// All sets are closed. The diameter bound is exact in 1D; in 2D/3D it is a
// deterministic lattice-sampled upper bound whose candidates depend only on
// the region itself (the lattice is anchored at multiples of the resolution
// in world coordinates), so adding a ball can only shrink the result.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "keytag/errors.hpp"
#include "keytag/spacetime.hpp"

namespace keytag {

// Absolute slack (metres) absorbing float rounding in containment tests.
inline constexpr double kGeomEps = 1e-9;

struct Ball {
  Position center;
  double radius = 0.0; // metres

  friend bool operator==(const Ball&, const Ball&) = default;
};

// Intersection of closed balls; never constructed empty of balls.
struct Region {
  std::vector<Ball> balls;
  int dim = 1;
};

inline Region make_region(std::vector<Ball> balls) {
  if (balls.empty()) throw UsageError("Region: needs at least one ball");
  Region r;
  r.dim = balls.front().center.dim;
  for (const Ball& b : balls) {
    if (b.center.dim != r.dim) throw UsageError("Region: mixed dimensions");
    if (!(b.radius >= 0.0) || !std::isfinite(b.radius))
      throw UsageError("Region: radius must be finite and non-negative");
  }
  r.balls = std::move(balls);
  return r;
}

inline Ball inflate(Ball b, double extra_radius) {
  if (!(extra_radius >= 0.0)) throw UsageError("inflate: extra radius must be non-negative");
  b.radius += extra_radius;
  return b;
}

// One-way distance from a round trip corrected for the responder's fixed
// processing (delta1) and transmission (delta2) latency. A round trip shorter
// than the latency cannot come from a legitimate reflection, so it is
// rejected (nullopt) rather than clamped.
inline std::optional<Ball> ball_from_timing(double send_time, double receive_time, double delta1,
                                            double delta2, const Position& center,
                                            double speed = kSignalSpeed) {
  if (!(delta1 >= 0.0 && delta2 >= 0.0)) throw UsageError("ball_from_timing: negative latency");
  if (!(speed > 0.0)) throw UsageError("ball_from_timing: speed must be positive");
  const double corrected = receive_time - send_time - delta1 - delta2;
  if (corrected < 0.0) return std::nullopt;
  return Ball{center, speed * corrected / 2.0};
}

inline bool region_contains(const Region& region, const Position& p) {
  if (p.dim != region.dim) throw UsageError("region_contains: dimension mismatch");
  for (const Ball& b : region.balls)
    if (distance(b.center, p) > b.radius + kGeomEps) return false;
  return true;
}

namespace detail {

// 1D: the region is an interval; exact arithmetic.
inline std::optional<double> interval_diameter(const Region& region) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const Ball& b : region.balls) {
    lo = std::max(lo, b.center[0] - b.radius);
    hi = std::min(hi, b.center[0] + b.radius);
  }
  if (lo > hi + kGeomEps) return std::nullopt;
  return std::max(0.0, hi - lo);
}

// Upper bound on the diameter of the intersection of two balls: the lens fits
// inside a cylinder of axial extent h = r1+r2-D and cross radius a.
inline double pair_diameter_bound(const Ball& x, const Ball& y) {
  const double D = distance(x.center, y.center);
  const double r1 = x.radius, r2 = y.radius;
  if (D >= r1 + r2) return 0.0; // touching at most at a point
  if (D + std::min(r1, r2) <= std::max(r1, r2)) return 2.0 * std::min(r1, r2);
  const double h = r1 + r2 - D;
  const double t = (D * D + r1 * r1 - r2 * r2) / (2.0 * D);
  const double a2 = std::max(0.0, r1 * r1 - t * t);
  return std::sqrt(h * h + 4.0 * a2);
}

} // namespace detail

// Upper bound on the diameter of the region, or nullopt when the region is
// certainly empty. 1D is exact. In 2D/3D candidates are the lattice points
// (integer multiples of `resolution` per axis) inside the region, scanned
// over the smallest ball's bounding box; the returned value is
//   min(2*r_min, pairwise lens bounds, max candidate distance + 2*res*sqrt(d))
// which is >= the true diameter whenever the region is thick relative to the
// lattice, and exceeds it by at most 2*res*sqrt(d). Cost grows as
// (2*r_min/resolution)^d; callers pick the resolution accordingly.
inline std::optional<double> region_diameter_bound(const Region& region, double resolution) {
  if (!(resolution > 0.0)) throw UsageError("region_diameter_bound: resolution must be positive");
  if (region.dim == 1) return detail::interval_diameter(region);

  double cap = 2.0 * region.balls.front().radius;
  std::size_t smallest = 0;
  for (std::size_t i = 0; i < region.balls.size(); ++i) {
    cap = std::min(cap, 2.0 * region.balls[i].radius);
    if (region.balls[i].radius < region.balls[smallest].radius) smallest = i;
    for (std::size_t j = i + 1; j < region.balls.size(); ++j) {
      const double pb = detail::pair_diameter_bound(region.balls[i], region.balls[j]);
      if (pb <= 0.0) {
        const Ball& x = region.balls[i];
        const Ball& y = region.balls[j];
        if (distance(x.center, y.center) > x.radius + y.radius + kGeomEps) return std::nullopt;
      }
      cap = std::min(cap, pb);
    }
  }

  const Ball& anchor = region.balls[smallest];
  const int d = region.dim;
  std::int64_t idx_lo[3] = {0, 0, 0};
  std::int64_t idx_hi[3] = {0, 0, 0};
  for (int k = 0; k < d; ++k) {
    idx_lo[k] = static_cast<std::int64_t>(std::ceil((anchor.center[k] - anchor.radius) / resolution));
    idx_hi[k] = static_cast<std::int64_t>(std::floor((anchor.center[k] + anchor.radius) / resolution));
  }

  // Keep only lattice points with at least one out-of-region axis neighbour:
  // for a convex region the farthest lattice pair always has both endpoints
  // on that shell, and the shell is much smaller than the solid scan.
  std::vector<Position> shell;
  Position p;
  p.dim = d;
  for (std::int64_t ix = idx_lo[0]; ix <= idx_hi[0]; ++ix) {
    p[0] = static_cast<double>(ix) * resolution;
    for (std::int64_t iy = (d > 1 ? idx_lo[1] : 0); iy <= (d > 1 ? idx_hi[1] : 0); ++iy) {
      if (d > 1) p[1] = static_cast<double>(iy) * resolution;
      for (std::int64_t iz = (d > 2 ? idx_lo[2] : 0); iz <= (d > 2 ? idx_hi[2] : 0); ++iz) {
        if (d > 2) p[2] = static_cast<double>(iz) * resolution;
        if (!region_contains(region, p)) continue;
        bool boundary = false;
        for (int k = 0; k < d && !boundary; ++k) {
          for (double s : {-resolution, resolution}) {
            Position q = p;
            q[k] += s;
            if (!region_contains(region, q)) {
              boundary = true;
              break;
            }
          }
        }
        if (boundary) shell.push_back(p);
      }
    }
  }

  if (shell.empty()) {
    // Region thinner than the lattice everywhere (or truly empty in a way the
    // pairwise test cannot see). Fall back to the analytic caps alone.
    return std::max(0.0, cap);
  }

  double best2 = 0.0;
  for (std::size_t i = 0; i < shell.size(); ++i)
    for (std::size_t j = i + 1; j < shell.size(); ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        const double dk = shell[i][k] - shell[j][k];
        s += dk * dk;
      }
      best2 = std::max(best2, s);
    }
  const double sampled = std::sqrt(best2) + 2.0 * resolution * std::sqrt(static_cast<double>(d));
  return std::max(0.0, std::min(cap, sampled));
}

namespace detail {

// Barycentric membership test for an affinely independent subset, via the
// Gram system of the edge vectors. Returns false for degenerate subsets;
// Caratheodory guarantees some independent subset witnesses hull membership.
inline bool in_simplex(const std::vector<Position>& pts, const std::vector<int>& idx,
                       const Position& target, double scale) {
  const int k = static_cast<int>(idx.size());
  const int d = target.dim;
  const double eps = 1e-9 * std::max(1.0, scale);
  if (k == 1) return distance(pts[static_cast<std::size_t>(idx[0])], target) <= eps;

  const Position& v0 = pts[static_cast<std::size_t>(idx[0])];
  double E[3][3];   // edge vectors, rows
  double G[3][4];   // Gram matrix augmented with rhs
  const int m = k - 1;
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < d; ++a)
      E[i][a] = pts[static_cast<std::size_t>(idx[i + 1])][a] - v0[a];
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += E[i][a] * E[j][a];
      G[i][j] = s;
    }
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += E[i][a] * (target[a] - v0[a]);
    G[i][m] = s;
  }

  // Gaussian elimination with partial pivoting on the m x m Gram system.
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(G[r][col]) > std::abs(G[piv][col])) piv = r;
    if (std::abs(G[piv][col]) <= eps * eps) return false; // affinely dependent
    if (piv != col)
      for (int c = col; c <= m; ++c) std::swap(G[piv][c], G[col][c]);
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = G[r][col] / G[col][col];
      for (int c = col; c <= m; ++c) G[r][c] -= f * G[col][c];
    }
  }
  double lam[3];
  double lam0 = 1.0;
  for (int i = 0; i < m; ++i) {
    lam[i] = G[i][m] / G[i][i];
    lam0 -= lam[i];
  }
  const double coeff_eps = 1e-9;
  if (lam0 < -coeff_eps) return false;
  for (int i = 0; i < m; ++i)
    if (lam[i] < -coeff_eps) return false;

  // The system only solves the projection onto the subset's affine span;
  // confirm the target actually lies in that span.
  double res2 = 0.0;
  for (int a = 0; a < d; ++a) {
    double r = target[a] - v0[a];
    for (int i = 0; i < m; ++i) r -= lam[i] * E[i][a];
    res2 += r * r;
  }
  return res2 <= eps * eps;
}

} // namespace detail

// True iff the target lies in the convex hull of the sites. Checks every
// subset of at most d+1 sites, which is exhaustive for the handful of
// verifier positions a deployment has.
inline bool convex_hull_condition(const std::vector<Position>& sites, const Position& target) {
  if (sites.empty()) throw UsageError("convex_hull_condition: no sites");
  const int d = target.dim;
  for (const Position& s : sites) check_same_dim(s, target, "convex_hull_condition");

  if (d == 1) {
    double lo = sites.front()[0], hi = sites.front()[0];
    for (const Position& s : sites) {
      lo = std::min(lo, s[0]);
      hi = std::max(hi, s[0]);
    }
    const double eps = 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
    return target[0] >= lo - eps && target[0] <= hi + eps;
  }

  double scale = 1.0;
  for (const Position& s : sites) scale = std::max(scale, distance(s, target));

  const int n = static_cast<int>(sites.size());
  const int max_k = std::min(n, d + 1);
  std::vector<int> idx;
  // Iterative subset enumeration by size.
  for (int k = 1; k <= max_k; ++k) {
    idx.assign(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      if (detail::in_simplex(sites, idx, target, scale)) return true;
      int i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return false;
}

// Orthonormal frame of a fitted line, for deployments constrained to a track:
// positions project to a single coordinate and 1D geometry applies.
struct LineFrame {
  Position origin;
  Velocity direction; // unit vector

  double coord(const Position& p) const {
    check_same_dim(p, origin, "LineFrame::coord");
    double s = 0.0;
    for (int i = 0; i < p.dim; ++i) s += (p[i] - origin[i]) * direction[i];
    return s;
  }

  double off_line_distance(const Position& p) const {
    const double t = coord(p);
    double s = 0.0;
    for (int i = 0; i < p.dim; ++i) {
      const double r = p[i] - origin[i] - t * direction[i];
      s += r * r;
    }
    return std::sqrt(s);
  }
};

// Direction from the farthest-apart pair: exact when the points are truly
// collinear, which is the only supported use.
inline LineFrame fit_line(const std::vector<Position>& points) {
  if (points.empty()) throw UsageError("fit_line: no points");
  LineFrame f;
  f.origin = points.front();
  f.direction = Velocity{};
  f.direction.dim = f.origin.dim;
  f.direction[0] = 1.0;
  double best = -1.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dd = distance(points[i], points[j]);
      if (dd > best) {
        best = dd;
        bi = i;
        bj = j;
      }
    }
  if (best > 0.0) {
    f.origin = points[bi];
    for (int a = 0; a < f.origin.dim; ++a)
      f.direction[a] = (points[bj][a] - points[bi][a]) / best;
  }
  return f;
}

} // namespace keytag
