#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hotspots/bessel.hpp"
#include "hotspots/eigensolver.hpp"
#include "hotspots/error.hpp"
#include "hotspots/field.hpp"
#include "hotspots/geometry.hpp"

namespace hotspots {

enum class Locus { interior, side, vertex };

inline const char* to_string(Locus l) {
  switch (l) {
    case Locus::interior: return "interior";
    case Locus::side: return "side";
    case Locus::vertex: return "vertex";
  }
  return "unknown";
}

struct CriticalPoint {
  Vec2 location;
  Locus locus = Locus::interior;
  int id = -1;  ///< side or vertex id
  std::optional<int> index;
  bool is_extremum = false;
  double value = 0.0;
  // Arc-count diagnostics at radius r and r/2.
  int arcs = -1;
  int arcs_half = -1;
  double probe_radius = 0.0;
  double grad_residual = 0.0;  ///< |grad u| / max |grad u|
  double confidence = 0.0;
  // Vertex diagnostics.
  std::optional<int> bessel_k;
  std::optional<double> bessel_a;
  std::optional<int> bessel_index;
  std::optional<int> arc_index;
  std::vector<double> coefficients;
  // Second derivatives in the side frame (side points) or Hessian (interior).
  std::optional<double> hess_tt, hess_nn;
  bool nondegenerate = false;
  std::string note;
};

struct CriticalOptions {
  double probe_factor = 3.0;  ///< probe radius in local mesh sizes
  int probe_samples = 256;
  double coefficient_threshold = 1e-3;
  double unit_band = 0.05;        ///< |a| within this of 1 is unresolved
  double vertex_exclusion = 1.0;  ///< side roots this close to a corner (in h) merge into it
  double boundary_exclusion = 1.0;
  double bary_slack = 0.05;
  double index0_floor = 1e-4;  ///< |u_t| floor (relative) for index-0 side points
  FitOptions fit;
};

struct CriticalSet {
  std::vector<CriticalPoint> points;
  bool degenerate = false;  ///< rectangle-like non-isolated critical locus
  std::string degenerate_note;
  std::size_t merged = 0;  ///< candidates absorbed into vertices or duplicates
  std::vector<std::string> warnings;

  std::size_t nonzero_count() const {
    std::size_t s = 0;
    for (const auto& p : points)
      if (p.index && *p.index != 0) ++s;
    return s;
  }
  std::size_t count(Locus l) const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [&](const auto& p) { return p.locus == l; }));
  }
  bool all_resolved() const {
    return std::all_of(points.begin(), points.end(), [](const auto& p) { return p.index.has_value(); });
  }
};

// ---------------------------------------------------------------------------
// Arc counting

/// Sign changes of u - u0 along the circle arc c + r (cos a, sin a),
/// a in [a0, a1]; `closed` wraps the last sample to the first.
template <ScalarSource F>
int count_sign_changes(const F& u, double u0, Vec2 c, double r, double a0, double a1, bool closed,
                       int samples) {
  std::vector<int> signs;
  signs.reserve(static_cast<std::size_t>(samples) + 1);
  std::vector<double> diffs;
  double scale = 0.0;
  for (int i = 0; i <= samples; ++i) {
    if (closed && i == samples) break;
    const double a = a0 + (a1 - a0) * static_cast<double>(i) / samples;
    const double d = u.value(c + Vec2{std::cos(a), std::sin(a)} * r) - u0;
    diffs.push_back(d);
    scale = std::max(scale, std::abs(d));
  }
  // Samples that are zero at round-off level carry no sign.
  const double eps = 1e-12 * scale;
  for (double d : diffs)
    if (std::abs(d) > eps) signs.push_back(d > 0 ? 1 : -1);
  int n = 0;
  for (std::size_t i = 1; i < signs.size(); ++i) n += signs[i] != signs[i - 1];
  if (closed && signs.size() > 1) n += signs.front() != signs.back();
  return n;
}

struct ArcIndex {
  std::optional<int> index;
  int arcs = -1;
  int arcs_half = -1;
  double radius = 0.0;
};

/// Index by counting sign changes on probe arcs of radius r and r/2.
/// Interior: 1 - n/2 over the full circle; boundary: 1 - n over the part of
/// the circle inside the domain. `a0, a1` is the interior angular range for
/// boundary points.
template <ScalarSource F>
ArcIndex arc_index(const F& u, Vec2 p, Locus locus, double r, double a0 = 0.0, double a1 = 2.0 * pi,
                   int samples = 256, std::optional<double> center_value = std::nullopt) {
  const double u0 = center_value.value_or(u.value(p));
  ArcIndex out;
  out.radius = r;
  const bool closed = locus == Locus::interior;
  if (closed) {
    a0 = 0.0;
    a1 = 2.0 * pi;
  }
  out.arcs = count_sign_changes(u, u0, p, r, a0, a1, closed, samples);
  out.arcs_half = count_sign_changes(u, u0, p, 0.5 * r, a0, a1, closed, samples);
  if (out.arcs != out.arcs_half) return out;
  if (closed) {
    if (out.arcs % 2 != 0) return out;
    out.index = 1 - out.arcs / 2;
  } else {
    out.index = 1 - out.arcs;
  }
  return out;
}

/// Interior angular range at a point on side s (directions into the domain).
inline std::pair<double, double> side_arc_range(const Polygon& poly, std::size_t s) {
  const double a = poly.side_direction(s);
  return {a, a + pi};
}

/// Interior angular range at vertex v.
inline std::pair<double, double> vertex_arc_range(const Polygon& poly, std::size_t v) {
  const Sector sec = poly.sector(v);
  return {sec.frame_angle, sec.frame_angle + sec.beta};
}

// ---------------------------------------------------------------------------
// Vertex classification from Fourier-Bessel coefficients

struct BesselIndex {
  std::optional<int> index;
  std::optional<int> k;
  std::optional<double> a;
  bool vertex_zero = false;
};

/// Contribution of c_n relative to the fit scale at the outer fit radius.
inline double coefficient_weight(const BesselExpansion& e, std::size_t n) {
  const double o = static_cast<double>(n) * e.nu;
  double j = 0.0;
  const double k = std::sqrt(e.mu);
  for (double r : {e.annulus.r_in, e.annulus.r_out}) j = std::max(j, std::abs(bessel_j(o, k * r)));
  return e.scale > 0.0 ? std::abs(e.c[n]) * j / e.scale : 0.0;
}

/// k = smallest k >= 1 with c_k != 0; then 1 - k when u(v) = 0 or
/// beta > k pi/2, 1 when beta < k pi/2, and the |a| test at beta = k pi/2.
inline BesselIndex bessel_vertex_index(const BesselExpansion& e, double threshold = 1e-3,
                                       double unit_band = 0.05) {
  BesselIndex out;
  out.vertex_zero = e.scale > 0.0 ? std::abs(e.c[0]) / e.scale < threshold : true;
  for (std::size_t n = 1; n < e.c.size(); ++n)
    if (coefficient_weight(e, n) >= threshold) {
      out.k = static_cast<int>(n);
      break;
    }
  if (!out.k) {
    // beta < pi/2 <= k pi/2 for every k, so the value of k is immaterial.
    if (!out.vertex_zero && e.beta < 0.5 * pi - 1e-9) out.index = 1;
    return out;
  }
  const int k = *out.k;
  const double half = k * pi / 2.0;
  if (out.vertex_zero || e.beta > half + 1e-9) {
    out.index = 1 - k;
  } else if (e.beta < half - 1e-9) {
    out.index = 1;
  } else {
    // k nu = 2: u - u(v) ~ (mu r^2 / 4) (-c0 + (c_k / 2) cos 2 theta).
    out.a = 2.0 * e.c[0] / e.c[static_cast<std::size_t>(k)];
    const double a = std::abs(*out.a);
    if (a > 1.0 + unit_band) out.index = 1;
    else if (a < 1.0 - unit_band) out.index = 1 - k;
  }
  return out;
}

/// Fitted expansions at every vertex whose angle differs from pi.
template <ScalarSource F>
std::vector<std::optional<BesselExpansion>> vertex_expansions(const F& u, const Polygon& poly, double mu,
                                                              const FitOptions& opt = {},
                                                              std::vector<std::string>* warnings = nullptr) {
  std::vector<std::optional<BesselExpansion>> out(poly.size());
  for (std::size_t v = 0; v < poly.size(); ++v) {
    if (poly.is_straight(v)) continue;
    try {
      out[v] = fit_coefficients(u, poly, v, mu, opt);
    } catch (const Error& err) {
      if (warnings) warnings->push_back("vertex " + std::to_string(v) + ": " + err.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Candidate search on the finite-element solution

namespace detail {

inline double max_gradient(const EigenSolution& sol) {
  double g = 0.0;
  for (const auto& v : sol.recovered_gradient()) g = std::max(g, norm(v));
  return g;
}

inline double local_h(const EigenSolution& sol, const Vec2& p) {
  const auto hit = sol.locate(p);
  return sol.mesh().element_size(static_cast<std::size_t>(hit.triangle));
}

/// Zero of the (linear) element gradient in barycentric coordinates.
inline std::optional<std::array<double, 3>> element_gradient_zero(const EigenSolution& sol, int t) {
  const auto G = sol.corner_gradients(t);
  Eigen::Matrix3d A;
  A << G[0].x, G[1].x, G[2].x, G[0].y, G[1].y, G[2].y, 1, 1, 1;
  const Eigen::Vector3d rhs(0, 0, 1);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::Vector3d l = lu.solve(rhs);
  if (!l.allFinite()) return std::nullopt;
  return std::array<double, 3>{l(0), l(1), l(2)};
}

inline Vec2 bary_point(const Mesh& m, int t, const std::array<double, 3>& l) {
  const auto& tr = m.triangles[static_cast<std::size_t>(t)];
  return m.nodes[tr[0]] * l[0] + m.nodes[tr[1]] * l[1] + m.nodes[tr[2]] * l[2];
}

/// Follows element-gradient zeros across elements until one lands inside its
/// own element. Exact for the piecewise-linear discrete gradient.
inline std::optional<Vec2> refine_interior_zero(const EigenSolution& sol, int t, double slack) {
  for (int hop = 0; hop < 12; ++hop) {
    const auto l = element_gradient_zero(sol, t);
    if (!l) return std::nullopt;
    const Vec2 p = bary_point(sol.mesh(), t, *l);
    if (!sol.contains(p)) return std::nullopt;
    if (std::min({(*l)[0], (*l)[1], (*l)[2]}) >= -slack) return p;
    const int next = sol.locate(p).triangle;
    if (next == t) return p;
    t = next;
  }
  return std::nullopt;
}

struct Cluster {
  std::vector<Vec2> pts;
  Vec2 centroid() const {
    Vec2 c;
    for (const auto& p : pts) c += p;
    return c / static_cast<double>(pts.size());
  }
};

/// Greedy single-link clustering.
inline std::vector<Cluster> cluster_points(const std::vector<Vec2>& pts, double link) {
  std::vector<int> parent(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (distance(pts[i], pts[j]) < link) parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
  std::vector<Cluster> out;
  std::vector<int> slot(pts.size(), -1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int r = find(static_cast<int>(i));
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[r]].pts.push_back(pts[i]);
  }
  return out;
}

/// Length and width of a point cloud along its principal axes.
inline std::pair<double, double> extent(const std::vector<Vec2>& pts) {
  Vec2 c;
  for (const auto& p : pts) c += p;
  c = c / static_cast<double>(pts.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : pts) {
    const Vec2 d = p - c;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  const double ang = 0.5 * std::atan2(2 * sxy, sxx - syy);
  const Vec2 e1{std::cos(ang), std::sin(ang)}, e2 = perp(e1);
  double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
  for (const auto& p : pts) {
    lo1 = std::min(lo1, dot(p - c, e1));
    hi1 = std::max(hi1, dot(p - c, e1));
    lo2 = std::min(lo2, dot(p - c, e2));
    hi2 = std::max(hi2, dot(p - c, e2));
  }
  return {hi1 - lo1, hi2 - lo2};
}

struct SideSample {
  double s;     ///< arclength from the side start
  double d;     ///< tangential derivative
  int node;     ///< dof id when the sample sits on a node, else -1
};

/// Tangential derivative along side s at both ends of every boundary P2
/// edge, ordered by arclength. The restriction of u is quadratic per edge.
inline std::vector<std::pair<SideSample, SideSample>> side_derivatives(const EigenSolution& sol,
                                                                       std::size_t side) {
  const Mesh& m = sol.mesh();
  const auto& x = sol.coefficients();
  const auto [A, B] = m.polygon.side(side);
  const Vec2 tau = m.polygon.side_tangent(side);
  std::vector<std::pair<SideSample, SideSample>> out;
  const DofMap& dofs = sol.dofs();
  // Midpoint dofs are found by position through the owning triangle.
  for (const auto& e : m.boundary) {
    if (e.side != static_cast<int>(side)) continue;
    int a = e.a, b = e.b;
    double sa = dot(m.nodes[a] - A, tau), sb = dot(m.nodes[b] - A, tau);
    if (sa > sb) {
      std::swap(a, b);
      std::swap(sa, sb);
    }
    const Vec2 mid = (m.nodes[a] + m.nodes[b]) * 0.5;
    const auto hit = sol.locate(mid);
    int md = -1;
    for (int k = 3; k < 6; ++k)
      if (distance(dofs.coords[dofs.cells[hit.triangle][k]], mid) < 1e-12 * (1.0 + norm(mid)))
        md = dofs.cells[hit.triangle][k];
    const double um = md >= 0 ? x(md) : sol.value(mid);
    const double L = sb - sa;
    const double d0 = (-3 * x(a) + 4 * um - x(b)) / L;
    const double d1 = (x(a) - 4 * um + 3 * x(b)) / L;
    out.push_back({{sa, d0, a}, {sb, d1, b}});
  }
  std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) { return p.first.s < q.first.s; });
  (void)B;
  return out;
}

}  // namespace detail

/// Probe radius for a point, kept clear of the boundary, corners and other candidates.
inline double probe_radius(const EigenSolution& sol, const CriticalPoint& cp, const CriticalOptions& opt,
                           const std::vector<Vec2>& others, double min_radius = 0.0) {
  const Polygon& poly = sol.polygon();
  double r = std::max(opt.probe_factor * detail::local_h(sol, cp.location), min_radius);
  for (const auto& q : others) {
    const double d = distance(q, cp.location);
    if (d > 1e-12) r = std::min(r, 0.45 * d);
  }
  switch (cp.locus) {
    case Locus::interior: r = std::min(r, 0.9 * poly.distance_to_boundary(cp.location)); break;
    case Locus::side: {
      for (std::size_t v = 0; v < poly.size(); ++v)
        r = std::min(r, 0.9 * distance(poly.vertex(v), cp.location));
      for (std::size_t s = 0; s < poly.size(); ++s)
        if (static_cast<int>(s) != cp.id && poly.distance_to_side(cp.location, s) > 1e-9)
          r = std::min(r, 0.9 * poly.distance_to_side(cp.location, s));
      break;
    }
    case Locus::vertex: {
      const auto v = static_cast<std::size_t>(cp.id);
      r = std::min({r, 0.4 * poly.side_length(v), 0.4 * poly.side_length(poly.prev(v)),
                    0.5 * poly.vertex_clearance(v)});
      break;
    }
  }
  return r;
}

/// Arc-count index of a located candidate.
inline ArcIndex index_of(const EigenSolution& sol, const CriticalPoint& cp, const CriticalOptions& opt = {},
                         const std::vector<Vec2>& others = {}, double min_radius = 0.0) {
  const double r = probe_radius(sol, cp, opt, others, min_radius);
  const Polygon& poly = sol.polygon();
  switch (cp.locus) {
    case Locus::interior: return arc_index(sol, cp.location, Locus::interior, r, 0, 0, opt.probe_samples);
    case Locus::side: {
      const auto [a0, a1] = side_arc_range(poly, static_cast<std::size_t>(cp.id));
      return arc_index(sol, cp.location, Locus::side, r, a0, a1, opt.probe_samples);
    }
    case Locus::vertex: {
      const auto [a0, a1] = vertex_arc_range(poly, static_cast<std::size_t>(cp.id));
      const int node = sol.mesh().vertex_node[static_cast<std::size_t>(cp.id)];
      return arc_index(sol, cp.location, Locus::vertex, r, a0, a1, opt.probe_samples,
                       sol.coefficients()(node));
    }
  }
  return {};
}

/// Second derivatives at a side point: u_tt by central differences along the
/// side, u_nn from the equation (-u_tt - u_nn = mu u, u_tn = 0 on a straight side).
inline std::pair<double, double> side_hessian(const EigenSolution& sol, std::size_t side, Vec2 p, double d) {
  const Vec2 tau = sol.polygon().side_tangent(side);
  const double u0 = sol.value(p);
  const double utt = (sol.value(p + tau * d) - 2 * u0 + sol.value(p - tau * d)) / (d * d);
  return {utt, -sol.mu() * u0 - utt};
}

/// Hessian eigenvalue product at an interior point from gradient differences.
inline std::pair<double, double> interior_hessian(const EigenSolution& sol, Vec2 p, double d) {
  const Vec2 gx = (sol.gradient(p + Vec2{d, 0}) - sol.gradient(p - Vec2{d, 0})) / (2 * d);
  const Vec2 gy = (sol.gradient(p + Vec2{0, d}) - sol.gradient(p - Vec2{0, d})) / (2 * d);
  const double a = gx.x, b = 0.5 * (gx.y + gy.x), c = gy.y;
  const double tr = a + c, det = a * c - b * b;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return {0.5 * tr - disc, 0.5 * tr + disc};
}

inline CriticalSet find_critical_points(const EigenSolution& sol, const CriticalOptions& opt = {}) {
  const Mesh& m = sol.mesh();
  const Polygon& poly = m.polygon;
  const auto& x = sol.coefficients();
  CriticalSet out;
  const double gmax = detail::max_gradient(sol);
  const double umax = x.cwiseAbs().maxCoeff();

  // (i) interior zeros of the piecewise-linear gradient.
  std::vector<Vec2> raw;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto l = detail::element_gradient_zero(sol, t);
    if (!l || std::min({(*l)[0], (*l)[1], (*l)[2]}) < -opt.bary_slack) continue;
    if (auto p = detail::refine_interior_zero(sol, t, opt.bary_slack)) raw.push_back(*p);
  }
  const double h = m.size.h;
  std::vector<CriticalPoint> cands;
  for (const auto& cl : detail::cluster_points(raw, 1.5 * h)) {
    if (cl.pts.size() > 10) {
      const auto [len, wid] = detail::extent(cl.pts);
      if (len > 5 * h && wid < 0.1 * len) {
        out.degenerate = true;
        out.degenerate_note = "non-isolated interior critical locus along a segment";
        continue;
      }
    }
    // Representative: smallest gradient.
    Vec2 best = cl.pts.front();
    double gbest = norm(sol.gradient(best));
    for (const auto& p : cl.pts) {
      const double g = norm(sol.gradient(p));
      if (g < gbest) {
        gbest = g;
        best = p;
      }
    }
    if (poly.distance_to_boundary(best) < opt.boundary_exclusion * detail::local_h(sol, best)) {
      ++out.merged;
      continue;
    }
    CriticalPoint cp;
    cp.location = best;
    cp.locus = Locus::interior;
    cp.grad_residual = gmax > 0 ? gbest / gmax : 0.0;
    cands.push_back(cp);
  }

  // (ii) sign changes of the tangential derivative along each side.
  auto corner = [&](std::size_t v) { return !poly.is_straight(v); };
  auto near_corner = [&](const Vec2& p, double hl) {
    for (std::size_t v = 0; v < poly.size(); ++v)
      if (corner(v) && distance(p, poly.vertex(v)) < opt.vertex_exclusion * hl) return true;
    return false;
  };
  // Side roots absorbed by a corner, kept for the total-index balance below.
  std::vector<std::pair<std::size_t, Vec2>> absorbed;
  auto absorb = [&](std::size_t side, const Vec2& p) {
    absorbed.emplace_back(side, p);
    ++out.merged;
  };
  std::vector<std::vector<std::pair<detail::SideSample, detail::SideSample>>> sides(poly.size());
  for (std::size_t s = 0; s < poly.size(); ++s) sides[s] = detail::side_derivatives(sol, s);

  for (std::size_t s = 0; s < poly.size(); ++s) {
    const auto& seq = sides[s];
    const auto [A, B] = poly.side(s);
    const Vec2 tau = poly.side_tangent(s);
    std::vector<double> roots;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const auto& [p0, p1] = seq[k];
      if ((p0.d > 0) != (p1.d > 0) && p0.d != 0.0) {
        const double f = p0.d / (p0.d - p1.d);
        roots.push_back(p0.s + f * (p1.s - p0.s));
      }
      if (k + 1 < seq.size() && (p1.d > 0) != (seq[k + 1].first.d > 0)) roots.push_back(p1.s);
    }
    std::vector<Vec2> rp;
    for (double r : roots) rp.push_back(A + tau * r);
    for (const auto& cl : detail::cluster_points(rp, 1.5 * h)) {
      if (cl.pts.size() > 10) {
        const auto [len, wid] = detail::extent(cl.pts);
        if (len > 5 * h) {
          out.degenerate = true;
          out.degenerate_note = "tangential derivative vanishes along a side";
          continue;
        }
      }
      if (cl.pts.size() % 2 == 0) {
        out.merged += cl.pts.size();
        continue;
      }
      const Vec2 c = cl.pts[cl.pts.size() / 2];
      if (near_corner(c, detail::local_h(sol, c))) {
        absorb(s, c);
        continue;
      }
      CriticalPoint cp;
      cp.location = c;
      cp.locus = Locus::side;
      cp.id = static_cast<int>(s);
      cp.grad_residual = gmax > 0 ? norm(sol.gradient(c)) / gmax : 0.0;
      cands.push_back(cp);
    }
    // Index-0 candidates: small local minima of |u_t| without a sign change.
    for (std::size_t k = 1; k + 1 < seq.size(); ++k) {
      const double d = std::abs(seq[k].first.d);
      if (d >= opt.index0_floor * gmax) continue;
      if (d > std::abs(seq[k - 1].first.d) || d > std::abs(seq[k + 1].first.d)) continue;
      if ((seq[k - 1].first.d > 0) != (seq[k + 1].first.d > 0)) continue;
      const Vec2 c = A + tau * seq[k].first.s;
      if (near_corner(c, detail::local_h(sol, c))) continue;
      bool dup = false;
      for (const auto& q : cands)
        if (distance(q.location, c) < 1.5 * h) dup = true;
      if (dup) continue;
      CriticalPoint cp;
      cp.location = c;
      cp.locus = Locus::side;
      cp.id = static_cast<int>(s);
      cp.grad_residual = gmax > 0 ? d / gmax : 0.0;
      cands.push_back(cp);
    }
  }

  // Straight vertices behave like side points: critical iff u_t flips there.
  for (std::size_t v = 0; v < poly.size(); ++v) {
    if (corner(v)) continue;
    const auto& in = sides[poly.prev(v)];
    const auto& outs = sides[v];
    if (in.empty() || outs.empty()) continue;
    if ((in.back().second.d > 0) != (outs.front().first.d > 0)) {
      CriticalPoint cp;
      cp.location = poly.vertex(v);
      cp.locus = Locus::vertex;
      cp.id = static_cast<int>(v);
      cands.push_back(cp);
    }
  }

  if (out.degenerate) {
    out.warnings.push_back("rectangle-like degenerate: " + out.degenerate_note);
    return out;
  }

  // (iii) every corner vertex, classified through its Bessel coefficients.
  const auto expansions = vertex_expansions(sol, poly, sol.mu(), opt.fit, &out.warnings);
  std::vector<CriticalPoint> verts;
  for (std::size_t v = 0; v < poly.size(); ++v) {
    if (!corner(v)) continue;
    CriticalPoint cp;
    cp.location = poly.vertex(v);
    cp.locus = Locus::vertex;
    cp.id = static_cast<int>(v);
    if (expansions[v]) {
      const auto bi = bessel_vertex_index(*expansions[v], opt.coefficient_threshold, opt.unit_band);
      cp.bessel_k = bi.k;
      cp.bessel_a = bi.a;
      cp.bessel_index = bi.index;
      cp.coefficients = expansions[v]->c;
    }
    verts.push_back(cp);
  }

  std::vector<Vec2> all;
  for (const auto& c : cands) all.push_back(c.location);
  for (const auto& c : verts) all.push_back(c.location);

  auto classify = [&](CriticalPoint& cp, double min_radius = 0.0) {
    const auto ai = index_of(sol, cp, opt, all, min_radius);
    cp.arcs = ai.arcs;
    cp.arcs_half = ai.arcs_half;
    cp.probe_radius = ai.radius;
    cp.value = cp.locus == Locus::vertex && corner(static_cast<std::size_t>(cp.id))
                   ? x(m.vertex_node[static_cast<std::size_t>(cp.id)])
                   : sol.value(cp.location);
    return ai.index;
  };

  for (auto& cp : cands) {
    cp.index = classify(cp);
    cp.confidence = cp.index ? 1.0 : 0.0;
    if (cp.locus == Locus::interior && cp.index && *cp.index == 0) {
      ++out.merged;
      cp.id = -2;  // spurious: gradient nearly vanishes but the level set is regular
      continue;
    }
    const double d = detail::local_h(sol, cp.location);
    if (cp.locus == Locus::side) {
      const auto [tt, nn] = side_hessian(sol, static_cast<std::size_t>(cp.id), cp.location, d);
      cp.hess_tt = tt;
      cp.hess_nn = nn;
      const double ref = sol.mu() * umax;
      cp.nondegenerate = std::abs(tt) > 1e-3 * ref && std::abs(nn) > 1e-3 * ref;
    } else if (cp.locus == Locus::interior) {
      const auto [l1, l2] = interior_hessian(sol, cp.location, 0.5 * d);
      cp.hess_tt = l1;
      cp.hess_nn = l2;
      const double ref = sol.mu() * umax;
      cp.nondegenerate = std::abs(l1) > 1e-3 * ref && std::abs(l2) > 1e-3 * ref;
    }
    cp.is_extremum = cp.index && *cp.index == 1;
  }
  cands.erase(std::remove_if(cands.begin(), cands.end(), [](const auto& c) { return c.id == -2; }),
              cands.end());

  for (auto& cp : verts) {
    // On graded meshes 3 local h can be smaller than the absorption
    // distance; widen the disk so it holds the roots merged into this corner.
    double reach = 0.0;
    for (const auto& [side, p] : absorbed) {
      const auto nearest = std::min_element(verts.begin(), verts.end(), [&](const auto& a, const auto& b) {
        return distance(a.location, p) < distance(b.location, p);
      });
      if (nearest->id == cp.id) reach = std::max(reach, distance(p, cp.location));
    }
    cp.arc_index = classify(cp, 2.0 * reach);
    if (cp.bessel_index && cp.arc_index) {
      cp.index = cp.bessel_index;
      cp.confidence = *cp.bessel_index == *cp.arc_index ? 1.0 : 0.5;
      if (*cp.bessel_index != *cp.arc_index)
        out.warnings.push_back("vertex " + std::to_string(cp.id) + ": Bessel and arc indices disagree");
    } else {
      cp.index = cp.bessel_index ? cp.bessel_index : cp.arc_index;
      cp.confidence = cp.index ? 0.5 : 0.0;
    }
    cp.is_extremum = cp.index && *cp.index == 1;
    cp.nondegenerate = true;
  }

  // The arc count around a corner is the total index inside its probe disk.
  // When it differs from the corner's own index, the difference belongs to
  // a side critical point too close to the corner to separate on this mesh.
  // Non-vertex indices lie in {-1, 0, 1}, so a residual of r needs |r| side
  // points, taken nearest first and on different adjacent sides when possible.
  auto balance = [&](CriticalPoint& cp, int total, double radius) {
    const Vec2 v = cp.location;
    const int r = total - *cp.bessel_index;
    const auto need = static_cast<std::size_t>(std::abs(r));
    std::vector<std::size_t> near;
    for (std::size_t i = 0; i < absorbed.size(); ++i)
      if (distance(absorbed[i].second, v) <= radius) near.push_back(i);
    std::sort(near.begin(), near.end(), [&](auto a, auto b) {
      return distance(absorbed[a].second, v) < distance(absorbed[b].second, v);
    });
    std::vector<std::size_t> pick;
    for (std::size_t i : near)
      if (pick.size() < need && std::none_of(pick.begin(), pick.end(), [&](auto j) {
            return absorbed[j].first == absorbed[i].first;
          }))
        pick.push_back(i);
    for (std::size_t i : near)
      if (pick.size() < need && std::find(pick.begin(), pick.end(), i) == pick.end()) pick.push_back(i);
    if (pick.empty()) return;
    const bool complete = pick.size() == need;
    for (std::size_t i : pick) {
      CriticalPoint sp;
      sp.location = absorbed[i].second;
      sp.locus = Locus::side;
      sp.id = static_cast<int>(absorbed[i].first);
      if (complete) sp.index = r > 0 ? 1 : -1;
      sp.is_extremum = sp.index && *sp.index == 1;
      sp.value = sol.value(sp.location);
      sp.confidence = complete ? 0.5 : 0.0;
      sp.grad_residual = gmax > 0 ? norm(sol.gradient(sp.location)) / gmax : 0.0;
      sp.note = "index from the total-index balance at vertex " + std::to_string(cp.id);
      cands.push_back(sp);
    }
    cp.confidence = 0.75;
    std::sort(pick.rbegin(), pick.rend());
    for (std::size_t i : pick) absorbed.erase(absorbed.begin() + static_cast<std::ptrdiff_t>(i));
    out.merged -= pick.size();
    std::erase_if(out.warnings, [&](const std::string& w) {
      return w == "vertex " + std::to_string(cp.id) + ": Bessel and arc indices disagree";
    });
  };
  for (auto& cp : verts)
    if (cp.bessel_index && cp.arc_index && *cp.bessel_index != *cp.arc_index) balance(cp, *cp.arc_index, cp.probe_radius);

  // Inconsistent counts at r and r/2 mean a side root sits between the two
  // circles. The outer count is then the total index of the disk, provided
  // the inner disk holds the corner alone and its count confirms the Bessel
  // index. Otherwise the nearest root stays in the set with an unknown index.
  for (auto& cp : verts) {
    if (cp.arc_index) continue;
    const Vec2 v = cp.location;
    auto it = std::min_element(absorbed.begin(), absorbed.end(), [&](const auto& a, const auto& b) {
      return distance(a.second, v) < distance(b.second, v);
    });
    const double r = cp.probe_radius;
    if (it == absorbed.end() || distance(it->second, v) > r) continue;
    if (cp.bessel_index && cp.arcs >= 0 && cp.arcs_half >= 0 && 1 - cp.arcs_half == *cp.bessel_index) {
      bool inner = false, band = false, edge = false;
      for (const auto& a : absorbed) {
        const double d = distance(a.second, v);
        inner = inner || d < 0.4 * r;
        band = band || (d >= 0.4 * r && d <= 0.9 * r);
        edge = edge || (d > 0.9 * r && d <= 1.1 * r);
      }
      if (band && !inner && !edge) {
        const int total = 1 - cp.arcs;
        cp.arc_index = total;
        balance(cp, total, r);
        continue;
      }
    }
    CriticalPoint sp;
    sp.location = it->second;
    sp.locus = Locus::side;
    sp.id = static_cast<int>(it->first);
    sp.value = sol.value(sp.location);
    sp.grad_residual = gmax > 0 ? norm(sol.gradient(sp.location)) / gmax : 0.0;
    sp.note = "unresolved: next to vertex " + std::to_string(cp.id) + " with inconsistent arc counts";
    cands.push_back(sp);
    absorbed.erase(it);
    --out.merged;
  }

  // Graded meshes shrink the corner probe below the absorption distance, so a
  // root can be absorbed yet sit outside every corner's disk. Such roots are
  // classified on their own.
  for (const auto& [side, p] : absorbed) {
    const bool covered = std::any_of(verts.begin(), verts.end(), [&](const auto& cp) {
      return distance(cp.location, p) <= cp.probe_radius;
    });
    if (covered) continue;
    CriticalPoint sp;
    sp.location = p;
    sp.locus = Locus::side;
    sp.id = static_cast<int>(side);
    sp.index = classify(sp);
    sp.confidence = sp.index ? 0.75 : 0.0;
    sp.is_extremum = sp.index && *sp.index == 1;
    sp.grad_residual = gmax > 0 ? norm(sol.gradient(p)) / gmax : 0.0;
    sp.note = "outside the corner probe disk";
    cands.push_back(sp);
    --out.merged;
  }

  out.points = std::move(verts);
  out.points.insert(out.points.end(), cands.begin(), cands.end());
  return out;
}

struct IndexFormula {
  int lhs = 2;
  int rhs = 0;
  bool resolved = false;
  bool pass = false;
};

/// 2 chi(P) = sum over interior points of 2 ind + sum over boundary points of ind.
inline IndexFormula verify_index_formula(const CriticalSet& cs) {
  IndexFormula f;
  if (cs.degenerate || !cs.all_resolved()) return f;
  f.resolved = true;
  for (const auto& p : cs.points) f.rhs += (p.locus == Locus::interior ? 2 : 1) * *p.index;
  f.pass = f.rhs == f.lhs;
  return f;
}

struct CuspDiagnostic {
  bool tangent_cusp = false;
  int k = 0;              ///< odd exponent estimate
  double k_raw = 0.0;     ///< unrounded log-log slope
  double normal_coef = 0.0;
  double residual = 0.0;  ///< relative misfit of the power law along the side
};

/// Model u - u(p) ~ c (y^2 - x^k rho) in the side frame at an index-0 side
/// point: the exponent k comes from a log-log fit of u along the side and c
/// from the quadratic behaviour along the inward normal.
template <ScalarSource F>
CuspDiagnostic cusp_diagnostic(const F& u, const Polygon& poly, std::size_t side, Vec2 p, double r,
                               int samples = 256) {
  const auto [a0, a1] = side_arc_range(poly, side);
  const auto ai = arc_index(u, p, Locus::side, r, a0, a1, samples);
  if (!ai.index || *ai.index != 0)
    throw Error(ErrorCode::precondition, "cusp diagnostic needs an index-0 side point");
  const Vec2 tau = poly.side_tangent(side), nin = -poly.side_normal(side);
  const double u0 = u.value(p);

  // Along the side use the branch with the larger response.
  std::vector<double> lx, ly;
  for (int sgn : {1, -1}) {
    std::vector<double> xs, ys;
    for (int i = 1; i <= 12; ++i) {
      const double s = r * std::pow(0.5, 0.25 * i);
      const double d = std::abs(u.value(p + tau * (sgn * s)) - u0);
      if (d <= 0.0) continue;
      xs.push_back(std::log(s));
      ys.push_back(std::log(d));
    }
    if (xs.size() > lx.size() ||
        (xs.size() == lx.size() && !ys.empty() && !ly.empty() && ys.front() > ly.front())) {
      lx = xs;
      ly = ys;
    }
  }
  CuspDiagnostic out;
  if (lx.size() < 4) return out;
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  double res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) res = std::max(res, std::abs(icpt + slope * lx[i] - ly[i]));
  out.k_raw = slope;
  out.residual = res;
  int k = static_cast<int>(std::lround(slope));
  if (k % 2 == 0) k += (slope > k) ? 1 : -1;
  out.k = k;
  const double y = 0.5 * r;
  out.normal_coef = (u.value(p + nin * y) - u0) / (y * y);
  out.tangent_cusp = k >= 3 && std::abs(slope - k) < 0.25 && res < 0.1 && std::abs(out.normal_coef) > 0.0;
  return out;
}

}  // namespace hotspots
