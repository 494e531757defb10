#pragma once

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hotspots/bessel.hpp"
#include "hotspots/critical.hpp"
#include "hotspots/eigensolver.hpp"
#include "hotspots/field.hpp"
#include "hotspots/geometry.hpp"

namespace hotspots {

struct NodalNode {
  Vec2 p;
  int degree = 0;
  Locus locus = Locus::interior;
  int id = -1;  ///< side or vertex id for boundary nodes
};

struct NodalEdge {
  std::vector<Vec2> points;
  int from = -1, to = -1;  ///< node ids; -1 for closed loops
  bool closed = false;
  bool boundary_lying = false;  ///< a side contained in the zero set
  int side = -1;
};

struct NodalGraph {
  FieldKind field;
  bool vanishes = false;  ///< field below the zero floor everywhere; nothing traced
  double field_scale = 0.0;
  std::vector<NodalNode> nodes;
  std::vector<NodalEdge> edges;

  std::size_t interior_edge_count() const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [](const auto& e) { return !e.boundary_lying; }));
  }
};

/// Degree-1 nodes with their boundary locus.
inline std::vector<NodalNode> degree_one_vertices(const NodalGraph& g) {
  std::vector<NodalNode> out;
  for (const auto& n : g.nodes)
    if (n.degree == 1) out.push_back(n);
  return out;
}

struct NodalOptions {
  double side_parallel_tol = 1e-9;  ///< |dir . tau| below this marks a side as boundary-lying
  double boundary_offset = 0.25;    ///< inward offset (in local h) for values on boundary-lying sides
  double vertex_snap = 0.25;        ///< crossings this close to a corner (in sub-edge lengths) attach to it
  double zero_floor = 1e-2;         ///< relative to max|grad u| times the largest |direction|
};

namespace detail {

inline double field_at_dof(const EigenSolution& sol, const FieldKind& kind, std::size_t d,
                           const std::vector<char>& lying, const NodalOptions& opt) {
  const DofMap& dofs = sol.dofs();
  if (kind.tag == FieldKind::Tag::value) return sol.coefficients()(static_cast<Eigen::Index>(d));
  const Vec2 p = dofs.coords[d];
  const Polygon& poly = sol.polygon();
  const int side = dofs.side[d], vert = dofs.vertex[d];
  auto inside_value = [&](const Vec2& q) { return dot(kind.direction_at(q), sol.gradient(q)); };
  const double hl = sol.mesh().size(p);
  if (vert >= 0) {
    // The gradient is singular or zero at a corner; use a point just inside.
    const Sector sec = poly.sector(static_cast<std::size_t>(vert));
    const Vec2 q = sec.point(opt.boundary_offset * hl, 0.5 * sec.beta);
    return inside_value(q);
  }
  if (side >= 0) {
    const auto s = static_cast<std::size_t>(side);
    if (lying[s]) {
      // Near a sharp corner the inward step can leave the domain through the other side.
      double off = opt.boundary_offset * hl;
      Vec2 q = p - poly.side_normal(s) * off;
      for (int i = 0; i < 30 && !sol.contains(q); ++i) {
        off *= 0.5;
        q = p - poly.side_normal(s) * off;
      }
      return inside_value(q);
    }
    // Neumann: only the tangential part of the gradient survives on the side.
    const Vec2 tau = poly.side_tangent(s);
    return dot(kind.direction_at(p), tau) * dot(sol.recovered_gradient()[d], tau);
  }
  return kind.apply(p, 0.0, sol.recovered_gradient()[d]);
}

}  // namespace detail

/// Zero set of u, L_psi u or R_w u by marching triangles on the quadratic
/// sub-triangulation (each element split into four).
inline NodalGraph trace(const EigenSolution& sol, const FieldKind& kind, const NodalOptions& opt = {}) {
  const Polygon& poly = sol.polygon();
  const DofMap& dofs = sol.dofs();
  NodalGraph g;
  g.field = kind;

  std::vector<char> lying(poly.size(), 0);
  if (kind.tag == FieldKind::Tag::directional) {
    const Vec2 dir = kind.direction_at({});
    for (std::size_t s = 0; s < poly.size(); ++s)
      lying[s] = std::abs(dot(dir, poly.side_tangent(s))) < opt.side_parallel_tol;
  }

  std::vector<double> f(dofs.size());
  double fmax = 0.0, dmax = 0.0;
  for (std::size_t d = 0; d < dofs.size(); ++d) {
    f[d] = detail::field_at_dof(sol, kind, d, lying, opt);
    fmax = std::max(fmax, std::abs(f[d]));
    if (kind.tag != FieldKind::Tag::value) dmax = std::max(dmax, norm(kind.direction_at(dofs.coords[d])));
  }
  g.field_scale = fmax;
  if (kind.tag != FieldKind::Tag::value && fmax < opt.zero_floor * detail::max_gradient(sol) * dmax) {
    g.vanishes = true;
    return g;
  }

  struct Crossing {
    Vec2 p;
    std::vector<int> segs;
    bool boundary = false;
    int side = -1;
    int vertex = -1;
  };
  std::unordered_map<std::uint64_t, int> key_to_crossing;
  std::vector<Crossing> cross;
  std::vector<std::array<int, 2>> segs;

  const double diam = poly.diameter();
  auto crossing = [&](int a, int b) {
    const auto key = detail::edge_key(a, b);
    auto it = key_to_crossing.find(key);
    if (it != key_to_crossing.end()) return it->second;
    const double fa = f[a], fb = f[b];
    const double t = fa / (fa - fb);
    Crossing c;
    c.p = lerp(dofs.coords[a], dofs.coords[b], t);
    if (dofs.on_boundary(a) && dofs.on_boundary(b)) {
      const Vec2 mid = (dofs.coords[a] + dofs.coords[b]) * 0.5;
      if (poly.distance_to_boundary(mid) < 1e-9 * diam) {
        c.boundary = true;
        c.side = static_cast<int>(poly.nearest_side(mid));
        const double len = distance(dofs.coords[a], dofs.coords[b]);
        for (int e : {a, b})
          if (dofs.vertex[e] >= 0 && distance(c.p, dofs.coords[e]) < opt.vertex_snap * len) c.vertex = dofs.vertex[e];
      }
    }
    const int id = static_cast<int>(cross.size());
    cross.push_back(c);
    key_to_crossing.emplace(key, id);
    return id;
  };

  static constexpr int sub[4][3] = {{0, 3, 5}, {3, 1, 4}, {5, 4, 2}, {3, 4, 5}};
  for (const auto& cell : dofs.cells) {
    for (const auto& st : sub) {
      const int d[3] = {cell[st[0]], cell[st[1]], cell[st[2]]};
      const bool pos[3] = {f[d[0]] >= 0, f[d[1]] >= 0, f[d[2]] >= 0};
      if (pos[0] == pos[1] && pos[1] == pos[2]) continue;
      int ends[2], n = 0;
      for (int k = 0; k < 3; ++k) {
        const int a = d[k], b = d[(k + 1) % 3];
        if (pos[k] != pos[(k + 1) % 3]) ends[n++] = crossing(a, b);
      }
      const int sid = static_cast<int>(segs.size());
      segs.push_back({ends[0], ends[1]});
      cross[ends[0]].segs.push_back(sid);
      cross[ends[1]].segs.push_back(sid);
    }
  }

  // Chain segments into polylines, starting from open ends.
  std::vector<char> used(segs.size(), 0);
  auto walk = [&](int start_cross, int first_seg) {
    std::vector<int> chain{start_cross};
    int cur = start_cross, seg = first_seg;
    while (seg >= 0 && !used[seg]) {
      used[seg] = 1;
      const int nxt = segs[seg][0] == cur ? segs[seg][1] : segs[seg][0];
      chain.push_back(nxt);
      cur = nxt;
      seg = -1;
      for (int s2 : cross[cur].segs)
        if (!used[s2]) {
          seg = s2;
          break;
        }
    }
    return chain;
  };
  auto add_node = [&](int c) {
    NodalNode n;
    n.p = cross[c].p;
    n.degree = 1;
    if (cross[c].vertex >= 0) {
      n.locus = Locus::vertex;
      n.id = cross[c].vertex;
    } else if (cross[c].boundary) {
      n.locus = Locus::side;
      n.id = cross[c].side;
    }
    g.nodes.push_back(n);
    return static_cast<int>(g.nodes.size()) - 1;
  };

  for (int c = 0; c < static_cast<int>(cross.size()); ++c) {
    if (cross[c].segs.size() != 1 || used[cross[c].segs[0]]) continue;
    const auto chain = walk(c, cross[c].segs[0]);
    NodalEdge e;
    for (int k : chain) e.points.push_back(cross[k].p);
    e.from = add_node(chain.front());
    e.to = add_node(chain.back());
    g.edges.push_back(std::move(e));
  }
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    if (used[s]) continue;
    const auto chain = walk(segs[s][0], s);
    NodalEdge e;
    for (int k : chain) e.points.push_back(cross[k].p);
    e.closed = true;
    g.edges.push_back(std::move(e));
  }
  for (std::size_t s = 0; s < poly.size(); ++s) {
    if (!lying[s]) continue;
    NodalEdge e;
    const auto [A, B] = poly.side(s);
    e.points = {A, B};
    e.boundary_lying = true;
    e.side = static_cast<int>(s);
    g.edges.push_back(std::move(e));
  }
  return g;
}

struct SimpleArcCheck {
  bool ok = false;
  std::string reason;
};

/// Z(u) on a simply connected polygon should be one open arc whose two ends
/// sit on different sides. An end at a corner counts for both adjacent sides.
inline SimpleArcCheck check_simple_arc(const NodalGraph& g, const Polygon& poly) {
  SimpleArcCheck out;
  std::vector<const NodalEdge*> inner;
  for (const auto& e : g.edges)
    if (!e.boundary_lying) inner.push_back(&e);
  if (inner.size() != 1) {
    out.reason = std::to_string(inner.size()) + " components";
    return out;
  }
  if (inner[0]->closed) {
    out.reason = "closed loop";
    return out;
  }
  const auto sides_of = [&](const NodalNode& n) -> std::vector<int> {
    if (n.locus == Locus::vertex) return {static_cast<int>(poly.prev(static_cast<std::size_t>(n.id))), n.id};
    if (n.locus == Locus::side) return {n.id};
    return {};
  };
  const auto a = sides_of(g.nodes[static_cast<std::size_t>(inner[0]->from)]);
  const auto b = sides_of(g.nodes[static_cast<std::size_t>(inner[0]->to)]);
  if (a.empty() || b.empty()) {
    out.reason = "arc end off the boundary";
    return out;
  }
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) {
      out.reason = "both ends on side " + std::to_string(x);
      return out;
    }
  out.ok = true;
  return out;
}

/// Fraction of polyline segments whose two sides (at +/- offset along the
/// segment normal) carry opposite signs of the field.
inline double sign_consistency(const EigenSolution& sol, const NodalGraph& g, double offset) {
  std::size_t ok = 0, total = 0;
  for (const auto& e : g.edges) {
    if (e.boundary_lying) continue;
    for (std::size_t i = 0; i + 1 < e.points.size(); ++i) {
      const Vec2 a = e.points[i], b = e.points[i + 1];
      if (distance(a, b) < 1e-12) continue;
      const Vec2 mid = (a + b) * 0.5, n = perp(normalized(b - a));
      const Vec2 p = mid + n * offset, q = mid - n * offset;
      if (!sol.contains(p) || !sol.contains(q)) continue;
      ++total;
      const double fp = evaluate_field(sol, g.field, p), fq = evaluate_field(sol, g.field, q);
      ok += (fp > 0) != (fq > 0);
    }
  }
  return total ? static_cast<double>(ok) / static_cast<double>(total) : 1.0;
}

/// Smallest |grad u| over the points of all interior polylines.
inline double min_gradient_along(const EigenSolution& sol, const NodalGraph& g) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : g.edges) {
    if (e.boundary_lying) continue;
    for (const auto& p : e.points) m = std::min(m, norm(sol.gradient(p)));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Arcs ending at a vertex

struct SectorCriterion {
  std::optional<bool> verdict;  ///< empty when inconclusive
  bool boundary_lying = false;  ///< psi sits on an interval endpoint
  double margin = 0.0;          ///< signed angular distance to the interval boundary
  bool c0_dominant = false;
};

/// Membership of psi (vertex frame) in the closed interval [lo, hi] mod pi.
inline double interval_margin_mod_pi(double psi, double lo, double hi) {
  double x = std::fmod(psi - lo, pi);
  if (x < 0) x += pi;
  const double w = hi - lo;
  if (x <= w) return std::min(x, w - x);
  return -std::min(x - w, pi - x);
}

/// Analytic criterion for an arc of Z(L_psi u) ending at a vertex of angle beta:
/// with c0 dominant, psi in [pi/2, pi/2 + beta] mod pi; with c1 dominant,
/// psi between beta - pi/2 and pi/2 mod pi. Endpoints are boundary-lying.
inline SectorCriterion sector_criterion(double beta, bool c0_nonzero, bool c1_nonzero, double psi_local,
                                        double endpoint_tol = 1e-9) {
  SectorCriterion out;
  double lo, hi;
  // Without c1 on a reflex corner the c2 mode outgrows c0 near the apex, a
  // case the interval criteria do not cover.
  if (c0_nonzero && (beta < 0.5 * pi - 1e-12 || (!c1_nonzero && beta < pi))) {
    out.c0_dominant = true;
    lo = 0.5 * pi;
    hi = 0.5 * pi + beta;
  } else if (c1_nonzero && std::abs(beta - 0.5 * pi) > 1e-12) {
    lo = std::min(0.5 * pi, beta - 0.5 * pi);
    hi = std::max(0.5 * pi, beta - 0.5 * pi);
  } else {
    return out;
  }
  out.margin = interval_margin_mod_pi(psi_local, lo, hi);
  if (std::abs(out.margin) <= endpoint_tol) {
    out.boundary_lying = true;
    out.verdict = false;
    return out;
  }
  out.verdict = out.margin > 0;
  return out;
}

struct GeometricArc {
  bool ends_at_vertex = false;
  int changes = 0;        ///< sign changes at the outer radius
  int changes_half = 0;   ///< and at half of it
  double margin = 0.0;    ///< angular distance of the crossing from the sector sides
  bool consistent = true; ///< both radii agree
};

/// Sign changes of the field along arcs of radius r and r/2 inside the sector.
/// Crossings within `edge_band` of a sector side count as boundary-lying.
template <ScalarSource F>
GeometricArc geometric_arc(const F& src, const Sector& sec, const FieldKind& kind, double r,
                           int samples = 256, double edge_band = 0.02) {
  auto scan = [&](double rad, double& margin) {
    std::vector<double> th, val;
    for (int i = 0; i <= samples; ++i) {
      const double t = sec.beta * static_cast<double>(i) / samples;
      th.push_back(t);
      val.push_back(evaluate_field(src, kind, sec.point(rad, t)));
    }
    double scale = 0.0;
    for (double v : val) scale = std::max(scale, std::abs(v));
    int n = 0;
    margin = -1.0;
    int last = 0;
    double last_t = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) {
      if (std::abs(val[i]) <= 1e-12 * scale) continue;
      const int s = val[i] > 0 ? 1 : -1;
      if (last != 0 && s != last) {
        const double tc = 0.5 * (last_t + th[i]);
        const double m = std::min(tc, sec.beta - tc);
        if (m > edge_band) {
          ++n;
          margin = std::max(margin, m);
        }
      }
      last = s;
      last_t = th[i];
    }
    return n;
  };
  GeometricArc out;
  double m1 = 0, m2 = 0;
  out.changes = scan(r, m1);
  out.changes_half = scan(0.5 * r, m2);
  out.consistent = out.changes == out.changes_half;
  out.ends_at_vertex = out.changes > 0 && out.changes_half > 0;
  out.margin = std::min(m1, m2);
  return out;
}

struct ArcVerdict {
  std::optional<bool> geometric;
  std::optional<bool> analytic;
  SectorCriterion criterion;
  GeometricArc geo;
  bool agree = false;
  bool inconclusive = false;
};

/// Effective direction angle (vertex frame) of the field near the vertex.
/// R_w acts like L_psi with psi = phi + pi/2, phi the polar angle of w.
inline std::optional<double> local_direction(const Sector& sec, const FieldKind& kind, double edge_tol = 1e-9) {
  if (kind.tag == FieldKind::Tag::directional) return kind.psi - sec.frame_angle;
  if (kind.tag == FieldKind::Tag::rotational) {
    const Vec2 q = sec.to_local(kind.center);
    if (norm(q) == 0.0) return std::nullopt;
    const double phi = std::atan2(q.y, q.x);
    // w on the boundary of the sector (or its opposite cone) is left open.
    const double a = wrap_pi(phi), b = wrap_pi(phi - sec.beta);
    if (std::min({std::abs(a), pi - std::abs(a), std::abs(b), pi - std::abs(b)}) < edge_tol) return std::nullopt;
    return phi + 0.5 * pi;
  }
  return std::nullopt;
}

/// Both decisions for a field source with known leading coefficients.
template <ScalarSource F>
ArcVerdict arc_ends_at_vertex(const F& src, const Sector& sec, const FieldKind& kind, double c0_ratio,
                              double c1_ratio, double r, double threshold = 1e-3, int samples = 256) {
  ArcVerdict out;
  out.geo = geometric_arc(src, sec, kind, r, samples);
  if (out.geo.consistent) out.geometric = out.geo.ends_at_vertex;
  if (const auto psi = local_direction(sec, kind)) {
    out.criterion = sector_criterion(sec.beta, c0_ratio >= threshold, c1_ratio >= threshold, *psi);
    out.analytic = out.criterion.verdict;
  }
  out.agree = out.geometric && out.analytic && *out.geometric == *out.analytic;
  out.inconclusive = !out.geometric || !out.analytic || !out.agree;
  return out;
}

/// Vertex of a computed solution: coefficients are fitted, the geometric
/// radius is the inner radius of the fit annulus.
inline ArcVerdict arc_ends_at_vertex(const EigenSolution& sol, const FieldKind& kind, std::size_t vertex,
                                     const FitOptions& fit = {}, double threshold = 1e-3) {
  const Polygon& poly = sol.polygon();
  if (std::abs(poly.angle(vertex) - 0.5 * pi) < 1e-9)
    throw Error(ErrorCode::precondition, "arc criterion is undefined at a right angle");
  const auto e = fit_coefficients(sol, poly, vertex, sol.mu(), fit);
  const double c0 = e.scale > 0 ? std::abs(e.c[0]) / e.scale : 0.0;
  const double c1 = e.c.size() > 1 ? coefficient_weight(e, 1) : 0.0;
  return arc_ends_at_vertex(sol, poly.sector(vertex), kind, c0, c1, e.annulus.r_in, threshold);
}

/// Corners (angle != pi) where some side-direction field L_e u has a nodal
/// arc ending, decided by the analytic criterion on fitted coefficients.
inline std::vector<std::size_t> side_direction_arc_vertices(const Polygon& poly,
                                                            const std::vector<std::optional<BesselExpansion>>& ex,
                                                            double threshold = 1e-3) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < poly.size(); ++v) {
    if (poly.is_straight(v) || !ex[v]) continue;
    const auto& e = *ex[v];
    const bool c0 = e.scale > 0 && std::abs(e.c[0]) / e.scale >= threshold;
    const bool c1 = e.c.size() > 1 && coefficient_weight(e, 1) >= threshold;
    const Sector sec = poly.sector(v);
    for (std::size_t s = 0; s < poly.size(); ++s) {
      const auto crit = sector_criterion(sec.beta, c0, c1, poly.side_direction(s) - sec.frame_angle, 1e-7);
      if (crit.verdict && *crit.verdict) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

}  // namespace hotspots
