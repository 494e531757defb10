#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hotspots/critical.hpp"
#include "hotspots/eigensolver.hpp"
#include "hotspots/geometry.hpp"
#include "hotspots/mesh.hpp"
#include "hotspots/nodal.hpp"

namespace hotspots {

struct TrackOptions {
  double h = 0.04;  ///< absolute target element size
  MeshOptions mesh;
  SolverOptions solver;
  CriticalOptions critical;
  std::size_t steps = 64;
  int max_halvings = 5;
  double match_radius = 5.0;  ///< in h; also the tracking-disk radius
  double move_limit = 3.0;    ///< in h
  double gap_floor = 1e-5;
  double threshold = 1e-3;  ///< leading-coefficient vanishing threshold
};

struct SampleRecord {
  double t = 0.0;
  Polygon polygon;
  double mu = 0.0;
  double gap = 0.0;
  int multiplicity = 1;
  double overlap = 1.0;  ///< correlation with the previous accepted sample
  CriticalSet critical;
  IndexFormula formula;
  std::size_t S = 0;
  std::size_t V = 0;
  std::vector<std::size_t> arc_vertices;
  std::vector<double> c0_ratio, c1_ratio;  ///< NaN at straight or unfitted vertices
  std::vector<std::pair<std::size_t, CuspDiagnostic>> cusps;  ///< keyed by point position in `critical`
};

struct PathEvent {
  enum class Kind { index_sum, appearance, disappearance, large_move, vertex_approach, small_gap, unresolved };
  Kind kind;
  double t0 = 0.0, t1 = 0.0;
  std::string detail;
};

inline const char* to_string(PathEvent::Kind k) {
  switch (k) {
    case PathEvent::Kind::index_sum: return "index-sum";
    case PathEvent::Kind::appearance: return "appearance";
    case PathEvent::Kind::disappearance: return "disappearance";
    case PathEvent::Kind::large_move: return "large-move";
    case PathEvent::Kind::vertex_approach: return "vertex-approach";
    case PathEvent::Kind::small_gap: return "small-gap";
    case PathEvent::Kind::unresolved: return "unresolved";
  }
  return "unknown";
}

struct PathRun {
  DeformationPath path;
  std::vector<SampleRecord> samples;
  std::vector<PathEvent> events;
  std::size_t rejected_steps = 0;

  std::size_t count(PathEvent::Kind k) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [&](const auto& e) { return e.kind == k; }));
  }
};

/// Flip (or, for a double eigenvalue, rotate within the eigenspace) `next`
/// to best match `prev` at the mesh nodes of `next` that lie in both domains.
/// Returns the correlation after alignment.
inline double align_to(EigenSolution& next, const EigenSolution& prev) {
  const auto& coords = next.dofs().coords;
  std::vector<std::size_t> ids;
  std::vector<double> target;
  for (std::size_t i = 0; i < next.dofs().node_count; ++i) {
    const auto hit = prev.locate_if(coords[i]);
    if (!hit) continue;
    ids.push_back(i);
    target.push_back(prev.value_in(hit->triangle, hit->bary));
  }
  if (ids.empty()) return 0.0;
  auto corr = [&](const Eigen::VectorXd& x) {
    double s = 0, a = 0, b = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const double v = x(static_cast<Eigen::Index>(ids[k]));
      s += v * target[k];
      a += v * v;
      b += target[k] * target[k];
    }
    return a > 0 && b > 0 ? s / std::sqrt(a * b) : 0.0;
  };
  if (next.multiplicity == 2 && next.basis.size() == 2) {
    // Least-squares combination of the two basis vectors.
    Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
    Eigen::Vector2d r = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(ids[k]);
      const Eigen::Vector2d b(next.basis[0](i), next.basis[1](i));
      G += b * b.transpose();
      r += b * target[k];
    }
    const Eigen::Vector2d c = G.ldlt().solve(r);
    if (c.allFinite() && c.norm() > 0) {
      next.set_coefficients(c(0) * next.basis[0] + c(1) * next.basis[1]);
      next.normalize_max();
    }
  }
  const double c = corr(next.coefficients());
  if (c < 0) {
    next.negate();
    return -c;
  }
  return c;
}

namespace detail {

inline SampleRecord make_record(double t, const EigenSolution& sol, const TrackOptions& opt) {
  SampleRecord r;
  r.t = t;
  r.polygon = sol.polygon();
  r.mu = sol.mu();
  r.gap = sol.relative_gap;
  r.multiplicity = sol.multiplicity;
  r.critical = find_critical_points(sol, opt.critical);
  r.formula = verify_index_formula(r.critical);
  r.S = r.critical.nonzero_count();
  const Polygon& poly = sol.polygon();
  const auto ex = vertex_expansions(sol, poly, sol.mu(), opt.critical.fit);
  r.arc_vertices = side_direction_arc_vertices(poly, ex, opt.threshold);
  r.V = r.arc_vertices.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.c0_ratio.assign(poly.size(), nan);
  r.c1_ratio.assign(poly.size(), nan);
  for (std::size_t v = 0; v < poly.size(); ++v) {
    if (!ex[v]) continue;
    const auto& e = *ex[v];
    if (e.scale > 0) r.c0_ratio[v] = std::abs(e.c[0]) / e.scale;
    if (e.c.size() > 1) r.c1_ratio[v] = coefficient_weight(e, 1);
  }
  for (std::size_t k = 0; k < r.critical.points.size(); ++k) {
    const auto& p = r.critical.points[k];
    if (p.locus != Locus::side || !p.index || *p.index != 0) continue;
    try {
      r.cusps.emplace_back(k, cusp_diagnostic(sol, poly, static_cast<std::size_t>(p.id), p.location,
                                              p.probe_radius));
    } catch (const Error&) {
    }
  }
  return r;
}

/// Position used for tracking: corners are followed by id, so a vertex point
/// of `b` is placed where that vertex sits in `a`.
inline Vec2 tracked_position(const CriticalPoint& p, const Polygon& frame) {
  return p.locus == Locus::vertex ? frame.vertex(static_cast<std::size_t>(p.id)) : p.location;
}

struct StepIssue {
  PathEvent::Kind kind;
  std::string detail;
  bool refine = true;
};

inline std::vector<StepIssue> compare_samples(const SampleRecord& a, const SampleRecord& b, const TrackOptions& opt) {
  std::vector<StepIssue> out;
  const double R = opt.match_radius * opt.h, move = opt.move_limit * opt.h;
  if (b.gap < opt.gap_floor || a.multiplicity != b.multiplicity)
    out.push_back({PathEvent::Kind::small_gap, "relative gap " + std::to_string(b.gap)});
  if (!a.formula.pass || !b.formula.pass) {
    out.push_back({PathEvent::Kind::unresolved, b.formula.resolved ? "index formula fails" : "critical set not fully resolved"});
    return out;
  }
  const auto& pa = a.critical.points;
  const auto& pb = b.critical.points;
  std::vector<char> used(pb.size(), 0);
  auto flattened = [](const CriticalPoint& p, const Polygon& other) {
    return p.locus == Locus::vertex && p.index && *p.index == 0 && other.is_straight(static_cast<std::size_t>(p.id));
  };
  for (const auto& p : pa) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pb.size(); ++j) {
      if (used[j] || pb[j].index != p.index) continue;
      if ((p.locus == Locus::vertex) != (pb[j].locus == Locus::vertex)) continue;
      if (p.locus == Locus::vertex) {
        if (pb[j].id != p.id) continue;
        best = static_cast<int>(j);
        bd = 0.0;
        break;
      }
      const double d = distance(p.location, pb[j].location);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(j);
      }
    }
    if (best < 0 || bd > R) {
      // A corner flattening out takes its index-0 vertex point with it.
      if (flattened(p, b.polygon)) continue;
      out.push_back({PathEvent::Kind::disappearance,
                     std::string(to_string(p.locus)) + " point of index " + std::to_string(*p.index)});
      continue;
    }
    used[static_cast<std::size_t>(best)] = 1;
    if (bd > move) out.push_back({PathEvent::Kind::large_move, "moved " + std::to_string(bd)});
  }
  for (std::size_t j = 0; j < pb.size(); ++j)
    if (!used[j] && !flattened(pb[j], a.polygon))
      out.push_back({PathEvent::Kind::appearance,
                     std::string(to_string(pb[j].locus)) + " point of index " + std::to_string(*pb[j].index)});

  // Total index over disks around every tracked point.
  auto disk_sum = [&](const std::vector<CriticalPoint>& pts, const Vec2& c) {
    int s = 0;
    for (const auto& q : pts)
      if (distance(tracked_position(q, a.polygon), c) <= R) s += *q.index;
    return s;
  };
  std::vector<Vec2> centres;
  for (const auto& p : pa) centres.push_back(tracked_position(p, a.polygon));
  for (const auto& p : pb) centres.push_back(tracked_position(p, a.polygon));
  for (const auto& c : centres) {
    const int sa = disk_sum(pa, c), sb = disk_sum(pb, c);
    if (sa != sb) {
      out.push_back({PathEvent::Kind::index_sum, "disk at (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                                                     "): " + std::to_string(sa) + " -> " + std::to_string(sb)});
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Solve along the path with sign alignment, step halving on inconsistency,
/// and events for whatever persists at the step floor.
inline PathRun track(const DeformationPath& path, const TrackOptions& opt = {}) {
  if (!(opt.h > 0) || opt.steps == 0) throw Error(ErrorCode::invalid_input, "track needs h > 0 and steps > 0");
  PathRun run;
  run.path = path;
  auto solve_at = [&](double t) { return solve_polygon(path.at(t), opt.h, opt.mesh, opt.solver); };

  EigenSolution prev = solve_at(0.0);
  run.samples.push_back(detail::make_record(0.0, prev, opt));
  const double dt = 1.0 / static_cast<double>(opt.steps);
  const double step_floor = std::ldexp(dt, -opt.max_halvings);
  double t = 0.0;
  while (t < 1.0 - 1e-12) {
    const double grid_next = std::min(1.0, (std::floor(t / dt + 1e-9) + 1.0) * dt);
    double step = grid_next - t;
    for (int halvings = 0;; ++halvings) {
      const double tn = std::min(1.0, t + step);
      EigenSolution next = solve_at(tn);
      const double overlap = align_to(next, prev);
      SampleRecord rec = detail::make_record(tn, next, opt);
      rec.overlap = overlap;
      const auto issues = detail::compare_samples(run.samples.back(), rec, opt);
      const bool refine =
          std::any_of(issues.begin(), issues.end(), [](const auto& i) { return i.refine; });
      if (refine && halvings < opt.max_halvings && 0.5 * step >= step_floor * (1.0 - 1e-9)) {
        step *= 0.5;
        ++run.rejected_steps;
        continue;
      }
      for (const auto& i : issues) run.events.push_back({i.kind, t, tn, i.detail});
      for (const auto& p : rec.critical.points) {
        if (p.locus == Locus::vertex) continue;
        for (std::size_t v : rec.polygon.corner_indices())
          if (distance(p.location, rec.polygon.vertex(v)) < 2.0 * opt.h) {
            run.events.push_back({PathEvent::Kind::vertex_approach, t, tn,
                                  "within 2h of vertex " + std::to_string(v)});
            break;
          }
      }
      run.samples.push_back(std::move(rec));
      prev = std::move(next);
      t = tn;
      break;
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Lip-1 polygons

struct Lip1Verdict {
  bool pass = false;
  bool start_ok = false, end_ok = false;
  std::size_t samples_ok = 0;  ///< samples whose critical set is exactly the acute corners
  std::vector<std::size_t> acute;
  PathRun run;
};

/// True when the only nonzero-index critical points are the given corners,
/// each of index 1. Other corners may be listed with index 0.
inline bool only_acute_extrema(const CriticalSet& cs, const std::vector<std::size_t>& acute) {
  if (cs.degenerate) return false;
  std::size_t found = 0;
  for (const auto& p : cs.points) {
    if (!p.index) return false;
    const bool is_acute = p.locus == Locus::vertex &&
                          std::find(acute.begin(), acute.end(), static_cast<std::size_t>(p.id)) != acute.end();
    if (is_acute) found += *p.index == 1;
    else if (*p.index != 0 || p.locus != Locus::vertex) return false;
  }
  return found == acute.size();
}

inline Lip1Verdict lip1_no_hotspots(const Polygon& P, const TrackOptions& opt = {}) {
  Lip1Verdict out;
  for (std::size_t v : P.corner_indices())
    if (P.angle(v) < 0.5 * pi) out.acute.push_back(v);
  if (out.acute.size() != 2) throw Error(ErrorCode::precondition, "polygon must have exactly two acute vertices");
  const DeformationPath path = lip1_reduction_path(P);
  TrackOptions o = opt;
  // A polygon that is already a triangle needs no continuation.
  if (P.corner_indices().size() == 3) o.steps = 1;
  out.run = track(path, o);
  for (const auto& s : out.run.samples) out.samples_ok += only_acute_extrema(s.critical, out.acute);
  out.start_ok = only_acute_extrema(out.run.samples.front().critical, out.acute);
  out.end_ok = only_acute_extrema(out.run.samples.back().critical, out.acute);
  out.pass = out.end_ok;
  return out;
}

// ---------------------------------------------------------------------------
// The set N of acute triangles and the breaking experiment

struct NMembership {
  bool in_N = false;
  bool vertices_extrema = false;
  bool one_nonvertex = false;
  bool nondegenerate = false;
  bool nonzero_on_side = false;  ///< u has no zero on the side holding p
  int multiplicity = 1;
  std::optional<CriticalPoint> p;
  std::optional<std::size_t> side;
  double min_abs_u_on_side = 0.0;  ///< relative to max |u|
  std::string detail;
};

/// Smallest |u| on a side relative to max |u|, over equally spaced samples.
inline double min_abs_on_side(const EigenSolution& sol, std::size_t side, int samples = 512) {
  const auto [a, b] = sol.polygon().side(side);
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) m = std::min(m, std::abs(sol.value(lerp(a, b, static_cast<double>(i) / samples))));
  return m / sol.coefficients().cwiseAbs().maxCoeff();
}

inline NMembership n_membership(const EigenSolution& sol, const CriticalOptions& copt = {},
                                double zero_floor = 0.05) {
  const Polygon& T = sol.polygon();
  if (T.size() != 3) throw Error(ErrorCode::precondition, "membership in N is defined for triangles");
  for (std::size_t v = 0; v < 3; ++v)
    if (T.angle(v) >= 0.5 * pi - 1e-9) throw Error(ErrorCode::precondition, "triangle is not acute");
  NMembership out;
  out.multiplicity = sol.multiplicity;
  if (sol.multiplicity > 1) {
    out.detail = "second eigenvalue is not simple";
    return out;
  }
  const auto cs = find_critical_points(sol, copt);
  std::size_t extrema = 0;
  std::vector<CriticalPoint> others;
  for (const auto& c : cs.points) {
    if (c.locus == Locus::vertex)
      extrema += c.index && *c.index == 1;
    else
      others.push_back(c);
  }
  out.vertices_extrema = extrema == 3;
  out.one_nonvertex = others.size() == 1;
  if (out.one_nonvertex) {
    out.p = others.front();
    out.nondegenerate = out.p->nondegenerate && out.p->index && *out.p->index == -1;
    if (out.p->locus == Locus::side) {
      out.side = static_cast<std::size_t>(out.p->id);
      out.min_abs_u_on_side = min_abs_on_side(sol, *out.side);
      out.nonzero_on_side = out.min_abs_u_on_side > zero_floor;
    }
  }
  out.in_N = out.vertices_extrema && out.one_nonvertex && out.nondegenerate;
  if (!out.vertices_extrema) out.detail = "not every vertex is an extremum";
  else if (!out.one_nonvertex) out.detail = std::to_string(others.size()) + " non-vertex critical points";
  else if (!out.nondegenerate) out.detail = "non-vertex critical point is degenerate";
  return out;
}

struct BreakingOptions {
  TrackOptions track;
  double epsilon = 0.01;     ///< relative to |e|
  double offset = 0.25;      ///< |w_i - p| relative to |e|
  double separation = 0.1;   ///< required |w_i - p| relative to |e|
  int max_shrinks = 3;       ///< epsilon halvings while the start check fails
};

struct BreakingSample {
  /// Where the nonzero-index points at w or on its two sides sit.
  enum class State { minus, plus, at_w, multiple, none, unresolved };
  State state = State::none;
  double t = 0.0;
  double obtuse_angle = 0.0;
  bool no_interior = true;    ///< no interior critical point
  bool cond2 = true;          ///< nonzero-index points are corners or on sides next to w
  bool cond3 = true;          ///< acute corners are extrema
  std::size_t a_nonzero = 0;  ///< nonzero-index points at w or inside its two sides
  std::size_t a_zero = 0;        ///< index-0 points inside the two sides
  std::size_t a_unresolved = 0;
  int a_index_sum = 0;
  double p_distance = std::numeric_limits<double>::infinity();  ///< nearest nonzero-index side point to w
  double c1_at_w = std::numeric_limits<double>::quiet_NaN();
};

inline const char* to_string(BreakingSample::State s) {
  switch (s) {
    case BreakingSample::State::minus: return "first-side";
    case BreakingSample::State::plus: return "second-side";
    case BreakingSample::State::at_w: return "at-w";
    case BreakingSample::State::multiple: return "multiple";
    case BreakingSample::State::none: return "none";
    case BreakingSample::State::unresolved: return "unresolved";
  }
  return "unknown";
}

struct BreakingReport {
  enum class Outcome { blocking_window, interior_critical_point, no_blocking_observed };
  NMembership membership;
  std::size_t side = 0;
  Vec2 p, w0, w1;
  double epsilon = 0.0;
  PathRun run;
  std::vector<BreakingSample> samples;
  bool cond4 = false, cond5 = false;
  bool conditions_hold = false;  ///< per-sample checks everywhere, start and end checks
  Outcome outcome = Outcome::no_blocking_observed;
  std::optional<std::pair<double, double>> window;
  std::size_t unresolved_samples = 0;
  int epsilon_shrinks = 0;
  std::string summary;
};

inline const char* to_string(BreakingReport::Outcome o) {
  switch (o) {
    case BreakingReport::Outcome::blocking_window: return "blocking-window";
    case BreakingReport::Outcome::interior_critical_point: return "interior-critical-point";
    case BreakingReport::Outcome::no_blocking_observed: return "no-blocking-observed";
  }
  return "unknown";
}

/// Break the side of T holding its index -1 point and slide the new corner
/// w across that point. Inside the quadrilateral, side `side` runs from the
/// original corner a to w and side `side + 1` from w to b.
namespace detail {
inline BreakingReport breaking_attempt(const Polygon& T, const BreakingOptions& opt) {
  BreakingReport rep;
  const auto sol = solve_polygon(T, opt.track.h, opt.track.mesh, opt.track.solver);
  rep.membership = n_membership(sol, opt.track.critical);
  if (!rep.membership.in_N || !rep.membership.side)
    throw Error(ErrorCode::precondition, "triangle fails the N membership checks: " + rep.membership.detail);
  rep.side = *rep.membership.side;
  rep.p = rep.membership.p->location;
  const auto [a, b] = T.side(rep.side);
  const double len = distance(a, b);
  const Vec2 tau = normalized(b - a);
  if (opt.offset < opt.separation) throw Error(ErrorCode::invalid_input, "break points too close to p");
  rep.w0 = rep.p + tau * (opt.offset * len);
  rep.w1 = rep.p - tau * (opt.offset * len);
  rep.epsilon = opt.epsilon * len;
  rep.run = track(breaking_family(T, rep.side, rep.w0, rep.w1, rep.epsilon), opt.track);

  const std::size_t w = rep.side + 1;
  const std::size_t e_minus = rep.side, e_plus = rep.side + 1;
  bool hold = true;
  for (const auto& s : rep.run.samples) {
    BreakingSample bs;
    bs.t = s.t;
    const auto& Q = s.polygon;
    bs.obtuse_angle = Q.angle(w);
    bs.c1_at_w = s.c1_ratio[w];
    for (const auto& c : s.critical.points) {
      const bool nonzero = c.index && *c.index != 0;
      if (c.locus == Locus::interior) bs.no_interior = false;
      const bool at_w = c.locus == Locus::vertex && static_cast<std::size_t>(c.id) == w;
      const bool on_adjacent = c.locus == Locus::side && (static_cast<std::size_t>(c.id) == e_minus ||
                                                          static_cast<std::size_t>(c.id) == e_plus);
      if (at_w || on_adjacent) {
        if (!c.index) ++bs.a_unresolved;
        else if (nonzero) {
          ++bs.a_nonzero;
          bs.a_index_sum += *c.index;
          if (on_adjacent) bs.p_distance = std::min(bs.p_distance, distance(c.location, Q.vertex(w)));
          bs.state = at_w ? BreakingSample::State::at_w
                          : (static_cast<std::size_t>(c.id) == e_minus ? BreakingSample::State::minus
                                                                       : BreakingSample::State::plus);
        } else if (on_adjacent) {
          ++bs.a_zero;
        }
      }
      if (nonzero && c.locus != Locus::vertex && !on_adjacent) bs.cond2 = false;
    }
    if (bs.a_unresolved || !s.formula.pass) bs.state = BreakingSample::State::unresolved;
    else if (bs.a_nonzero > 1) bs.state = BreakingSample::State::multiple;
    else if (bs.a_nonzero == 0) bs.state = BreakingSample::State::none;
    for (std::size_t v = 0; v < Q.size(); ++v) {
      if (v == w || Q.angle(v) >= 0.5 * pi) continue;
      const auto it = std::find_if(s.critical.points.begin(), s.critical.points.end(), [&](const auto& c) {
        return c.locus == Locus::vertex && static_cast<std::size_t>(c.id) == v;
      });
      if (it == s.critical.points.end() || !it->index || *it->index != 1) bs.cond3 = false;
    }
    hold = hold && bs.cond2 && bs.cond3;
    rep.samples.push_back(bs);
  }

  // Start: exactly one non-vertex point, inside the first side. End: none left there.
  {
    const auto& s0 = rep.run.samples.front().critical.points;
    std::size_t nonvertex = 0, on_e = 0;
    for (const auto& c : s0) {
      if (c.locus == Locus::vertex) continue;
      ++nonvertex;
      on_e += c.locus == Locus::side && static_cast<std::size_t>(c.id) == e_minus;
    }
    rep.cond4 = nonvertex == 1 && on_e == 1;
    const auto& s1 = rep.run.samples.back().critical.points;
    rep.cond5 = std::none_of(s1.begin(), s1.end(), [&](const auto& c) {
      return c.locus == Locus::side && static_cast<std::size_t>(c.id) == e_minus;
    });
  }
  rep.conditions_hold = hold && rep.cond4 && rep.cond5;

  // t*: bracketed by the last sample with the index -1 point alone on e_minus
  // and the first resolved sample where that no longer holds. Unresolved
  // samples (points within mesh resolution of w) are skipped.
  std::size_t k = rep.samples.size();
  std::size_t last_minus = 0;
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto st = rep.samples[i].state;
    if (st == BreakingSample::State::minus) last_minus = i;
    else if (st != BreakingSample::State::unresolved) {
      k = i;
      break;
    }
  }
  std::optional<std::size_t> first_interior;
  for (std::size_t i = 0; i < rep.samples.size(); ++i)
    if (!rep.samples[i].no_interior) {
      first_interior = i;
      break;
    }
  auto bracket = [&](std::size_t i) {
    return std::make_pair(i > 0 ? rep.samples[i - 1].t : 0.0, rep.samples[i].t);
  };
  if (first_interior && *first_interior <= k) {
    rep.outcome = BreakingReport::Outcome::interior_critical_point;
    rep.window = bracket(*first_interior);
    rep.summary = "interior critical point appears in (" + std::to_string(rep.window->first) + ", " +
                  std::to_string(rep.window->second) + "]";
  } else if (k < rep.samples.size()) {
    rep.outcome = BreakingReport::Outcome::blocking_window;
    rep.window = std::make_pair(rep.samples[last_minus].t, rep.samples[k].t);
    std::size_t multiple = 0, zero = 0;
    for (const auto& s : rep.samples) {
      multiple += s.state == BreakingSample::State::multiple;
      zero += s.a_zero > 0;
      rep.unresolved_samples += s.state == BreakingSample::State::unresolved;
    }
    rep.summary = "t* in (" + std::to_string(rep.window->first) + ", " + std::to_string(rep.window->second) +
                  "]: next state " + to_string(rep.samples[k].state) + "; " + std::to_string(multiple) +
                  " samples with several nonzero-index points next to w, " + std::to_string(zero) +
                  " with index-0 side points";
  } else {
    rep.outcome = BreakingReport::Outcome::no_blocking_observed;
    rep.summary = "a single index -1 point on the first side next to w throughout";
  }
  return rep;
}

}  // namespace detail

/// Runs the experiment, halving epsilon while the perturbed side still holds
/// an extra critical point at t = 0.
inline BreakingReport breaking_experiment(const Polygon& T, const BreakingOptions& opt = {}) {
  BreakingOptions o = opt;
  BreakingReport rep = detail::breaking_attempt(T, o);
  for (int i = 0; i < opt.max_shrinks && !rep.cond4; ++i) {
    o.epsilon *= 0.5;
    rep = detail::breaking_attempt(T, o);
    rep.epsilon_shrinks = i + 1;
  }
  return rep;
}

}  // namespace hotspots
