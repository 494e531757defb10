#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "hotspots/bessel.hpp"
#include "hotspots/continuation.hpp"
#include "hotspots/critical.hpp"
#include "hotspots/eigensolver.hpp"
#include "hotspots/nodal.hpp"

namespace hotspots {

using json = nlohmann::ordered_json;

inline constexpr const char* report_schema = "hotspots-report";
inline constexpr int report_version = 1;

namespace detail {
// JSON has no NaN or infinity.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
}  // namespace detail

inline json to_json(const Vec2& p) { return json::array({p.x, p.y}); }

inline json to_json(const Polygon& p) {
  json v = json::array();
  for (const auto& q : p.vertices()) v.push_back(to_json(q));
  json out{{"vertices", v}};
  if (!p.labels().empty()) out["labels"] = p.labels();
  json ang = json::array();
  for (double a : p.angles()) ang.push_back(a);
  out["angles"] = ang;
  return out;
}

inline json to_json(const BesselExpansion& e) {
  return {{"vertex", e.vertex},
          {"beta", e.beta},
          {"nu", e.nu},
          {"mu", e.mu},
          {"coefficients", e.c},
          {"annulus", {e.annulus.r_in, e.annulus.r_out}},
          {"residual", e.residual},
          {"scale", e.scale},
          {"leading_defined", e.leading_defined()}};
}

inline json to_json(const CriticalPoint& c) {
  json j{{"location", to_json(c.location)},
         {"locus", to_string(c.locus)},
         {"id", c.id},
         {"index", c.index ? json(*c.index) : json(nullptr)},
         {"is_extremum", c.is_extremum},
         {"value", c.value},
         {"arcs", {c.arcs, c.arcs_half}},
         {"probe_radius", c.probe_radius},
         {"grad_residual", c.grad_residual},
         {"confidence", c.confidence}};
  if (c.locus == Locus::vertex) {
    j["bessel_k"] = c.bessel_k ? json(*c.bessel_k) : json(nullptr);
    j["bessel_a"] = c.bessel_a ? detail::num(*c.bessel_a) : json(nullptr);
    j["bessel_index"] = c.bessel_index ? json(*c.bessel_index) : json(nullptr);
    j["arc_index"] = c.arc_index ? json(*c.arc_index) : json(nullptr);
    j["coefficients"] = c.coefficients;
  }
  if (c.hess_tt) j["hessian"] = {*c.hess_tt, *c.hess_nn};
  if (c.locus != Locus::vertex) j["nondegenerate"] = c.nondegenerate;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline json to_json(const CriticalSet& cs) {
  json pts = json::array();
  for (const auto& p : cs.points) pts.push_back(to_json(p));
  json j{{"points", pts}, {"degenerate", cs.degenerate}, {"merged", cs.merged}, {"warnings", cs.warnings}};
  if (cs.degenerate) j["degenerate_note"] = cs.degenerate_note;
  return j;
}

inline json to_json(const IndexFormula& f) {
  return {{"lhs", f.lhs}, {"rhs", f.rhs}, {"resolved", f.resolved}, {"pass", f.pass}};
}

inline json to_json(const EigenSolution& s) {
  json ritz = json::array();
  for (double r : s.diagnostics.ritz_values) ritz.push_back(r);
  return {{"mu", s.mu()},
          {"multiplicity", s.multiplicity},
          {"relative_gap", s.relative_gap},
          {"h", s.h()},
          {"nodes", s.mesh().node_count()},
          {"triangles", s.mesh().triangle_count()},
          {"dofs", s.dofs().size()},
          {"diagnostics",
           {{"iterations", s.diagnostics.iterations},
            {"residual", s.diagnostics.residual},
            {"shift", s.diagnostics.shift},
            {"ritz_values", ritz}}}};
}

inline json to_json(const FieldKind& k) {
  json j{{"kind", to_string(k.tag)}};
  if (k.tag == FieldKind::Tag::directional) j["psi"] = k.psi;
  if (k.tag == FieldKind::Tag::rotational) j["w"] = to_json(k.center);
  return j;
}

inline json to_json(const NodalGraph& g) {
  json nodes = json::array(), edges = json::array();
  for (const auto& n : g.nodes)
    nodes.push_back({{"p", to_json(n.p)}, {"degree", n.degree}, {"locus", to_string(n.locus)}, {"id", n.id}});
  for (const auto& e : g.edges) {
    json pts = json::array();
    for (const auto& p : e.points) pts.push_back(to_json(p));
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"closed", e.closed},
                     {"boundary_lying", e.boundary_lying},
                     {"side", e.side},
                     {"points", pts}});
  }
  // Euler characteristic V - E; a closed loop adds one vertex and one edge.
  long open_edges = 0;
  for (const auto& e : g.edges) open_edges += !e.closed && !e.boundary_lying;
  return {{"field", to_json(g.field)},
          {"vanishes", g.vanishes},
          {"field_scale", g.field_scale},
          {"nodes", nodes},
          {"edges", edges},
          {"interior_edges", g.interior_edge_count()},
          {"degree_one", degree_one_vertices(g).size()},
          {"euler", static_cast<long>(g.nodes.size()) - open_edges}};
}

inline json to_json(const ArcVerdict& a) {
  return {{"geometric", a.geometric ? json(*a.geometric) : json(nullptr)},
          {"analytic", a.analytic ? json(*a.analytic) : json(nullptr)},
          {"agree", a.agree},
          {"inconclusive", a.inconclusive},
          {"boundary_lying", a.criterion.boundary_lying},
          {"angular_margin", a.criterion.margin},
          {"c0_dominant", a.criterion.c0_dominant},
          {"geometric_changes", {a.geo.changes, a.geo.changes_half}},
          {"geometric_margin", a.geo.margin}};
}

inline json to_json(const SampleRecord& s) {
  json c0 = json::array(), c1 = json::array();
  for (double x : s.c0_ratio) c0.push_back(detail::num(x));
  for (double x : s.c1_ratio) c1.push_back(detail::num(x));
  json cusps = json::array();
  for (const auto& [k, c] : s.cusps)
    cusps.push_back({{"point", k}, {"tangent_cusp", c.tangent_cusp}, {"k", c.k}, {"k_raw", c.k_raw},
                     {"residual", c.residual}});
  return {{"t", s.t},
          {"polygon", to_json(s.polygon)},
          {"mu", s.mu},
          {"gap", s.gap},
          {"multiplicity", s.multiplicity},
          {"overlap", s.overlap},
          {"S", s.S},
          {"V", s.V},
          {"arc_vertices", s.arc_vertices},
          {"c0_ratio", c0},
          {"c1_ratio", c1},
          {"index_formula", to_json(s.formula)},
          {"critical", to_json(s.critical)},
          {"cusps", cusps}};
}

inline json to_json(const PathEvent& e) {
  return {{"kind", to_string(e.kind)}, {"t0", e.t0}, {"t1", e.t1}, {"detail", e.detail}};
}

inline json to_json(const PathRun& r) {
  json samples = json::array(), events = json::array();
  for (const auto& s : r.samples) samples.push_back(to_json(s));
  for (const auto& e : r.events) events.push_back(to_json(e));
  return {{"path", to_string(r.path.kind())},
          {"rejected_steps", r.rejected_steps},
          {"samples", samples},
          {"events", events}};
}

inline json to_json(const NMembership& m) {
  json j{{"in_N", m.in_N},
         {"vertices_extrema", m.vertices_extrema},
         {"one_nonvertex", m.one_nonvertex},
         {"nondegenerate", m.nondegenerate},
         {"nonzero_on_side", m.nonzero_on_side},
         {"min_abs_u_on_side", m.min_abs_u_on_side},
         {"multiplicity", m.multiplicity},
         {"detail", m.detail}};
  if (m.p) j["p"] = to_json(*m.p);
  if (m.side) j["side"] = *m.side;
  return j;
}

inline json to_json(const BreakingReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"t", s.t},
                       {"state", to_string(s.state)},
                       {"obtuse_angle", s.obtuse_angle},
                       {"no_interior_point", s.no_interior},
                       {"points_near_w_only", s.cond2},
                       {"acute_corners_extrema", s.cond3},
                       {"nonzero_next_to_w", s.a_nonzero},
                       {"index0_on_adjacent_sides", s.a_zero},
                       {"index_sum_next_to_w", s.a_index_sum},
                       {"p_distance_to_w", detail::num(s.p_distance)},
                       {"c1_ratio_at_w", detail::num(s.c1_at_w)}});
  json j{{"membership", to_json(r.membership)},
         {"side", r.side},
         {"p", to_json(r.p)},
         {"w0", to_json(r.w0)},
         {"w1", to_json(r.w1)},
         {"epsilon", r.epsilon},
         {"epsilon_shrinks", r.epsilon_shrinks},
         {"start_check", r.cond4},
         {"end_check", r.cond5},
         {"conditions_hold", r.conditions_hold},
         {"outcome", to_string(r.outcome)},
         {"window", r.window ? json::array({r.window->first, r.window->second}) : json(nullptr)},
         {"unresolved_samples", r.unresolved_samples},
         {"summary", r.summary},
         {"samples", samples},
         {"run", to_json(r.run)}};
  return j;
}

inline json error_record(const std::string& code, const std::string& message) {
  return {{"schema", report_schema}, {"version", report_version}, {"error", {{"code", code}, {"message", message}}}};
}

}  // namespace hotspots
