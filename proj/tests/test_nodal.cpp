#include <gtest/gtest.h>

#include "hotspots/nodal.hpp"

using namespace hotspots;

TEST(Nodal, RectangleMidline) {
  const Polygon r({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
  const auto s = solve_polygon(r, 0.06);
  const auto g = trace(s, FieldKind::u());
  const auto arc = check_simple_arc(g, r);
  EXPECT_TRUE(arc.ok) << arc.reason;
  ASSERT_EQ(g.interior_edge_count(), 1u);
  for (const auto& e : g.edges)
    for (const auto& p : e.points) EXPECT_NEAR(p.x, 1.0, 1e-4);
  const auto ends = degree_one_vertices(g);
  ASSERT_EQ(ends.size(), 2u);
  for (const auto& n : ends) EXPECT_EQ(n.locus, Locus::side);
  EXPECT_NEAR(min_gradient_along(s, g), pi / 2, 1e-3);
}

TEST(Nodal, ObtuseTriangleSimpleArc) {
  const Polygon t({{0, 0}, {1, 0}, {0.3, 0.2}});
  const auto s = solve_polygon(t, 0.02);
  const auto g = trace(s, FieldKind::u());
  EXPECT_TRUE(check_simple_arc(g, t).ok);
  EXPECT_GT(min_gradient_along(s, g), 0.05 * detail::max_gradient(s));
  EXPECT_GT(sign_consistency(s, g, 0.5 * s.h()), 0.99);
  // Marching is linear on the P2 sub-triangles, so points sit within O(h^2) of Z(u).
  for (const auto& e : g.edges)
    for (const auto& p : e.points) EXPECT_LT(std::abs(s.value(p)), 1e-3);
}

TEST(Nodal, DirectionalFieldAlongSideVanishesOnIt) {
  // L_psi u with psi normal to a side vanishes on that side by the Neumann condition.
  const Polygon t({{0, 0}, {1, 0}, {0.3, 0.2}});
  const auto s = solve_polygon(t, 0.02);
  const auto g = trace(s, FieldKind::directional(pi / 2));
  bool lying = false;
  for (const auto& e : g.edges) lying |= e.boundary_lying && e.side == 0;
  EXPECT_TRUE(lying);
}

TEST(SectorCriterion, IntervalsAndEndpoints) {
  const double b = 1.0;
  auto c = sector_criterion(b, true, true, 0.5 * pi + 0.5 * b);
  EXPECT_TRUE(c.c0_dominant);
  EXPECT_EQ(c.verdict, true);
  EXPECT_EQ(sector_criterion(b, true, true, 0.1).verdict, false);
  // mod pi
  EXPECT_EQ(sector_criterion(b, true, true, 0.5 * pi + 0.5 * b - pi).verdict, true);
  const auto e = sector_criterion(b, true, true, 0.5 * pi);
  EXPECT_TRUE(e.boundary_lying);
  EXPECT_EQ(e.verdict, false);
  // obtuse corner with c1: between beta - pi/2 and pi/2
  const double o = 2.2;
  EXPECT_EQ(sector_criterion(o, true, true, 0.5 * (o - 0.5 * pi + 0.5 * pi)).verdict, true);
  EXPECT_EQ(sector_criterion(o, true, true, 0.5 * pi + 0.3).verdict, false);
  // no usable coefficient
  EXPECT_FALSE(sector_criterion(o, false, false, 1.0).verdict);
}

namespace {

// Geometric and analytic verdicts on a manufactured vertex series.
void expect_agreement(double beta, std::vector<double> c) {
  const Polygon frame({{0, 0}, {1, 0}, {std::cos(beta), std::sin(beta)}});
  Sector sec;
  sec.apex = {0, 0};
  sec.beta = beta;
  sec.frame_angle = 0.3;
  const SectorSeries s{sec, 5.0, std::move(c)};
  const double c0 = std::abs(s.coefficients[0]), c1 = std::abs(s.coefficients[1]);
  int checked = 0;
  for (int i = 0; i < 72; ++i) {
    const double psi = pi * i / 72.0;
    const auto v = arc_ends_at_vertex(s, sec, FieldKind::directional(psi), c0, c1, 0.01);
    if (!v.analytic || std::abs(v.criterion.margin) < 0.05) continue;
    ASSERT_TRUE(v.geometric) << beta << ' ' << psi;
    EXPECT_EQ(*v.geometric, *v.analytic) << beta << ' ' << psi;
    ++checked;
  }
  EXPECT_GT(checked, 40);
  (void)frame;
}

}  // namespace

TEST(SectorCriterion, AgreesWithManufacturedSeries) {
  expect_agreement(1.0, {1.0, 0.4, 0.2});       // acute, c0 dominant
  expect_agreement(2.2, {1.0, 0.4, 0.2});       // obtuse, c1 dominant
  expect_agreement(2.2, {1.0, 0.0, 0.3});       // obtuse, c1 = 0: c0 dominant
  expect_agreement(4.0, {1.0, 0.5, 0.2});       // reflex with c1
}

TEST(SectorCriterion, RotationalDirection) {
  Sector sec;
  sec.beta = 1.0;
  const auto d = local_direction(sec, FieldKind::rotational({0.5, 0.2}));
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, std::atan2(0.2, 0.5) + 0.5 * pi, 1e-15);
  EXPECT_FALSE(local_direction(sec, FieldKind::rotational({0.5, 0.0})));
}
