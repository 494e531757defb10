#include <gtest/gtest.h>

#include "hotspots/continuation.hpp"
#include "hotspots/critical.hpp"

using namespace hotspots;

namespace {

FunctionField poly_field(std::function<double(Vec2)> f) {
  // Gradients are not used by arc counting.
  return {std::move(f), [](Vec2) { return Vec2{}; }};
}

const Polygon obtuse({{0, 0}, {1, 0}, {0.3, 0.2}});

}  // namespace

TEST(ArcIndex, InteriorModels) {
  const Vec2 o{0, 0};
  EXPECT_EQ(arc_index(poly_field([](Vec2 p) { return p.x * p.x + 2 * p.y * p.y; }), o, Locus::interior, 0.1).index, 1);
  EXPECT_EQ(arc_index(poly_field([](Vec2 p) { return p.x * p.x - p.y * p.y; }), o, Locus::interior, 0.1).index, -1);
  const auto monkey = arc_index(poly_field([](Vec2 p) { return p.x * p.x * p.x - 3 * p.x * p.y * p.y; }), o,
                                Locus::interior, 0.1);
  EXPECT_EQ(monkey.arcs, 6);
  EXPECT_EQ(monkey.index, -2);
}

TEST(ArcIndex, BoundaryModels) {
  // Domain y > 0, side along the x axis; these models satisfy u_y = 0 there.
  const Vec2 o{0, 0};
  EXPECT_EQ(arc_index(poly_field([](Vec2 p) { return p.x * p.x + p.y * p.y; }), o, Locus::side, 0.1, 0, pi).index, 1);
  EXPECT_EQ(arc_index(poly_field([](Vec2 p) { return -p.x * p.x - p.y * p.y; }), o, Locus::side, 0.1, 0, pi).index, 1);
  EXPECT_EQ(arc_index(poly_field([](Vec2 p) { return p.y * p.y - p.x * p.x; }), o, Locus::side, 0.1, 0, pi).index, -1);
  EXPECT_EQ(arc_index(poly_field([](Vec2 p) { return p.x * p.x - p.y * p.y; }), o, Locus::side, 0.1, 0, pi).index, -1);
  // Cusp y^2 - x^3: one sign change across the half disk, index 0.
  EXPECT_EQ(arc_index(poly_field([](Vec2 p) { return p.y * p.y - p.x * p.x * p.x; }), o, Locus::side, 0.1, 0, pi)
                .index,
            0);
}

TEST(ArcIndex, DisagreeingRadiiLeaveIndexOpen) {
  // Saddle at the origin plus a second saddle at distance 0.07.
  const auto f = poly_field([](Vec2 p) { return (p.x * p.x - p.y * p.y) * ((p.x - 0.07) * (p.x - 0.07) + p.y * p.y + 1e-4); });
  const auto r = arc_index(f, {0, 0}, Locus::interior, 0.1);
  if (r.arcs != r.arcs_half) {
    EXPECT_FALSE(r.index);
  }
}

TEST(IndexFormula, SumsWithBoundaryHalfWeight) {
  CriticalSet cs;
  auto add = [&](Locus l, int idx) {
    CriticalPoint p;
    p.locus = l;
    p.index = idx;
    cs.points.push_back(p);
  };
  add(Locus::vertex, 1);
  add(Locus::vertex, 1);
  add(Locus::side, -1);
  add(Locus::interior, 1);
  add(Locus::vertex, 0);
  auto f = verify_index_formula(cs);
  EXPECT_TRUE(f.resolved);
  EXPECT_EQ(f.rhs, 3);
  EXPECT_FALSE(f.pass);
  add(Locus::side, -1);
  EXPECT_TRUE(verify_index_formula(cs).pass);
  cs.points.push_back({});
  EXPECT_FALSE(verify_index_formula(cs).resolved);
}

TEST(CriticalPoints, ObtuseTriangleExtremaAtLongSide) {
  const auto s = solve_polygon(obtuse, 0.02 * obtuse.diameter());
  const auto cs = find_critical_points(s);
  EXPECT_FALSE(cs.degenerate);
  const auto f = verify_index_formula(cs);
  EXPECT_TRUE(f.resolved);
  EXPECT_TRUE(f.pass);
  EXPECT_EQ(cs.count(Locus::interior), 0u);
  std::vector<std::size_t> extrema;
  for (const auto& p : cs.points)
    if (p.is_extremum) {
      EXPECT_EQ(p.locus, Locus::vertex);
      extrema.push_back(static_cast<std::size_t>(p.id));
    }
  std::sort(extrema.begin(), extrema.end());
  EXPECT_EQ(extrema, (std::vector<std::size_t>{0, 1}));
}

TEST(CriticalPoints, LShapeFormula) {
  const Polygon L({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  const auto s = solve_polygon(L, 0.02 * L.diameter());
  const auto cs = find_critical_points(s);
  const auto f = verify_index_formula(cs);
  ASSERT_TRUE(f.resolved);
  EXPECT_TRUE(f.pass) << f.rhs;
}

TEST(CriticalPoints, RectangleIsDegenerate) {
  const Polygon r({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
  const auto cs = find_critical_points(solve_polygon(r, 0.06));
  EXPECT_TRUE(cs.degenerate);
  EXPECT_FALSE(verify_index_formula(cs).resolved);
}

TEST(Membership, IsoscelesFiftyIsInN) {
  const auto s = solve_polygon(isosceles_triangle(50 * pi / 180), 0.03);
  const auto m = n_membership(s);
  EXPECT_TRUE(m.in_N) << m.detail;
  ASSERT_TRUE(m.p);
  EXPECT_EQ(m.p->locus, Locus::side);
  EXPECT_EQ(m.p->index, -1);
}

TEST(Membership, EquilateralHasDoubleEigenvalue) {
  const auto s = solve_polygon(Polygon({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}), 0.04);
  const auto m = n_membership(s);
  EXPECT_FALSE(m.in_N);
  EXPECT_EQ(m.multiplicity, 2);
}

TEST(Membership, NeedsAcuteTriangle) {
  const auto s = solve_polygon(obtuse, 0.05);
  EXPECT_THROW(n_membership(s), Error);
  const auto r = solve_polygon(Polygon({{0, 0}, {1, 0}, {0, 1}}), 0.05);
  EXPECT_THROW(n_membership(r), Error);
}
