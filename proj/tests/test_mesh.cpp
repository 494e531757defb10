#include <gtest/gtest.h>

#include <map>

#include "hotspots/mesh.hpp"

using namespace hotspots;

namespace {

double shoelace(const std::vector<Vec2>& v) {
  double a = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

const std::vector<Polygon>& shapes() {
  static const std::vector<Polygon> s{
      Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}),
      Polygon({{0, 0}, {1, 0}, {0.3, 0.2}}),
      Polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}),
      isosceles_triangle(20 * pi / 180),
      // straight vertex at (1, 0)
      Polygon({{0, 0}, {1, 0}, {2, 0}, {1, 1.5}}),
  };
  return s;
}

// Angle at the vertex of triangle t opposite to edge (a, b).
double opposite_angle(const Mesh& m, std::size_t t, int a, int b) {
  for (int c : m.triangles[t])
    if (c != a && c != b) {
      const Vec2 u = m.nodes[a] - m.nodes[c], v = m.nodes[b] - m.nodes[c];
      return std::atan2(std::abs(cross(u, v)), dot(u, v));
    }
  return 0;
}

}  // namespace

TEST(Mesh, AreaMatchesShoelace) {
  for (const auto& p : shapes()) {
    const Mesh m = triangulate(p, 0.05 * p.diameter());
    EXPECT_NEAR(m.total_area(), shoelace(p.vertices()), 1e-12 * p.area());
    for (std::size_t t = 0; t < m.triangle_count(); ++t) EXPECT_GT(m.triangle_area(t), 0.0);
  }
}

TEST(Mesh, ConformingAndBoundaryTagged) {
  for (const auto& p : shapes()) {
    const Mesh m = triangulate(p, 0.05 * p.diameter());
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : m.triangles)
      for (int k = 0; k < 3; ++k) {
        const int a = t[k], b = t[(k + 1) % 3];
        ++count[{std::min(a, b), std::max(a, b)}];
      }
    std::size_t boundary_edges = 0;
    for (const auto& [e, c] : count) {
      EXPECT_LE(c, 2);
      boundary_edges += c == 1;
    }
    EXPECT_EQ(boundary_edges, m.boundary.size());
    double perimeter = 0;
    for (const auto& e : m.boundary) {
      EXPECT_EQ((count[{std::min(e.a, e.b), std::max(e.a, e.b)}]), 1);
      const auto [A, B] = p.side(static_cast<std::size_t>(e.side));
      EXPECT_LT(distance_to_segment(m.nodes[e.a], A, B), 1e-12);
      EXPECT_LT(distance_to_segment(m.nodes[e.b], A, B), 1e-12);
      perimeter += distance(m.nodes[e.a], m.nodes[e.b]);
    }
    double expect = 0;
    for (std::size_t i = 0; i < p.size(); ++i) expect += p.side_length(i);
    EXPECT_NEAR(perimeter, expect, 1e-12 * expect);
    for (std::size_t v = 0; v < p.size(); ++v) EXPECT_EQ(distance(m.nodes[m.vertex_node[v]], p.vertex(v)), 0.0);
  }
}

TEST(Mesh, QualityAwayFromSharpCorners) {
  for (const auto& p : shapes()) {
    const Mesh m = triangulate(p, 0.05 * p.diameter());
    const double bound = 20.0 * pi / 180.0;
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
      if (m.touches_sharp_corner(t, 2 * bound)) continue;
      EXPECT_GE(m.min_angle(t), bound - 1e-9);
    }
  }
}

TEST(Mesh, LocallyDelaunayAcrossInteriorEdges) {
  const Polygon& p = shapes()[2];
  const Mesh m = triangulate(p, 0.05 * p.diameter());
  std::map<std::pair<int, int>, std::vector<std::size_t>> owners;
  for (std::size_t t = 0; t < m.triangle_count(); ++t)
    for (int k = 0; k < 3; ++k) {
      const int a = m.triangles[t][k], b = m.triangles[t][(k + 1) % 3];
      owners[{std::min(a, b), std::max(a, b)}].push_back(t);
    }
  for (const auto& [e, ts] : owners) {
    if (ts.size() != 2) continue;
    const double s = opposite_angle(m, ts[0], e.first, e.second) + opposite_angle(m, ts[1], e.first, e.second);
    EXPECT_LE(s, pi + 1e-9);
  }
}

TEST(Mesh, SizeFollowsH) {
  const Polygon& sq = shapes()[0];
  const Mesh coarse = triangulate(sq, 0.1), fine = triangulate(sq, 0.05);
  EXPECT_GT(fine.triangle_count(), 3 * coarse.triangle_count());
  for (std::size_t t = 0; t < fine.triangle_count(); ++t) EXPECT_LE(fine.longest_edge(t), 0.05 * 1.5);
}

TEST(Mesh, GradedTowardsReflexCorner) {
  const Polygon& L = shapes()[2];
  const Mesh m = triangulate(L, 0.1 * L.diameter());
  EXPECT_NEAR(m.grading[3], 1.0 - 1.0 / 1.5, 1e-12);
  double near_size = 1e9;
  for (std::size_t t = 0; t < m.triangle_count(); ++t)
    for (int k : m.triangles[t])
      if (k == m.vertex_node[3]) near_size = std::min(near_size, m.longest_edge(t));
  EXPECT_LT(near_size, 0.5 * 0.1 * L.diameter());
}

TEST(Mesh, RedRefinementKeepsArea) {
  const Polygon& p = shapes()[1];
  const Mesh m = triangulate(p, 0.1);
  const Mesh r = refine(m);
  EXPECT_EQ(r.triangle_count(), 4 * m.triangle_count());
  EXPECT_EQ(r.boundary.size(), 2 * m.boundary.size());
  EXPECT_NEAR(r.total_area(), m.total_area(), 1e-14);
}

TEST(Mesh, LocatorFindsContainingTriangle) {
  const Polygon& p = shapes()[2];
  const Mesh m = triangulate(p, 0.1);
  const TriangleLocator loc(m);
  for (const Vec2 q : {Vec2{0.5, 0.5}, Vec2{1.7, 0.3}, Vec2{0.2, 1.9}}) {
    const auto hit = loc.locate(q);
    ASSERT_GE(hit.triangle, 0);
    EXPECT_NEAR(hit.bary[0] + hit.bary[1] + hit.bary[2], 1.0, 1e-12);
    EXPECT_GE(std::min({hit.bary[0], hit.bary[1], hit.bary[2]}), -1e-12);
  }
  EXPECT_LT(loc.locate({1.5, 1.5}).triangle, 0);
}

TEST(Mesh, RejectsNonPositiveH) {
  EXPECT_THROW(triangulate(shapes()[0], 0.0), Error);
}
