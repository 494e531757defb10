#include <gtest/gtest.h>

#include "hotspots/eigensolver.hpp"

using namespace hotspots;

namespace {

const Polygon unit_square({{0, 0}, {1, 0}, {1, 1}, {0, 1}});

Polygon equilateral() { return Polygon({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}); }

// Best fit of the dof vector to f in the max norm sense is overkill; the
// ratio at two interior points is enough to identify cos(pi x / L).
template <class F>
double max_misfit(const EigenSolution& s, F f) {
  const auto& d = s.dofs();
  Eigen::VectorXd ref(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) ref(static_cast<Eigen::Index>(i)) = f(d.coords[i]);
  const double a = s.coefficients().dot(ref) / ref.dot(ref);
  return (s.coefficients() - a * ref).cwiseAbs().maxCoeff() / s.coefficients().cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Eigensolver, SquareIsDoubleWithPiSquared) {
  const auto s = solve_polygon(unit_square, 0.05);
  EXPECT_NEAR(s.mu(), pi * pi, 1e-5 * pi * pi);
  EXPECT_EQ(s.multiplicity, 2);
  EXPECT_LT(s.relative_gap, 1e-6);
  ASSERT_EQ(s.basis.size(), 2u);
  EXPECT_LE(s.diagnostics.residual, 1e-10);
}

TEST(Eigensolver, RectangleIsSimpleCosine) {
  const Polygon r({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
  const auto s = solve_polygon(r, 0.06);
  EXPECT_NEAR(s.mu(), pi * pi / 4, 1e-6 * pi * pi);
  EXPECT_EQ(s.multiplicity, 1);
  EXPECT_GT(s.relative_gap, 0.5);
  EXPECT_LT(max_misfit(s, [](Vec2 p) { return std::cos(pi * p.x / 2); }), 1e-4);
  EXPECT_NEAR(std::abs(s.value({0, 0.5})), 1.0, 1e-4);
  EXPECT_NEAR(s.integral(), 0.0, 1e-8);
}

TEST(Eigensolver, EquilateralRichardson) {
  const Polygon T = equilateral();
  const auto a = solve_polygon(T, 0.08), b = solve_polygon(T, 0.04);
  const double exact = 16 * pi * pi / 9;
  EXPECT_EQ(b.multiplicity, 2);
  const double ea = a.mu() - exact, eb = b.mu() - exact;
  EXPECT_GT(ea, 0);
  EXPECT_GT(eb, 0);
  // Smooth eigenfunctions: P2 eigenvalue error is O(h^4).
  EXPECT_GT(ea / eb, 8.0);
  const double rich = (16 * b.mu() - a.mu()) / 15;
  EXPECT_LT(std::abs(rich - exact), std::abs(eb));
  EXPECT_NEAR(rich, exact, 1e-6 * exact);
}

TEST(Eigensolver, GradientMatchesAnalytic) {
  const Polygon r({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
  const auto s = solve_polygon(r, 0.06);
  const double sign = s.value({0.2, 0.5}) > 0 ? 1 : -1;
  for (double x : {0.3, 0.9, 1.4}) {
    const Vec2 g = s.gradient({x, 0.37});
    EXPECT_NEAR(g.x, -sign * pi / 2 * std::sin(pi * x / 2), 2e-3);
    EXPECT_NEAR(g.y, 0.0, 2e-3);
  }
  EXPECT_THROW(s.value({3, 0.5}), Error);
}

TEST(Eigensolver, SignRuleAndNormalization) {
  const auto s = solve_polygon(Polygon({{0, 0}, {1, 0}, {0.3, 0.2}}), 0.02);
  EXPECT_NEAR(s.coefficients().cwiseAbs().maxCoeff(), 1.0, 1e-15);
  bool seen = false;
  for (int v : s.mesh().vertex_node)
    if (std::abs(s.coefficients()(v)) > 0.5) {
      EXPECT_GT(s.coefficients()(v), 0.0);
      seen = true;
      break;
    }
  EXPECT_TRUE(seen);
}

TEST(Eigensolver, DeterministicForFixedSeed) {
  const Polygon p({{0, 0}, {1, 0}, {0.3, 0.2}});
  const auto a = solve_polygon(p, 0.03), b = solve_polygon(p, 0.03);
  EXPECT_EQ(a.mu(), b.mu());
  EXPECT_EQ((a.coefficients() - b.coefficients()).norm(), 0.0);
}
