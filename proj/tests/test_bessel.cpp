#include <gtest/gtest.h>

#include <cmath>

#include "hotspots/critical.hpp"
#include "hotspots/eigensolver.hpp"

using namespace hotspots;

TEST(Bessel, HalfOrderClosedForm) {
  for (double x = 0.05; x < 30; x += 0.37) {
    const double exact = std::sqrt(2 / (pi * x)) * std::sin(x);
    EXPECT_NEAR(bessel_j(0.5, x), exact, 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST(Bessel, MatchesStdCylBessel) {
  for (double nu : {0.0, 0.3, 1.0, 1.5, 2.0, 3.7, 6.0, 12.5})
    for (double x = 0.01; x <= 30; x += 0.29) {
      EXPECT_NEAR(bessel_j(nu, x), std::cyl_bessel_j(nu, x), 1e-10) << nu << ' ' << x;
      const double lo = nu >= 1 ? std::cyl_bessel_j(nu - 1, x) : 0.0;
      if (nu >= 1) {
        EXPECT_NEAR(bessel_j_derivative(nu, x), 0.5 * (lo - std::cyl_bessel_j(nu + 1, x)), 1e-9) << nu << ' ' << x;
      }
    }
}

TEST(Bessel, DerivativeByFiniteDifference) {
  const double d = 1e-5;
  for (double nu : {0.4, 0.8, 2.0 / 3})
    for (double x : {0.2, 1.0, 5.0, 17.0}) {
      const double fd = (bessel_j(nu, x + d) - bessel_j(nu, x - d)) / (2 * d);
      EXPECT_NEAR(bessel_j_derivative(nu, x), fd, 1e-8);
    }
}

TEST(Bessel, SmallArgumentAndDomain) {
  EXPECT_EQ(bessel_j(0.0, 0.0), 1.0);
  EXPECT_EQ(bessel_j(1.3, 0.0), 0.0);
  EXPECT_NEAR(bessel_j(2.0 / 3, 1e-6), std::pow(0.5e-6, 2.0 / 3) / std::tgamma(5.0 / 3), 1e-16);
  EXPECT_THROW(bessel_j(1.0, 31.0), Error);
  EXPECT_THROW(bessel_j(-1.0, 1.0), Error);
}

TEST(Bessel, GammaMatchesStd) {
  for (double x = 0.1; x < 25; x += 0.23) EXPECT_NEAR(gamma_fn(x) / std::tgamma(x), 1.0, 1e-13) << x;
}

TEST(Bessel, FitRecoversSingleModesOnWideAnnulus) {
  Sector sec;
  sec.apex = {0.2, -0.1};
  sec.frame_angle = 0.7;
  for (double beta : {pi / 5, 2 * pi / 3, 3 * pi / 2}) {
    sec.beta = beta;
    for (std::size_t m = 0; m < 5; ++m) {
      SectorSeries s{sec, 1.0, std::vector<double>(5, 0.0)};
      s.coefficients[m] = 1.0;
      const auto e = fit_sector(s, sec, s.mu, {8.0, 24.0});
      for (std::size_t n = 0; n < 5; ++n) EXPECT_NEAR(e.c[n], n == m ? 1.0 : 0.0, 1e-8) << beta << ' ' << m << ' ' << n;
    }
  }
}

TEST(Bessel, FitRecoversSyntheticSeries) {
  const Polygon P({{0, 0}, {1, 0}, {0.3, 0.2}});
  for (std::size_t v = 0; v < 3; ++v) {
    SectorSeries s{P.sector(v), 11.0, {0.8, -0.4, 0.15, 0.05, -0.02}};
    const Annulus ann = default_annulus(P, v);
    const auto e = fit_sector(s, s.sector, s.mu, ann);
    ASSERT_EQ(e.c.size(), 5u);
    // High orders are invisible at small r; compare what each mode contributes.
    const double kr = std::sqrt(s.mu) * ann.r_out;
    for (std::size_t n = 0; n < 5; ++n)
      EXPECT_LT(std::abs(e.c[n] - s.coefficients[n]) * std::abs(std::cyl_bessel_j(s.order(n), kr)), 1e-12)
          << v << ' ' << n;
    EXPECT_LT(e.residual, 1e-12);
    EXPECT_NEAR(e.c[0], s.coefficients[0], 1e-9);
  }
}

TEST(Bessel, SeriesGradientByFiniteDifference) {
  const Polygon L({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  SectorSeries s{L.sector(3), 3.0, {0.5, 0.3, -0.2}};
  const Vec2 p{0.8, 1.15};
  const double d = 1e-6;
  const Vec2 g = s.gradient(p);
  EXPECT_NEAR(g.x, (s.value({p.x + d, p.y}) - s.value({p.x - d, p.y})) / (2 * d), 1e-7);
  EXPECT_NEAR(g.y, (s.value({p.x, p.y + d}) - s.value({p.x, p.y - d})) / (2 * d), 1e-7);
}

namespace {

struct CosX {
  double value(Vec2 p) const { return std::cos(pi * p.x); }
  Vec2 gradient(Vec2 p) const { return {-pi * std::sin(pi * p.x), 0}; }
};

}  // namespace

// cos(k r cos t) = J_0(kr) + 2 sum (-1)^n J_2n(kr) cos(2 n t): at a right
// angle the orders are 2n, so c_0 = 1 and c_n = 2 (-1)^n.
TEST(Bessel, SquareCornerCoefficientsExact) {
  const Polygon sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto e = fit_coefficients(CosX{}, sq, 0, pi * pi);
  EXPECT_NEAR(e.nu, 2.0, 1e-15);
  EXPECT_NEAR(e.c[0], 1.0, 1e-9);
  for (std::size_t n = 1; n < 5; ++n) EXPECT_NEAR(e.c[n], n % 2 ? -2.0 : 2.0, 1e-6) << n;
}

TEST(Bessel, SquareCornerCoefficientsFromSolver) {
  const Polygon sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  auto s = solve_polygon(sq, 0.04);
  ASSERT_EQ(s.multiplicity, 2);
  // Least-squares projection of cos(pi x) onto the computed eigenspace.
  const auto& d = s.dofs();
  Eigen::MatrixXd B(static_cast<Eigen::Index>(d.size()), 2);
  Eigen::VectorXd f(B.rows());
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    B(i, 0) = s.basis[0](i);
    B(i, 1) = s.basis[1](i);
    f(i) = std::cos(pi * d.coords[static_cast<std::size_t>(i)].x);
  }
  const Eigen::Vector2d a = B.colPivHouseholderQr().solve(f);
  s.set_coefficients(B * a);
  const auto e = fit_coefficients(s, sq, 0, s.mu());
  EXPECT_NEAR(e.c[0], 1.0, 1e-3);
  EXPECT_NEAR(e.c[1], -2.0, 1e-3);
  EXPECT_NEAR(e.c[2], 2.0, 2e-2);
  const auto idx = bessel_vertex_index(e);
  ASSERT_TRUE(idx.k);
  EXPECT_EQ(*idx.k, 1);
  // beta = pi/2 = k pi/2 with |a| = |2 c0 / c1| = 1: the borderline case.
  ASSERT_TRUE(idx.a);
  EXPECT_NEAR(std::abs(*idx.a), 1.0, 1e-3);
  EXPECT_FALSE(idx.index);
}

TEST(BesselIndex, CasesByAngle) {
  auto make = [](double beta, std::vector<double> c) {
    BesselExpansion e;
    e.beta = beta;
    e.nu = pi / beta;
    e.mu = 5.0;
    e.c = std::move(c);
    e.annulus = {0.5, 1.5};
    e.scale = 1.0;
    return e;
  };
  // acute corner: extremum
  EXPECT_EQ(bessel_vertex_index(make(1.0, {1, 0.3, 0.1})).index, 1);
  // obtuse corner with c1 != 0: index 0
  EXPECT_EQ(bessel_vertex_index(make(2.0, {1, 0.3, 0.1})).index, 0);
  // obtuse corner with c1 = 0 and c2 != 0, beta < pi: extremum
  EXPECT_EQ(bessel_vertex_index(make(2.0, {1, 0.0, 0.4})).index, 1);
  // reflex corner, c1 = 0: index -1
  EXPECT_EQ(bessel_vertex_index(make(4.0, {1, 0.0, 0.4})).index, -1);
  // u(v) = 0 forces 1 - k
  EXPECT_EQ(bessel_vertex_index(make(1.0, {0, 0.3})).index, 0);
  const double w = coefficient_weight(make(2.0, {1, 0.3}), 1);
  const double j = std::max(std::cyl_bessel_j(pi / 2.0, std::sqrt(5.0) * 0.5), std::cyl_bessel_j(pi / 2.0, std::sqrt(5.0) * 1.5));
  EXPECT_NEAR(w, 0.3 * j, 1e-10);
}
