#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hotspots/error.hpp"
#include "hotspots/field.hpp"
#include "hotspots/geometry.hpp"

namespace hotspots {

namespace detail {
#if defined(__SIZEOF_FLOAT128__) && !defined(__clang__)
using series_real = __float128;
#else
using series_real = long double;
#endif
}  // namespace detail

/// Gamma function for x > 0 (reflection below 1/2), Lanczos g = 7, n = 9.
inline double gamma_fn(double x) {
  static constexpr std::array<double, 9> c = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) return pi / (std::sin(pi * x) * gamma_fn(1.0 - x));
  x -= 1.0;
  double a = c[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return std::sqrt(2.0 * pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

/// Largest argument for which the ascending series is used.
inline constexpr double bessel_x_max = 30.0;

/// J_nu(x) for nu >= 0, x >= 0 from the ascending series
///   sum_k (-1)^k (x/2)^(2k+nu) / (k! Gamma(k+nu+1)),
/// summed in extended precision to absorb the cancellation at larger x.
inline double bessel_j(double nu, double x) {
  if (nu < 0.0 || x < 0.0 || !std::isfinite(nu) || !std::isfinite(x))
    throw Error(ErrorCode::invalid_input, "bessel_j requires nu >= 0 and x >= 0");
  if (x > bessel_x_max) throw Error(ErrorCode::invalid_input, "bessel_j argument above x_max");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  using R = detail::series_real;
  const double lead = std::pow(0.5 * x, nu) / gamma_fn(nu + 1.0);
  const R q = -R(0.25) * R(x) * R(x);
  R term = 1, sum = 1;
  for (int k = 1; k < 400; ++k) {
    term *= q / (R(k) * (R(k) + R(nu)));
    sum += term;
    const double t = static_cast<double>(term < 0 ? -term : term);
    if (k > 0.5 * x && t < 1e-30 * std::abs(static_cast<double>(sum))) break;
  }
  return lead * static_cast<double>(sum);
}

/// d/dx J_nu(x) from the differentiated ascending series.
inline double bessel_j_derivative(double nu, double x) {
  if (nu < 0.0 || x < 0.0) throw Error(ErrorCode::invalid_input, "bessel_j_derivative domain");
  if (x > bessel_x_max) throw Error(ErrorCode::invalid_input, "argument above x_max");
  if (x == 0.0) {
    if (nu == 1.0) return 0.5;
    if (nu > 1.0 || nu == 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  using R = detail::series_real;
  // d/dx sum a_k x^(2k+nu) = sum a_k (2k+nu) x^(2k+nu-1)
  const double lead = std::pow(0.5 * x, nu) / gamma_fn(nu + 1.0) / x;
  const R q = -R(0.25) * R(x) * R(x);
  R term = 1, sum = R(nu);
  for (int k = 1; k < 400; ++k) {
    term *= q / (R(k) * (R(k) + R(nu)));
    const R add = term * (R(2 * k) + R(nu));
    sum += add;
    const double t = static_cast<double>(add < 0 ? -add : add);
    if (k > 0.5 * x && t < 1e-30 * (1.0 + std::abs(static_cast<double>(sum)))) break;
  }
  return lead * static_cast<double>(sum);
}

/// g_nu with J_nu(sqrt(mu) r) = r^nu g_nu(r^2); entire in s = r^2.
inline double bessel_g(double nu, double mu, double s) {
  using R = detail::series_real;
  const double lead = std::pow(0.5 * std::sqrt(mu), nu) / gamma_fn(nu + 1.0);
  const R q = -R(0.25) * R(mu) * R(s);
  R term = 1, sum = 1;
  for (int k = 1; k < 400; ++k) {
    term *= q / (R(k) * (R(k) + R(nu)));
    sum += term;
    const double t = static_cast<double>(term < 0 ? -term : term);
    if (t < 1e-30) break;
  }
  return lead * static_cast<double>(sum);
}

/// Neumann Fourier-Bessel series at a vertex,
///   u(r e^{i theta}) = sum_n c_n J_{n nu}(sqrt(mu) r) cos(n nu theta), nu = pi/beta,
/// evaluated in world coordinates through the vertex frame.
struct SectorSeries {
  Sector sector;
  double mu = 1.0;
  std::vector<double> coefficients;

  double order(std::size_t n) const { return static_cast<double>(n) * pi / sector.beta; }

  // Reflex sectors extend past theta = pi.
  double local_theta(const Vec2& q) const {
    const double th = std::atan2(q.y, q.x);
    return th < 0.0 && sector.beta > pi ? th + 2.0 * pi : th;
  }

  double value(Vec2 p) const {
    const Vec2 q = sector.to_local(p);
    const double r = norm(q), th = local_theta(q);
    const double k = std::sqrt(mu);
    double s = 0.0;
    for (std::size_t n = 0; n < coefficients.size(); ++n)
      s += coefficients[n] * bessel_j(order(n), k * r) * std::cos(order(n) * th);
    return s;
  }

  Vec2 gradient(Vec2 p) const {
    const Vec2 q = sector.to_local(p);
    const double r = norm(q), th = local_theta(q);
    if (r == 0.0) return {};
    const double k = std::sqrt(mu);
    double ur = 0.0, ut = 0.0;
    for (std::size_t n = 0; n < coefficients.size(); ++n) {
      const double o = order(n);
      ur += coefficients[n] * k * bessel_j_derivative(o, k * r) * std::cos(o * th);
      ut += -coefficients[n] * bessel_j(o, k * r) * o * std::sin(o * th);
    }
    const double c = std::cos(th), s = std::sin(th);
    const Vec2 local{c * ur - s * ut / r, s * ur + c * ut / r};
    return sector.world_dir(local);
  }
};

struct Annulus {
  double r_in = 0.0;
  double r_out = 0.0;
};

/// Default fit annulus: [0.05, 0.25] times the vertex clearance.
inline Annulus default_annulus(const Polygon& p, std::size_t vertex) {
  const double d = p.vertex_clearance(vertex);
  return {0.05 * d, 0.25 * d};
}

struct FitOptions {
  std::size_t terms = 5;  ///< K + 1
  std::size_t n_theta = 24;
  std::size_t n_radii = 12;
  std::optional<Annulus> annulus;  ///< defaults to default_annulus when fitting a polygon vertex
  double max_condition = 1e12;
};

struct BesselExpansion {
  std::size_t vertex = 0;
  double beta = 0.0;
  double nu = 0.0;
  double mu = 0.0;
  std::vector<double> c;
  Annulus annulus;
  double residual = 0.0;  ///< relative l2 misfit over the sample grid
  double scale = 0.0;     ///< max |u| over the sample grid
  std::size_t samples = 0;

  bool leading_defined() const { return std::abs(beta - 0.5 * pi) > 1e-9; }
  /// c_0 below a right angle, c_1 above.
  double leading() const { return beta < 0.5 * pi ? c.at(0) : c.at(1); }
};

/// Least-squares fit of c_0..c_K over a polar grid of the annulus in the
/// vertex frame.
template <ScalarSource F>
BesselExpansion fit_sector(const F& u, const Sector& sector, double mu, const Annulus& ann,
                           const FitOptions& opt = {}, std::size_t vertex_id = 0) {
  if (!(ann.r_in > 0.0) || !(ann.r_out > ann.r_in))
    throw Error(ErrorCode::invalid_input, "fit annulus must satisfy 0 < r_in < r_out");
  if (opt.terms == 0) throw Error(ErrorCode::invalid_input, "need at least one Bessel term");
  const std::size_t N = opt.n_theta * opt.n_radii;
  if (N < 10 * opt.terms)
    throw Error(ErrorCode::invalid_input, "fit grid has fewer than 10 samples per coefficient");

  const double nu = pi / sector.beta;
  const double k = std::sqrt(mu);
  Eigen::MatrixXd A(N, opt.terms);
  Eigen::VectorXd b(N);
  double scale = 0.0;
  std::size_t row = 0;
  for (std::size_t ir = 0; ir < opt.n_radii; ++ir) {
    const double r = ann.r_in + (ann.r_out - ann.r_in) * (static_cast<double>(ir) + 0.5) /
                                     static_cast<double>(opt.n_radii);
    for (std::size_t it = 0; it < opt.n_theta; ++it, ++row) {
      const double th = sector.beta * (static_cast<double>(it) + 0.5) /
                        static_cast<double>(opt.n_theta);
      for (std::size_t n = 0; n < opt.terms; ++n) {
        const double o = static_cast<double>(n) * nu;
        A(row, n) = bessel_j(o, k * r) * std::cos(o * th);
      }
      b(row) = u.value(sector.point(r, th));
      scale = std::max(scale, std::abs(b(row)));
    }
  }
  // Column equilibration: high orders are tiny at small r.
  Eigen::VectorXd colscale(opt.terms);
  for (std::size_t n = 0; n < opt.terms; ++n) {
    colscale(n) = A.col(n).norm();
    if (colscale(n) == 0.0)
      throw Error(ErrorCode::ill_conditioned, "zero column in Bessel design matrix");
    A.col(n) /= colscale(n);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > opt.max_condition)
    throw Error(ErrorCode::ill_conditioned, "Bessel design matrix is ill-conditioned");
  Eigen::VectorXd x = svd.solve(b);
  const Eigen::VectorXd fit = A * x;

  BesselExpansion e;
  e.vertex = vertex_id;
  e.beta = sector.beta;
  e.nu = nu;
  e.mu = mu;
  e.annulus = ann;
  e.samples = N;
  e.scale = scale;
  e.c.resize(opt.terms);
  for (std::size_t n = 0; n < opt.terms; ++n) e.c[n] = x(n) / colscale(n);
  const double bn = b.norm();
  e.residual = bn > 0.0 ? (b - fit).norm() / bn : (b - fit).norm();
  return e;
}

/// Fit at a polygon vertex. The annulus must stay clear of non-adjacent sides.
template <ScalarSource F>
BesselExpansion fit_coefficients(const F& u, const Polygon& poly, std::size_t vertex, double mu,
                                 const FitOptions& opt = {}) {
  if (vertex >= poly.size()) throw Error(ErrorCode::invalid_input, "vertex id out of range");
  const Annulus ann = opt.annulus.value_or(default_annulus(poly, vertex));
  if (ann.r_out >= poly.vertex_clearance(vertex))
    throw Error(ErrorCode::invalid_input, "fit annulus reaches a non-adjacent side");
  return fit_sector(u, poly.sector(vertex), mu, ann, opt, vertex);
}

struct LeadingTest {
  bool vanishes = false;
  double ratio = 0.0;  ///< |leading c| / scale
};

/// Compares |leading coefficient| with threshold * max|u| over the annulus.
inline LeadingTest leading_coefficient_test(const BesselExpansion& e, double threshold = 1e-3) {
  if (!e.leading_defined())
    throw Error(ErrorCode::precondition, "leading coefficient undefined at a right angle");
  const double ratio = e.scale > 0.0 ? std::abs(e.leading()) / e.scale : 0.0;
  return {ratio < threshold, ratio};
}

}  // namespace hotspots
