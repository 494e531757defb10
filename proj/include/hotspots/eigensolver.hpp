#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "hotspots/error.hpp"
#include "hotspots/geometry.hpp"
#include "hotspots/mesh.hpp"

namespace hotspots {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Quadratic Lagrange degrees of freedom: mesh nodes first, then one per edge.
/// Local order on a triangle: v0, v1, v2, m01, m12, m20.
struct DofMap {
  std::vector<Vec2> coords;
  std::vector<std::array<int, 6>> cells;
  std::vector<int> side;    ///< side id for dofs on a side interior, else -1
  std::vector<int> vertex;  ///< polygon vertex id, else -1
  std::size_t node_count = 0;

  std::size_t size() const { return coords.size(); }
  bool on_boundary(std::size_t d) const { return side[d] >= 0 || vertex[d] >= 0; }
};

inline DofMap build_dofs(const Mesh& m) {
  DofMap d;
  d.node_count = m.nodes.size();
  d.coords = m.nodes;
  d.side = m.node_side;
  d.vertex = m.node_vertex;
  std::unordered_map<std::uint64_t, int> edge_side;
  for (const auto& e : m.boundary) edge_side[detail::edge_key(e.a, e.b)] = e.side;
  std::unordered_map<std::uint64_t, int> mid;
  d.cells.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    std::array<int, 6> c{t[0], t[1], t[2], 0, 0, 0};
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      const auto key = detail::edge_key(a, b);
      auto it = mid.find(key);
      if (it == mid.end()) {
        const int id = static_cast<int>(d.coords.size());
        d.coords.push_back((m.nodes[a] + m.nodes[b]) * 0.5);
        auto bs = edge_side.find(key);
        d.side.push_back(bs == edge_side.end() ? -1 : bs->second);
        d.vertex.push_back(-1);
        it = mid.emplace(key, id).first;
      }
      c[3 + k] = it->second;
    }
    d.cells.push_back(c);
  }
  return d;
}

namespace detail {

/// Degree-4 rule on the reference triangle, weights summing to 1.
struct QuadPoint {
  std::array<double, 3> l;
  double w;
};

inline const std::array<QuadPoint, 6>& quadrature6() {
  static const std::array<QuadPoint, 6> q = [] {
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    return std::array<QuadPoint, 6>{{{{a, a, 1 - 2 * a}, wa},
                                     {{a, 1 - 2 * a, a}, wa},
                                     {{1 - 2 * a, a, a}, wa},
                                     {{b, b, 1 - 2 * b}, wb},
                                     {{b, 1 - 2 * b, b}, wb},
                                     {{1 - 2 * b, b, b}, wb}}};
  }();
  return q;
}

inline std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
          4 * l[0] * l[1],       4 * l[1] * l[2],       4 * l[2] * l[0]};
}

/// Gradients of the six basis functions given barycentrics and grad lambda.
inline std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& l, const std::array<Vec2, 3>& g) {
  return {g[0] * (4 * l[0] - 1), g[1] * (4 * l[1] - 1), g[2] * (4 * l[2] - 1),
          (g[0] * l[1] + g[1] * l[0]) * 4.0, (g[1] * l[2] + g[2] * l[1]) * 4.0,
          (g[2] * l[0] + g[0] * l[2]) * 4.0};
}

inline std::array<Vec2, 3> lambda_gradients(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double d = orient(a, b, c);
  return {Vec2{b.y - c.y, c.x - b.x} / d, Vec2{c.y - a.y, a.x - c.x} / d,
          Vec2{a.y - b.y, b.x - a.x} / d};
}

}  // namespace detail

struct Assembly {
  SparseMatrix stiffness;
  SparseMatrix mass;
};

inline Assembly assemble(const Mesh& m, const DofMap& dofs) {
  const auto& q = detail::quadrature6();
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(dofs.cells.size() * 36);
  mt.reserve(dofs.cells.size() * 36);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tr = m.triangles[t];
    const Vec2 a = m.nodes[tr[0]], b = m.nodes[tr[1]], c = m.nodes[tr[2]];
    const double area = 0.5 * orient(a, b, c);
    if (!(area > 0.0)) throw Error(ErrorCode::meshing, "non-positive triangle in assembly");
    const auto gl = detail::lambda_gradients(a, b, c);
    double Ke[6][6] = {}, Me[6][6] = {};
    for (const auto& qp : q) {
      const auto phi = detail::p2_values(qp.l);
      const auto dphi = detail::p2_gradients(qp.l, gl);
      const double w = qp.w * area;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          Ke[i][j] += w * dot(dphi[i], dphi[j]);
          Me[i][j] += w * phi[i] * phi[j];
        }
    }
    const auto& cell = dofs.cells[t];
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        kt.emplace_back(cell[i], cell[j], Ke[i][j]);
        mt.emplace_back(cell[i], cell[j], Me[i][j]);
      }
  }
  const auto n = static_cast<Eigen::Index>(dofs.size());
  Assembly out{SparseMatrix(n, n), SparseMatrix(n, n)};
  out.stiffness.setFromTriplets(kt.begin(), kt.end());
  out.mass.setFromTriplets(mt.begin(), mt.end());
  return out;
}

inline Assembly assemble(const Mesh& m) { return assemble(m, build_dofs(m)); }

struct SolverOptions {
  double tol = 1e-10;
  int max_iterations = 500;
  int block = 8;
  double degenerate_gap = 1e-6;
  std::uint64_t seed = 20240607;
};

struct SolverDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  double shift = 0.0;
  std::vector<double> ritz_values;  ///< lowest nonzero Ritz values found
};

/// Second Neumann eigenpair on a P2 mesh with point evaluation of u and grad u.
class EigenSolution {
 public:
  EigenSolution() = default;

  EigenSolution(std::shared_ptr<const Mesh> mesh, std::shared_ptr<const DofMap> dofs, Eigen::VectorXd x,
                double mu)
      : mesh_(std::move(mesh)), dofs_(std::move(dofs)), x_(std::move(x)), mu_(mu) {
    locator_ = std::make_shared<TriangleLocator>(*mesh_);
    recover_gradients();
  }

  const Mesh& mesh() const { return *mesh_; }
  const Polygon& polygon() const { return mesh_->polygon; }
  const DofMap& dofs() const { return *dofs_; }
  const Eigen::VectorXd& coefficients() const { return x_; }
  double mu() const { return mu_; }
  double h() const { return mesh_->size.h; }

  double relative_gap = 0.0;  ///< (mu_3 - mu_2) / mu_2
  int multiplicity = 1;
  std::vector<Eigen::VectorXd> basis;  ///< M-orthonormal eigenspace basis when multiplicity 2
  SolverDiagnostics diagnostics;

  /// Triangle containing p, or throws outside_domain.
  TriangleLocator::Hit locate(const Vec2& p) const {
    const auto hit = locator_->locate(p, 1e-7);
    if (hit.triangle < 0) throw Error(ErrorCode::outside_domain, "point outside the polygon");
    return hit;
  }

  bool contains(const Vec2& p) const { return locator_->locate(p, 1e-7).triangle >= 0; }

  std::optional<TriangleLocator::Hit> locate_if(const Vec2& p) const {
    const auto hit = locator_->locate(p, 1e-7);
    if (hit.triangle < 0) return std::nullopt;
    return hit;
  }

  double value(const Vec2& p) const {
    const auto hit = locate(p);
    return value_in(hit.triangle, hit.bary);
  }

  Vec2 gradient(const Vec2& p) const {
    const auto hit = locate(p);
    return gradient_in(hit.triangle, hit.bary);
  }

  double value_in(int t, const std::array<double, 3>& l) const {
    const auto phi = detail::p2_values(l);
    const auto& c = dofs_->cells[t];
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s += phi[i] * x_(c[i]);
    return s;
  }

  Vec2 gradient_in(int t, const std::array<double, 3>& l) const {
    const auto dphi = detail::p2_gradients(l, lambda_grads_[t]);
    const auto& c = dofs_->cells[t];
    Vec2 g;
    for (int i = 0; i < 6; ++i) g += dphi[i] * x_(c[i]);
    return g;
  }

  /// Element gradient at the three corners of triangle t (it is linear there).
  std::array<Vec2, 3> corner_gradients(int t) const {
    return {gradient_in(t, {1, 0, 0}), gradient_in(t, {0, 1, 0}), gradient_in(t, {0, 0, 1})};
  }

  const std::array<Vec2, 3>& lambda_gradients(int t) const { return lambda_grads_[t]; }

  /// Area-averaged gradient at each dof.
  const std::vector<Vec2>& recovered_gradient() const { return recovered_; }

  /// Continuous gradient: P2 interpolation of the recovered dof gradients.
  Vec2 smooth_gradient(const Vec2& p) const {
    const auto hit = locate(p);
    const auto phi = detail::p2_values(hit.bary);
    const auto& c = dofs_->cells[hit.triangle];
    Vec2 g;
    for (int i = 0; i < 6; ++i) g += recovered_[c[i]] * phi[i];
    return g;
  }

  /// Flips the sign of u (and of the basis) in place.
  void negate() {
    x_ = -x_;
    for (auto& g : recovered_) g = -g;
    for (auto& b : basis) b = -b;
  }

  /// Replaces u by another element of the eigenspace (M-orthonormal combination).
  void set_coefficients(Eigen::VectorXd x) {
    x_ = std::move(x);
    recover_gradients();
  }

  /// Scales so that max |u| over dofs is 1.
  void normalize_max() {
    const double m = x_.cwiseAbs().maxCoeff();
    if (m > 0.0) {
      x_ /= m;
      for (auto& g : recovered_) g = g / m;
    }
  }

  /// Static sign rule: first polygon vertex with |u| > 0.5 is positive,
  /// otherwise the largest |u| is positive.
  void apply_sign_rule() {
    for (int v : mesh_->vertex_node) {
      const double u = x_(v);
      if (std::abs(u) > 0.5) {
        if (u < 0.0) negate();
        return;
      }
    }
    Eigen::Index i = 0;
    x_.cwiseAbs().maxCoeff(&i);
    if (x_(i) < 0.0) negate();
  }

  /// Integral of u over the domain.
  double integral() const {
    const auto& q = detail::quadrature6();
    double s = 0.0;
    for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
      const double area = mesh_->triangle_area(t);
      for (const auto& qp : q) s += qp.w * area * value_in(static_cast<int>(t), qp.l);
    }
    return s;
  }

 private:
  void recover_gradients() {
    const auto& m = *mesh_;
    lambda_grads_.resize(m.triangles.size());
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      const auto& tr = m.triangles[t];
      lambda_grads_[t] = detail::lambda_gradients(m.nodes[tr[0]], m.nodes[tr[1]], m.nodes[tr[2]]);
    }
    recovered_.assign(dofs_->size(), Vec2{});
    std::vector<double> weight(dofs_->size(), 0.0);
    static const std::array<std::array<double, 3>, 6> local = {{{1, 0, 0},
                                                                 {0, 1, 0},
                                                                 {0, 0, 1},
                                                                 {0.5, 0.5, 0},
                                                                 {0, 0.5, 0.5},
                                                                 {0.5, 0, 0.5}}};
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      const double area = m.triangle_area(t);
      const auto& c = dofs_->cells[t];
      for (int i = 0; i < 6; ++i) {
        recovered_[c[i]] += gradient_in(static_cast<int>(t), local[i]) * area;
        weight[c[i]] += area;
      }
    }
    for (std::size_t d = 0; d < recovered_.size(); ++d) recovered_[d] = recovered_[d] / weight[d];
  }

  std::shared_ptr<const Mesh> mesh_;
  std::shared_ptr<const DofMap> dofs_;
  std::shared_ptr<TriangleLocator> locator_;
  Eigen::VectorXd x_;
  double mu_ = 0.0;
  std::vector<std::array<Vec2, 3>> lambda_grads_;
  std::vector<Vec2> recovered_;
};

/// Smallest nonzero eigenpair of K x = mu M x by shift-invert subspace
/// iteration with the constant mode deflated.
inline EigenSolution solve_second(const Mesh& mesh, const SolverOptions& opt = {}) {
  auto mesh_ptr = std::make_shared<const Mesh>(mesh);
  auto dofs = std::make_shared<const DofMap>(build_dofs(*mesh_ptr));
  const Assembly A = assemble(*mesh_ptr, *dofs);
  const auto n = static_cast<Eigen::Index>(dofs->size());
  const int b = std::max(3, opt.block);
  if (n < b + 2) throw Error(ErrorCode::solver, "mesh too coarse for the eigensolver");

  const double diam = mesh.polygon.diameter();
  const double shift = 0.05 * (pi / diam) * (pi / diam);
  SparseMatrix S = A.stiffness + shift * A.mass;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::solver, "factorization failed");

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd Mones = A.mass * ones;
  const double mass_total = ones.dot(Mones);
  auto deflate = [&](Eigen::MatrixXd& X) {
    for (int j = 0; j < X.cols(); ++j) X.col(j) -= ones * (Mones.dot(X.col(j)) / mass_total);
  };

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXd X(n, b);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < b; ++j) X(i, j) = uni(rng);
  deflate(X);

  Eigen::VectorXd theta;
  SolverDiagnostics diag;
  diag.shift = shift;
  double res = 0.0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    Eigen::MatrixXd Y = ldlt.solve(A.mass * X);
    deflate(Y);
    // Rayleigh-Ritz on span(Y).
    const Eigen::MatrixXd KY = A.stiffness * Y, MY = A.mass * Y;
    Eigen::MatrixXd Kp = Y.transpose() * KY, Mp = Y.transpose() * MY;
    Kp = 0.5 * (Kp + Kp.transpose());
    Mp = 0.5 * (Mp + Mp.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Kp, Mp);
    if (ges.info() != Eigen::Success) throw Error(ErrorCode::solver, "Rayleigh-Ritz step failed");
    theta = ges.eigenvalues();
    X = Y * ges.eigenvectors();
    // Residuals of the two lowest Ritz pairs (three when nearly degenerate).
    res = 0.0;
    const Eigen::MatrixXd KX = A.stiffness * X.leftCols(3), MX = A.mass * X.leftCols(3);
    for (int j = 0; j < 3; ++j) {
      const double r = (KX.col(j) - theta(j) * MX.col(j)).norm() / (theta(j) * MX.col(j).norm());
      if (j < 2) res = std::max(res, r);
      else if (theta(2) - theta(1) < 10 * opt.degenerate_gap * theta(1)) res = std::max(res, r);
    }
    if (res <= opt.tol) break;
  }
  diag.iterations = it + 1;
  diag.residual = res;
  if (res > opt.tol)
    throw Error(ErrorCode::solver, "eigensolver did not converge within the iteration budget");
  for (int j = 0; j < std::min<int>(b, 4); ++j) diag.ritz_values.push_back(theta(j));

  const double mu = theta(0);
  EigenSolution sol(mesh_ptr, dofs, X.col(0), mu);
  sol.relative_gap = (theta(1) - theta(0)) / theta(0);
  sol.diagnostics = diag;
  if (sol.relative_gap < opt.degenerate_gap) {
    sol.multiplicity = 2;
    sol.basis = {X.col(0), X.col(1)};
  }
  sol.normalize_max();
  sol.apply_sign_rule();
  return sol;
}

/// Convenience: mesh and solve in one call.
inline EigenSolution solve_polygon(const Polygon& p, double h, const MeshOptions& mopt = {},
                                   const SolverOptions& sopt = {}) {
  return solve_second(triangulate(p, h, mopt), sopt);
}

}  // namespace hotspots
