#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hotspots/error.hpp"

namespace hotspots {

inline constexpr double pi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return a *= (1.0 / s); }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline Vec2 normalized(const Vec2& a) { return a / norm(a); }
/// Counterclockwise quarter turn.
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }
inline Vec2 rotate(const Vec2& a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}
inline Vec2 lerp(const Vec2& a, const Vec2& b, double t) { return a + (b - a) * t; }

/// Twice the signed area of (a, b, c); positive for counterclockwise turns.
constexpr double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross(b - a, c - a);
}

inline double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + d * t);
}

/// Proper or touching intersection of closed segments [a,b] and [c,d].
inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d,
                               double eps = 0.0) {
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
      ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)))
    return true;
  auto on_seg = [eps](const Vec2& p, const Vec2& q, const Vec2& r, double o) {
    const double scale = std::max(1.0, norm(q - p));
    return std::abs(o) <= eps * scale &&
           distance_to_segment(r, p, q) <= eps * scale + 1e-15;
  };
  return on_seg(c, d, a, d1) || on_seg(c, d, b, d2) || on_seg(a, b, c, d3) ||
         on_seg(a, b, d, d4);
}

inline double wrap_two_pi(double a) {
  a = std::fmod(a, 2.0 * pi);
  return a < 0.0 ? a + 2.0 * pi : a;
}

/// Representative of `a` modulo pi in [0, pi).
inline double wrap_pi(double a) {
  a = std::fmod(a, pi);
  return a < 0.0 ? a + pi : a;
}

struct GeometryTolerances {
  double min_separation = 1e-10;  ///< relative to the polygon diameter
  double orthogonality = 1e-9;    ///< |nu_i . nu_j| at or below this counts as orthogonal
  double straight_angle = 1e-9;   ///< |beta - pi| at or below this counts as a straight vertex
  double dot_slack = 1e-12;       ///< sign slack in the Lip-1 normal criterion
};

/// Local polar frame of a polygon vertex. The first side ray (towards the
/// next vertex) is theta = 0, the second (towards the previous vertex) is
/// theta = beta.
struct Sector {
  Vec2 apex;
  double beta = 0.0;
  double frame_angle = 0.0;  ///< direction of the theta = 0 ray in world coordinates

  Vec2 to_local(const Vec2& p) const { return rotate(p - apex, -frame_angle); }
  Vec2 to_world(const Vec2& q) const { return apex + rotate(q, frame_angle); }
  Vec2 world_dir(const Vec2& local_dir) const { return rotate(local_dir, frame_angle); }
  Vec2 local_dir(const Vec2& world_dir) const { return rotate(world_dir, -frame_angle); }
  Vec2 point(double r, double theta) const {
    return to_world({r * std::cos(theta), r * std::sin(theta)});
  }
};

/// Simple counterclockwise polygon. Vertices with angle pi are kept.
class Polygon {
 public:
  Polygon() = default;

  /// Clockwise input is reversed (labels follow their vertices).
  explicit Polygon(std::vector<Vec2> vertices, std::vector<std::string> labels = {},
                   const GeometryTolerances& tol = {})
      : vertices_(std::move(vertices)), labels_(std::move(labels)) {
    if (vertices_.size() < 3)
      throw Error(ErrorCode::degenerate_geometry, "polygon needs at least 3 vertices");
    if (!labels_.empty() && labels_.size() != vertices_.size())
      throw Error(ErrorCode::invalid_input, "label count does not match vertex count");
    for (const auto& v : vertices_)
      if (!std::isfinite(v.x) || !std::isfinite(v.y))
        throw Error(ErrorCode::invalid_input, "non-finite vertex coordinate");
    if (signed_area_of(vertices_) < 0.0) {
      std::reverse(vertices_.begin(), vertices_.end());
      std::reverse(labels_.begin(), labels_.end());
    }
    validate(tol);
  }

  std::size_t size() const { return vertices_.size(); }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Vec2& vertex(std::size_t i) const { return vertices_[i % size()]; }
  std::size_t next(std::size_t i) const { return (i + 1) % size(); }
  std::size_t prev(std::size_t i) const { return (i + size() - 1) % size(); }

  /// Side i runs from vertex i to vertex i+1.
  std::pair<Vec2, Vec2> side(std::size_t i) const { return {vertex(i), vertex(next(i))}; }
  double side_length(std::size_t i) const { return distance(vertex(i), vertex(next(i))); }
  Vec2 side_tangent(std::size_t i) const { return normalized(vertex(next(i)) - vertex(i)); }
  Vec2 side_normal(std::size_t i) const {
    const Vec2 t = side_tangent(i);
    return {t.y, -t.x};
  }
  /// Direction angle of side i in [0, 2pi).
  double side_direction(std::size_t i) const {
    const Vec2 t = side_tangent(i);
    return wrap_two_pi(std::atan2(t.y, t.x));
  }

  double angle(std::size_t i) const {
    const Vec2 d1 = vertex(next(i)) - vertex(i);
    const Vec2 d2 = vertex(prev(i)) - vertex(i);
    double a = std::atan2(cross(d1, d2), dot(d1, d2));
    if (a <= 0.0) a += 2.0 * pi;
    return a;
  }

  std::vector<double> angles() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = angle(i);
    return out;
  }

  Sector sector(std::size_t i) const {
    const Vec2 d1 = vertex(next(i)) - vertex(i);
    return {vertex(i), angle(i), std::atan2(d1.y, d1.x)};
  }

  double area() const { return signed_area_of(vertices_); }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) d = std::max(d, distance(vertex(i), vertex(j)));
    return d;
  }

  std::pair<Vec2, Vec2> bounding_box() const {
    Vec2 lo = vertices_.front(), hi = vertices_.front();
    for (const auto& v : vertices_) {
      lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
      hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    return {lo, hi};
  }

  Vec2 centroid() const {
    double a = 0.0;
    Vec2 c;
    for (std::size_t i = 0; i < size(); ++i) {
      const Vec2& p = vertex(i);
      const Vec2& q = vertex(next(i));
      const double w = cross(p, q);
      a += w;
      c += (p + q) * w;
    }
    return c / (3.0 * a);
  }

  /// Even-odd test; points on the boundary may go either way.
  bool contains(const Vec2& p) const {
    bool inside = false;
    for (std::size_t i = 0, j = size() - 1; i < size(); j = i++) {
      const Vec2& a = vertices_[i];
      const Vec2& b = vertices_[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x) inside = !inside;
      }
    }
    return inside;
  }

  double distance_to_side(const Vec2& p, std::size_t i) const {
    const auto [a, b] = side(i);
    return distance_to_segment(p, a, b);
  }

  double distance_to_boundary(const Vec2& p) const {
    double d = distance_to_side(p, 0);
    for (std::size_t i = 1; i < size(); ++i) d = std::min(d, distance_to_side(p, i));
    return d;
  }

  /// Closest side to `p`.
  std::size_t nearest_side(const Vec2& p) const {
    std::size_t best = 0;
    double d = distance_to_side(p, 0);
    for (std::size_t i = 1; i < size(); ++i) {
      const double di = distance_to_side(p, i);
      if (di < d) { d = di; best = i; }
    }
    return best;
  }

  /// Distance from vertex i to the nearest side not incident to it.
  double vertex_clearance(std::size_t i) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < size(); ++s) {
      if (s == i || s == prev(i)) continue;
      d = std::min(d, distance_to_side(vertex(i), s));
    }
    return d;
  }

  bool is_straight(std::size_t i, const GeometryTolerances& tol = {}) const {
    return std::abs(angle(i) - pi) <= tol.straight_angle;
  }

  /// Indices of vertices whose angle differs from pi.
  std::vector<std::size_t> corner_indices(const GeometryTolerances& tol = {}) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (!is_straight(i, tol)) out.push_back(i);
    return out;
  }

  bool is_convex(double slack = 1e-12) const {
    for (std::size_t i = 0; i < size(); ++i)
      if (angle(i) > pi + slack) return false;
    return true;
  }

  static double signed_area_of(const std::vector<Vec2>& v) {
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) a += cross(v[i], v[(i + 1) % v.size()]);
    return 0.5 * a;
  }

 private:
  void validate(const GeometryTolerances& tol) const {
    const double scale = diameter();
    if (!(scale > 0.0)) throw Error(ErrorCode::degenerate_geometry, "polygon has zero extent");
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i)
      if (side_length(i) <= tol.min_separation * scale)
        throw Error(ErrorCode::degenerate_geometry,
                    "consecutive vertices " + std::to_string(i) + " and " +
                        std::to_string(next(i)) + " coincide");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;
        const auto [a, b] = side(i);
        const auto [c, d] = side(j);
        if (segments_intersect(a, b, c, d, 1e-14))
          throw Error(ErrorCode::degenerate_geometry,
                      "sides " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
      }
      // Adjacent sides folding back onto each other.
      const double a = angle(i);
      if (a < 1e-12 || a > 2.0 * pi - 1e-12)
        throw Error(ErrorCode::degenerate_geometry, "zero angle at vertex " + std::to_string(i));
    }
    if (area() <= 0.0) throw Error(ErrorCode::degenerate_geometry, "polygon has no area");
  }

  std::vector<Vec2> vertices_;
  std::vector<std::string> labels_;
};

inline Polygon regular_polygon(std::size_t n, double circumradius = 1.0, Vec2 center = {}) {
  std::vector<Vec2> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
    v[i] = center + Vec2{circumradius * std::cos(a), circumradius * std::sin(a)};
  }
  return Polygon(std::move(v));
}

/// Isosceles triangle with the given apex angle and unit base on the x-axis,
/// centred at the origin. Vertex order: base-left, base-right, apex.
inline Polygon isosceles_triangle(double apex_angle, double base = 1.0) {
  const double h = 0.5 * base / std::tan(0.5 * apex_angle);
  return Polygon({{-0.5 * base, 0.0}, {0.5 * base, 0.0}, {0.0, h}});
}

inline bool has_orthogonal_sides(const Polygon& p, const GeometryTolerances& tol = {}) {
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (std::abs(dot(p.side_normal(i), p.side_normal(j))) <= tol.orthogonality) return true;
  return false;
}

/// Smallest |nu_i . nu_j| over all side pairs.
inline double min_normal_dot(const Polygon& p) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      m = std::min(m, std::abs(dot(p.side_normal(i), p.side_normal(j))));
  return m;
}

// ---------------------------------------------------------------------------
// Lip-1 classification

struct Lip1Result {
  bool is_lip1 = false;
  /// Side ids of one witnessing partition (Gamma+, Gamma-), each a contiguous
  /// run of the cyclic side list starting at its first element.
  std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> partition;
  /// Number of distinct contiguous partitions that satisfy the criterion.
  std::size_t witnesses = 0;
};

/// Normal-vector criterion over every contiguous cyclic bipartition of the
/// sides: dot products are >= 0 within each part and <= 0 across parts.
inline Lip1Result lip1_classify(const Polygon& p, const GeometryTolerances& tol = {}) {
  const std::size_t n = p.size();
  std::vector<Vec2> nu(n);
  for (std::size_t i = 0; i < n; ++i) nu[i] = p.side_normal(i);

  Lip1Result result;
  std::vector<char> in_plus(n);
  // Each unordered partition {A, complement} is visited once by requiring
  // side 0 to be in A.
  for (std::size_t start = 0; start < n; ++start) {
    for (std::size_t len = 1; len < n; ++len) {
      // A = sides start, start+1, ..., start+len-1 (cyclic)
      bool has_zero = false;
      for (std::size_t k = 0; k < n; ++k) in_plus[k] = 0;
      for (std::size_t k = 0; k < len; ++k) in_plus[(start + k) % n] = 1;
      has_zero = in_plus[0];
      if (!has_zero) continue;
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i)
        for (std::size_t j = i + 1; j < n && ok; ++j) {
          const double d = dot(nu[i], nu[j]);
          ok = in_plus[i] == in_plus[j] ? d >= -tol.dot_slack : d <= tol.dot_slack;
        }
      if (!ok) continue;
      ++result.witnesses;
      if (!result.is_lip1) {
        result.is_lip1 = true;
        std::vector<std::size_t> plus, minus;
        for (std::size_t k = 0; k < len; ++k) plus.push_back((start + k) % n);
        for (std::size_t k = len; k < n; ++k) minus.push_back((start + k) % n);
        result.partition = std::make_pair(std::move(plus), std::move(minus));
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Deformation paths

/// A one-parameter family t in [0, 1] of polygons with a fixed vertex count
/// and a fixed vertex correspondence.
class DeformationPath {
 public:
  enum class Kind { constant, vertex_lerp, lip1_reduction, breaking };

  struct Breaking {
    Polygon triangle;
    std::size_t side = 0;
    Vec2 w0, w1;
    double epsilon = 0.0;
  };

  static DeformationPath constant(const Polygon& p) {
    DeformationPath d;
    d.kind_ = Kind::constant;
    d.keyframes_ = {p.vertices(), p.vertices()};
    return d;
  }

  /// Piecewise-linear interpolation of vertex positions through keyframes at
  /// equally spaced parameters.
  static DeformationPath from_keyframes(Kind kind, std::vector<std::vector<Vec2>> keyframes) {
    if (keyframes.size() < 2)
      throw Error(ErrorCode::invalid_input, "a deformation path needs at least two keyframes");
    for (const auto& k : keyframes)
      if (k.size() != keyframes.front().size())
        throw Error(ErrorCode::invalid_input, "keyframes must share the vertex count");
    DeformationPath d;
    d.kind_ = kind;
    d.keyframes_ = std::move(keyframes);
    return d;
  }

  static DeformationPath vertex_lerp(const Polygon& a, const Polygon& b) {
    return from_keyframes(Kind::vertex_lerp, {a.vertices(), b.vertices()});
  }

  static DeformationPath breaking(Breaking spec) {
    DeformationPath d;
    d.kind_ = Kind::breaking;
    d.breaking_ = std::move(spec);
    return d;
  }

  Kind kind() const { return kind_; }
  const std::vector<std::vector<Vec2>>& keyframes() const { return keyframes_; }
  const std::optional<Breaking>& breaking_spec() const { return breaking_; }
  std::size_t segments() const { return keyframes_.empty() ? 1 : keyframes_.size() - 1; }

  std::size_t vertex_count() const {
    return breaking_ ? 4 : keyframes_.front().size();
  }

  Polygon at(double t) const;

 private:
  Kind kind_ = Kind::constant;
  std::vector<std::vector<Vec2>> keyframes_;
  std::optional<Breaking> breaking_;
};

inline const char* to_string(DeformationPath::Kind k) {
  switch (k) {
    case DeformationPath::Kind::constant: return "constant";
    case DeformationPath::Kind::vertex_lerp: return "vertex-lerp";
    case DeformationPath::Kind::lip1_reduction: return "lip1-reduction";
    case DeformationPath::Kind::breaking: return "breaking";
  }
  return "unknown";
}

/// Q(T, w, eps): convex hull of the triangle and w pushed outward by eps,
/// returned as a quadrilateral whose new vertex follows vertex `side`.
inline Polygon break_triangle(const Polygon& tri, std::size_t side, const Vec2& w, double eps) {
  if (tri.size() != 3) throw Error(ErrorCode::precondition, "break_triangle needs a triangle");
  if (side >= 3) throw Error(ErrorCode::invalid_input, "side id out of range");
  if (!(eps >= 0.0)) throw Error(ErrorCode::precondition, "breaking distance must be >= 0");
  const auto [a, b] = tri.side(side);
  const double len = distance(a, b);
  const double s = dot(w - a, b - a) / (len * len);
  const double off = std::abs(cross(b - a, w - a)) / len;
  if (off > 1e-9 * len) throw Error(ErrorCode::precondition, "break point is not on the side");
  if (s <= 1e-9 || s >= 1.0 - 1e-9)
    throw Error(ErrorCode::precondition, "break point must lie strictly inside the side");
  const Vec2 wp = a + (b - a) * s + tri.side_normal(side) * eps;
  std::vector<Vec2> v;
  for (std::size_t i = 0; i < 3; ++i) {
    v.push_back(tri.vertex(i));
    if (i == side) v.push_back(wp);
  }
  // The hull keeps all four points only while the pushed point does not
  // swallow an end of the side.
  const double da = s * len, db = (1.0 - s) * len;
  if (std::atan2(eps, da) >= tri.angle(side) || std::atan2(eps, db) >= tri.angle(tri.next(side)))
    throw Error(ErrorCode::precondition,
                "breaking distance too large: the hull loses a triangle vertex");
  return Polygon(std::move(v));
}

inline Polygon DeformationPath::at(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  if (breaking_) {
    const Breaking& b = *breaking_;
    const Vec2 w = lerp(b.w0, b.w1, t);
    // sin(pi) is not exactly zero in floating point.
    const double prof = (t == 0.0 || t == 1.0) ? 0.0 : std::sin(t * pi);
    return break_triangle(b.triangle, b.side, w, b.epsilon * prof);
  }
  const std::size_t segs = keyframes_.size() - 1;
  const double x = t * static_cast<double>(segs);
  std::size_t k = std::min(static_cast<std::size_t>(x), segs - 1);
  const double local = x - static_cast<double>(k);
  const auto& from = keyframes_[k];
  const auto& to = keyframes_[k + 1];
  std::vector<Vec2> v(from.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = lerp(from[i], to[i], local);
  return Polygon(std::move(v));
}

/// Breaking family Q(T, w_t, eps * sin(t pi)) with w_t moving linearly from
/// w0 to w1 along side `side`.
inline DeformationPath breaking_family(const Polygon& tri, std::size_t side, const Vec2& w0,
                                       const Vec2& w1, double eps) {
  // Validates both endpoints and the mid-path configuration.
  (void)break_triangle(tri, side, w0, 0.0);
  (void)break_triangle(tri, side, w1, 0.0);
  (void)break_triangle(tri, side, lerp(w0, w1, 0.5), eps);
  return DeformationPath::breaking({tri, side, w0, w1, eps});
}

namespace detail {

/// Vertex ids of the polygon with straight vertices removed, in order.
inline std::vector<std::size_t> effective_corners(const std::vector<Vec2>& v,
                                                  const GeometryTolerances& tol) {
  const Polygon p(v);
  return p.corner_indices(tol);
}

inline bool sample_ok(const std::vector<Vec2>& v, const GeometryTolerances& tol, double margin) {
  try {
    const Polygon p(v);
    const auto corners = p.corner_indices(tol);
    std::vector<Vec2> reduced;
    for (auto c : corners) reduced.push_back(v[c]);
    const Polygon r(reduced);
    return lip1_classify(r, tol).is_lip1 && min_normal_dot(r) > margin;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

/// Path from a Lip-1 polygon (t = 0) to an obtuse triangle (t = 1) obtained
/// by repeatedly straightening the vertex shared by two adjacent sides of the
/// same normal class. Collapsed vertices stay in the vertex list with angle pi.
inline DeformationPath lip1_reduction_path(const Polygon& poly, const GeometryTolerances& tol = {},
                                           double margin = 1e-6) {
  {
    const auto corners = poly.corner_indices(tol);
    std::vector<Vec2> reduced;
    for (auto c : corners) reduced.push_back(poly.vertex(c));
    const Polygon r(reduced);
    if (!lip1_classify(r, tol).is_lip1)
      throw Error(ErrorCode::precondition, "polygon is not Lip-1");
    if (has_orthogonal_sides(r, tol))
      throw Error(ErrorCode::precondition, "polygon has orthogonal sides");
  }

  std::vector<std::vector<Vec2>> keyframes{poly.vertices()};
  std::vector<Vec2> current = poly.vertices();
  const std::size_t n = current.size();

  while (true) {
    const auto corners = detail::effective_corners(current, tol);
    const std::size_t m = corners.size();
    if (m <= 3) break;
    std::vector<Vec2> reduced;
    for (auto c : corners) reduced.push_back(current[c]);
    const Polygon r(reduced);
    const auto lip = lip1_classify(r, tol);
    if (!lip.is_lip1) throw Error(ErrorCode::precondition, "intermediate polygon lost Lip-1");
    std::vector<char> plus(m, 0);
    for (auto s : lip.partition->first) plus[s] = 1;

    bool advanced = false;
    // Reduced side j runs from corner j to corner j+1; sides j-1 and j share corner j.
    for (std::size_t j = 0; j < m && !advanced; ++j) {
      const std::size_t sa = (j + m - 1) % m, sb = j;
      if (plus[sa] != plus[sb]) continue;
      if (distance(r.side_normal(sa), r.side_normal(sb)) < 1e-12) continue;
      const std::size_t ia = corners[(j + m - 1) % m], iv = corners[j], ib = corners[(j + 1) % m];
      const Vec2 a = current[ia], v = current[iv], b = current[ib];
      const Vec2 target = (a + b) * 0.5;

      // Straight vertices along the two sides keep their fractional position.
      std::vector<std::pair<std::size_t, double>> riders_a, riders_b;
      for (std::size_t k = (ia + 1) % n; k != iv; k = (k + 1) % n)
        riders_a.emplace_back(k, distance(current[k], a) / distance(v, a));
      for (std::size_t k = (iv + 1) % n; k != ib; k = (k + 1) % n)
        riders_b.emplace_back(k, distance(current[k], v) / distance(b, v));
      auto place = [&](const Vec2& vt) {
        std::vector<Vec2> out = current;
        out[iv] = vt;
        for (auto [k, f] : riders_a) out[k] = lerp(a, vt, f);
        for (auto [k, f] : riders_b) out[k] = lerp(vt, b, f);
        return out;
      };

      bool ok = true;
      for (int s = 1; s <= 8 && ok; ++s) {
        const double t = s / 8.0;
        ok = detail::sample_ok(place(lerp(v, target, t)), tol, margin);
      }
      if (!ok) continue;
      current = place(target);
      keyframes.push_back(current);
      advanced = true;
    }
    if (!advanced)
      throw Error(ErrorCode::precondition,
                  "no collapsible vertex pair found in the Lip-1 reduction");
  }

  if (keyframes.size() == 1) keyframes.push_back(keyframes.front());
  return DeformationPath::from_keyframes(DeformationPath::Kind::lip1_reduction,
                                         std::move(keyframes));
}

}  // namespace hotspots
