#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hotspots/error.hpp"
#include "hotspots/geometry.hpp"

namespace hotspots {

struct MeshOptions {
  double min_angle_deg = 20.0;
  /// Per polygon vertex grading exponent; empty selects the default rule.
  std::vector<double> grading;
  /// Floor on the local size, relative to h.
  double min_size_ratio = 1e-4;
  std::size_t max_nodes = 2'000'000;
};

/// Default exponent: 0 for convex corners, 1 - pi/beta at reflex corners.
inline std::vector<double> default_grading(const Polygon& p) {
  std::vector<double> g(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double b = p.angle(i);
    if (b > pi + 1e-9) g[i] = 1.0 - pi / b;
  }
  return g;
}

/// Target element size h * (r_i / diam)^{g_i}, minimised over graded vertices.
struct SizeField {
  double h = 0.0;
  double diam = 1.0;
  double floor = 0.0;
  std::vector<Vec2> corners;
  std::vector<double> grading;

  double operator()(const Vec2& p) const {
    double s = h;
    for (std::size_t i = 0; i < corners.size(); ++i) {
      if (grading[i] <= 0.0) continue;
      const double r = distance(p, corners[i]);
      s = std::min(s, h * std::pow(std::min(1.0, r / diam), grading[i]));
    }
    return std::max(s, floor);
  }
};

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int side = 0;
};

/// Conforming triangulation of a polygon. Triangles are counterclockwise.
struct Mesh {
  Polygon polygon;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
  std::vector<int> vertex_node;  ///< polygon vertex -> node id
  std::vector<int> node_vertex;  ///< node -> polygon vertex id or -1
  std::vector<int> node_side;    ///< node -> side id for side-interior boundary nodes, else -1
  std::vector<double> grading;
  SizeField size;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  double triangle_area(std::size_t t) const {
    const auto& tr = triangles[t];
    return 0.5 * orient(nodes[tr[0]], nodes[tr[1]], nodes[tr[2]]);
  }

  double total_area() const {
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
    return a;
  }

  /// Smallest interior angle of triangle t, radians.
  double min_angle(std::size_t t) const {
    const auto& tr = triangles[t];
    double m = pi;
    for (int k = 0; k < 3; ++k) {
      const Vec2 a = nodes[tr[k]], b = nodes[tr[(k + 1) % 3]], c = nodes[tr[(k + 2) % 3]];
      const Vec2 u = b - a, v = c - a;
      m = std::min(m, std::atan2(std::abs(cross(u, v)), dot(u, v)));
    }
    return m;
  }

  /// True when triangle t touches a polygon corner whose angle is below `angle`.
  bool touches_sharp_corner(std::size_t t, double angle) const {
    for (int k = 0; k < 3; ++k) {
      const int v = node_vertex[triangles[t][k]];
      if (v >= 0 && polygon.angle(static_cast<std::size_t>(v)) < angle) return true;
    }
    // A triangle spanning the two sides of a sharp corner near its apex.
    for (int k = 0; k < 3; ++k) {
      const int s1 = node_side[triangles[t][k]], s2 = node_side[triangles[t][(k + 1) % 3]];
      if (s1 < 0 || s2 < 0 || s1 == s2) continue;
      const std::size_t n = polygon.size();
      std::optional<std::size_t> apex;
      if (static_cast<std::size_t>(s2) == (static_cast<std::size_t>(s1) + 1) % n)
        apex = static_cast<std::size_t>(s2);
      if (static_cast<std::size_t>(s1) == (static_cast<std::size_t>(s2) + 1) % n)
        apex = static_cast<std::size_t>(s1);
      if (apex && polygon.angle(*apex) < angle) return true;
    }
    return false;
  }

  double longest_edge(std::size_t t) const {
    const auto& tr = triangles[t];
    double m = 0.0;
    for (int k = 0; k < 3; ++k) m = std::max(m, distance(nodes[tr[k]], nodes[tr[(k + 1) % 3]]));
    return m;
  }

  /// Characteristic local length of triangle t.
  double element_size(std::size_t t) const { return longest_edge(t); }

  bool is_boundary_node(int n) const { return node_side[n] >= 0 || node_vertex[n] >= 0; }
};

namespace detail {

inline double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - bdy * cdx) - bd * (adx * cdy - ady * cdx) +
         cd * (adx * bdy - ady * bdx);
}

inline Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a, ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = dot(ab, ab), ac2 = dot(ac, ac);
  return a + Vec2{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
}

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// Incremental Bowyer-Watson triangulation with Delaunay refinement.
class DelaunayRefiner {
 public:
  struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> nb{-1, -1, -1};  ///< nb[i] is across the edge opposite v[i]
    bool alive = true;
  };

  struct Segment {
    int a = 0, b = 0;
    int side = 0;
    bool alive = true;
  };

  DelaunayRefiner(const Polygon& poly, const SizeField& size, const MeshOptions& opt)
      : poly_(poly), size_(size), opt_(opt) {}

  Mesh run() {
    build_boundary();
    remove_exterior();
    split_encroached_by_vertices();
    refine();
    return compact();
  }

 private:
  // ---- bookkeeping -------------------------------------------------------

  int add_point(const Vec2& p, int vertex_id, int side_id) {
    pts_.push_back(p);
    node_vertex_.push_back(vertex_id);
    node_side_.push_back(side_id);
    if (pts_.size() > opt_.max_nodes)
      throw Error(ErrorCode::meshing, "mesh node budget exhausted");
    return static_cast<int>(pts_.size()) - 1;
  }

  double orient_tri(int t) const {
    const auto& v = tris_[t].v;
    return orient(pts_[v[0]], pts_[v[1]], pts_[v[2]]);
  }

  bool in_circumcircle(int t, const Vec2& p) const {
    const auto& v = tris_[t].v;
    return incircle(pts_[v[0]], pts_[v[1]], pts_[v[2]], p) > 0.0;
  }

  /// Walks towards p. Returns -1 when the walk leaves the triangulation.
  int locate(const Vec2& p, int start) const {
    int t = start;
    if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive) t = any_alive();
    const std::size_t limit = 4 * tris_.size() + 16;
    for (std::size_t step = 0; step < limit; ++step) {
      const auto& tr = tris_[t];
      int move = -1;
      for (int i = 0; i < 3; ++i) {
        const Vec2& a = pts_[tr.v[(i + 1) % 3]];
        const Vec2& b = pts_[tr.v[(i + 2) % 3]];
        const Vec2 ab = b - a;
        if (orient(a, b, p) < -1e-13 * dot(ab, ab)) {
          move = i;
          // Alternate the starting edge to avoid cycling on degenerate input.
          if ((step & 1) == 0) break;
        }
      }
      if (move < 0) return t;
      if (tr.nb[move] < 0) return -1;
      t = tr.nb[move];
    }
    for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
      if (!tris_[k].alive) continue;
      const auto& v = tris_[k].v;
      if (orient(pts_[v[0]], pts_[v[1]], p) >= 0 && orient(pts_[v[1]], pts_[v[2]], p) >= 0 &&
          orient(pts_[v[2]], pts_[v[0]], p) >= 0)
        return k;
    }
    return -1;
  }

  int any_alive() const {
    for (int k = static_cast<int>(tris_.size()) - 1; k >= 0; --k)
      if (tris_[k].alive) return k;
    throw Error(ErrorCode::meshing, "empty triangulation");
  }

  int new_tri(int a, int b, int c) {
    Tri t;
    t.v = {a, b, c};
    tris_.push_back(t);
    queue_.push_back(static_cast<int>(tris_.size()) - 1);
    return static_cast<int>(tris_.size()) - 1;
  }

  /// Inserts point id `pid` whose location lies in (or on the boundary of)
  /// triangle t0. When `split` is given, the point lies on that boundary
  /// segment and the segment is replaced by its two halves.
  void insert(int pid, int t0, std::optional<std::pair<int, int>> split = std::nullopt) {
    const Vec2 p = pts_[pid];
    ++stamp_;
    if (mark_.size() < tris_.size()) mark_.resize(tris_.size() + 1024, 0);
    std::vector<int> cavity{t0};
    mark_[t0] = stamp_;
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      const Tri& tr = tris_[cavity[k]];
      for (int i = 0; i < 3; ++i) {
        const int nb = tr.nb[i];
        if (nb < 0 || mark_[nb] == stamp_) continue;
        if (in_circumcircle(nb, p)) {
          mark_[nb] = stamp_;
          cavity.push_back(nb);
        }
      }
    }

    struct Edge {
      int a, b, outer, owner;
    };
    std::vector<Edge> rim;
    auto is_split = [&](int a, int b) {
      return split && ((split->first == a && split->second == b) ||
                       (split->first == b && split->second == a));
    };
    // Repair until every rim edge sees p strictly on its left: a point on an
    // edge of t0 pulls the far neighbour in, anything else is dropped.
    for (int guard = 0;; ++guard) {
      rim.clear();
      int drop = -1, grow = -1;
      for (std::size_t k = 0; k < cavity.size(); ++k) {
        const int t = cavity[k];
        if (mark_[t] != stamp_) continue;
        const Tri& tr = tris_[t];
        for (int i = 0; i < 3; ++i) {
          const int nb = tr.nb[i];
          if (nb >= 0 && mark_[nb] == stamp_) continue;
          const int a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
          if (is_split(a, b)) {
            rim.push_back({a, b, -2, t});
            continue;
          }
          const Vec2 ab = pts_[b] - pts_[a];
          if (orient(pts_[a], pts_[b], p) <= 1e-13 * dot(ab, ab)) {
            if (t == t0 && nb >= 0 && grow < 0) grow = nb;
            else if (t != t0 && drop < 0) drop = t;
          }
          rim.push_back({a, b, nb, t});
        }
      }
      if (grow >= 0) {
        mark_[grow] = stamp_;
        cavity.push_back(grow);
      } else if (drop >= 0) {
        mark_[drop] = 0;
      } else {
        break;
      }
      if (guard > 10000) throw Error(ErrorCode::meshing, "cavity repair did not converge");
    }

    for (int t : cavity)
      if (mark_[t] == stamp_) tris_[t].alive = false;

    std::unordered_map<int, int> by_start;
    std::vector<int> created;
    for (const Edge& e : rim) {
      if (e.outer == -2) continue;
      const int nt = new_tri(e.a, e.b, pid);
      tris_[nt].nb[2] = e.outer;
      if (e.outer >= 0) {
        Tri& o = tris_[e.outer];
        for (int i = 0; i < 3; ++i)
          if (o.nb[i] == e.owner) o.nb[i] = nt;
      }
      by_start[e.a] = nt;
      created.push_back(nt);
    }
    for (int nt : created) {
      // Edge opposite v[0] runs b -> p; its neighbour starts at b.
      auto it = by_start.find(tris_[nt].v[1]);
      if (it != by_start.end()) {
        tris_[nt].nb[0] = it->second;
        tris_[it->second].nb[1] = nt;
      }
    }
    hint_ = created.empty() ? hint_ : created.front();
  }

  // ---- boundary ----------------------------------------------------------

  void build_boundary() {
    const auto [lo, hi] = poly_.bounding_box();
    const Vec2 c = (lo + hi) * 0.5;
    const double R = 50.0 * std::max(hi.x - lo.x, hi.y - lo.y) + 1.0;
    super_[0] = add_point(c + Vec2{-2.0 * R, -R}, -1, -1);
    super_[1] = add_point(c + Vec2{2.0 * R, -R}, -1, -1);
    super_[2] = add_point(c + Vec2{0.0, 2.0 * R}, -1, -1);
    new_tri(super_[0], super_[1], super_[2]);

    const std::size_t n = poly_.size();
    std::vector<int> corner(n);
    for (std::size_t i = 0; i < n; ++i) corner[i] = add_point(poly_.vertex(i), static_cast<int>(i), -1);

    for (std::size_t s = 0; s < n; ++s) {
      const auto [A, B] = poly_.side(s);
      const double L = distance(A, B);
      // Equidistribute the integral of 1/size along the side.
      const int m = 512;
      std::vector<double> cum(m + 1, 0.0);
      for (int k = 0; k < m; ++k) {
        const double s0 = L * k / m, s1 = L * (k + 1) / m;
        const Vec2 mid = lerp(A, B, 0.5 * (s0 + s1) / L);
        cum[k + 1] = cum[k] + (s1 - s0) / size_(mid);
      }
      // Fine sampling near graded corners keeps the quadrature honest.
      const int count = std::max(1, static_cast<int>(std::ceil(cum[m] - 1e-9)));
      int prev = corner[s];
      for (int j = 1; j < count; ++j) {
        const double target = cum[m] * j / count;
        const auto it = std::lower_bound(cum.begin(), cum.end(), target);
        const int k = std::clamp(static_cast<int>(it - cum.begin()) - 1, 0, m - 1);
        const double f = (target - cum[k]) / (cum[k + 1] - cum[k]);
        const double t = (k + f) / m;
        const int pid = add_point(lerp(A, B, t), -1, static_cast<int>(s));
        segs_.push_back({prev, pid, static_cast<int>(s)});
        prev = pid;
      }
      segs_.push_back({prev, corner[poly_.next(s)], static_cast<int>(s)});
    }

    for (int pid = 3; pid < static_cast<int>(pts_.size()); ++pid) {
      const int t = locate(pts_[pid], hint_);
      if (t < 0) throw Error(ErrorCode::meshing, "boundary point outside the super triangle");
      insert(pid, t);
    }

    // Recover missing boundary segments by splitting them.
    for (int pass = 0;; ++pass) {
      std::unordered_set<std::uint64_t> edges;
      for (const Tri& t : tris_)
        if (t.alive)
          for (int i = 0; i < 3; ++i) edges.insert(edge_key(t.v[i], t.v[(i + 1) % 3]));
      bool missing = false;
      const std::size_t count = segs_.size();
      for (std::size_t k = 0; k < count; ++k) {
        if (!segs_[k].alive) continue;
        if (edges.count(edge_key(segs_[k].a, segs_[k].b))) continue;
        missing = true;
        const Segment sg = segs_[k];
        segs_[k].alive = false;
        const Vec2 p = split_point(sg);
        const int pid = add_point(p, -1, sg.side);
        segs_.push_back({sg.a, pid, sg.side});
        segs_.push_back({pid, sg.b, sg.side});
        const int t = locate(p, hint_);
        if (t < 0) throw Error(ErrorCode::meshing, "segment recovery point not located");
        insert(pid, t);
      }
      if (!missing) break;
      if (pass > 200) throw Error(ErrorCode::meshing, "boundary recovery did not converge");
    }
  }

  Vec2 split_point(const Segment& sg) const {
    const Vec2 a = pts_[sg.a], b = pts_[sg.b];
    const double L = distance(a, b);
    const bool ca = node_vertex_[sg.a] >= 0, cb = node_vertex_[sg.b] >= 0;
    if (ca != cb && poly_.angle(static_cast<std::size_t>(node_vertex_[ca ? sg.a : sg.b])) < pi / 3.0 + 1e-9) {
      // Concentric shells around sharp corners: split at a power-of-two distance.
      const Vec2 apex = ca ? a : b, other = ca ? b : a;
      const double d = std::exp2(std::round(std::log2(0.5 * L)));
      if (d > 0.3 * L && d < 0.7 * L) return lerp(apex, other, d / L);
    }
    return lerp(a, b, 0.5);
  }

  void remove_exterior() {
    std::unordered_set<std::uint64_t> seg_keys;
    for (const auto& s : segs_)
      if (s.alive) seg_keys.insert(edge_key(s.a, s.b));
    std::vector<int> stack;
    std::vector<char> outside(tris_.size(), 0);
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      for (int k = 0; k < 3; ++k)
        if (tris_[t].v[k] == super_[0] || tris_[t].v[k] == super_[1] || tris_[t].v[k] == super_[2]) {
          outside[t] = 1;
          stack.push_back(t);
          break;
        }
    }
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      const Tri& tr = tris_[t];
      for (int i = 0; i < 3; ++i) {
        const int nb = tr.nb[i];
        if (nb < 0 || outside[nb]) continue;
        if (seg_keys.count(edge_key(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3]))) continue;
        outside[nb] = 1;
        stack.push_back(nb);
      }
    }
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      if (outside[t]) {
        tris_[t].alive = false;
        continue;
      }
    }
    for (auto& tr : tris_) {
      if (!tr.alive) continue;
      for (int i = 0; i < 3; ++i)
        if (tr.nb[i] >= 0 && !tris_[tr.nb[i]].alive) tr.nb[i] = -1;
    }
    hint_ = any_alive();
    // Sanity: the remaining area must match the polygon.
    double area = 0.0;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
      if (tris_[t].alive) area += 0.5 * orient_tri(t);
    if (std::abs(area - poly_.area()) > 1e-8 * poly_.area())
      throw Error(ErrorCode::meshing, "boundary recovery produced a wrong domain");
  }

  // ---- segment splitting -------------------------------------------------

  /// Triangle adjacent to boundary segment (a, b), or -1.
  int segment_owner(int a, int b) const {
    for (int t = static_cast<int>(tris_.size()) - 1; t >= 0; --t) {
      const Tri& tr = tris_[t];
      if (!tr.alive) continue;
      for (int i = 0; i < 3; ++i)
        if (tr.nb[i] < 0) {
          const int x = tr.v[(i + 1) % 3], y = tr.v[(i + 2) % 3];
          if ((x == a && y == b) || (x == b && y == a)) return t;
        }
    }
    return -1;
  }

  void split_segment(std::size_t k) {
    const Segment sg = segs_[k];
    const int owner = owner_of(sg);
    if (owner < 0) throw Error(ErrorCode::meshing, "lost a boundary segment");
    segs_[k].alive = false;
    const int pid = add_point(split_point(sg), -1, sg.side);
    segs_.push_back({sg.a, pid, sg.side});
    segs_.push_back({pid, sg.b, sg.side});
    insert(pid, owner, std::make_pair(sg.a, sg.b));
    register_segment_owner(segs_.size() - 2);
    register_segment_owner(segs_.size() - 1);
  }

  int owner_of(const Segment& sg) {
    auto it = seg_owner_.find(edge_key(sg.a, sg.b));
    if (it != seg_owner_.end()) {
      const int t = it->second;
      if (t >= 0 && tris_[t].alive) {
        const Tri& tr = tris_[t];
        for (int i = 0; i < 3; ++i) {
          const int x = tr.v[(i + 1) % 3], y = tr.v[(i + 2) % 3];
          if (tr.nb[i] < 0 && ((x == sg.a && y == sg.b) || (x == sg.b && y == sg.a))) return t;
        }
      }
    }
    const int t = segment_owner(sg.a, sg.b);
    seg_owner_[edge_key(sg.a, sg.b)] = t;
    return t;
  }

  void register_segment_owner(std::size_t k) {
    // Owners of new halves are among the most recently created triangles.
    const Segment& sg = segs_[k];
    for (int t = static_cast<int>(tris_.size()) - 1; t >= 0 && t >= static_cast<int>(tris_.size()) - 64; --t) {
      const Tri& tr = tris_[t];
      if (!tr.alive) continue;
      for (int i = 0; i < 3; ++i) {
        const int x = tr.v[(i + 1) % 3], y = tr.v[(i + 2) % 3];
        if (tr.nb[i] < 0 && ((x == sg.a && y == sg.b) || (x == sg.b && y == sg.a))) {
          seg_owner_[edge_key(sg.a, sg.b)] = t;
          return;
        }
      }
    }
  }

  /// Apex of the triangle owning the segment lies inside its diametral circle.
  bool encroached_by_apex(const Segment& sg) {
    const int t = owner_of(sg);
    if (t < 0) return false;
    const Tri& tr = tris_[t];
    for (int k = 0; k < 3; ++k) {
      const int v = tr.v[k];
      if (v == sg.a || v == sg.b) continue;
      return dot(pts_[sg.a] - pts_[v], pts_[sg.b] - pts_[v]) < 0.0;
    }
    return false;
  }

  void split_encroached_by_vertices() {
    for (int pass = 0; pass < 64; ++pass) {
      bool any = false;
      const std::size_t count = segs_.size();
      for (std::size_t k = 0; k < count; ++k) {
        if (!segs_[k].alive) continue;
        if (encroached_by_apex(segs_[k])) {
          split_segment(k);
          any = true;
        }
      }
      if (!any) return;
    }
  }

  // ---- refinement --------------------------------------------------------

  bool sharp_corner_triangle(const Tri& tr) const {
    const double sharp = pi / 3.0 + 1e-9;
    for (int k = 0; k < 3; ++k) {
      const int v = node_vertex_[tr.v[k]];
      if (v >= 0 && poly_.angle(static_cast<std::size_t>(v)) < sharp) return true;
    }
    const std::size_t n = poly_.size();
    for (int k = 0; k < 3; ++k) {
      const int s1 = node_side_[tr.v[k]], s2 = node_side_[tr.v[(k + 1) % 3]];
      if (s1 < 0 || s2 < 0 || s1 == s2) continue;
      std::optional<std::size_t> apex;
      if (static_cast<std::size_t>(s2) == (static_cast<std::size_t>(s1) + 1) % n) apex = s2;
      if (static_cast<std::size_t>(s1) == (static_cast<std::size_t>(s2) + 1) % n) apex = s1;
      if (apex && poly_.angle(*apex) < sharp) return true;
    }
    return false;
  }

  void refine() {
    const double B = 1.0 / (2.0 * std::sin(opt_.min_angle_deg * pi / 180.0));
    const std::size_t budget = opt_.max_nodes;
    queue_.clear();
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
      if (tris_[t].alive) queue_.push_back(t);

    while (!queue_.empty()) {
      const int t = queue_.front();
      queue_.pop_front();
      if (!tris_[t].alive) continue;
      const Tri tr = tris_[t];
      const Vec2 a = pts_[tr.v[0]], b = pts_[tr.v[1]], c = pts_[tr.v[2]];
      const double ea = distance(b, c), eb = distance(c, a), ec = distance(a, b);
      const double shortest = std::min({ea, eb, ec});
      const Vec2 cc = circumcenter(a, b, c);
      const double R = distance(cc, a);
      const Vec2 centroid = (a + b + c) / 3.0;
      const bool too_big = R > 0.75 * size_(centroid);
      bool bad_shape = R / shortest > B;
      if (bad_shape && !too_big && sharp_corner_triangle(tr)) bad_shape = false;
      if (!too_big && !bad_shape) continue;
      if (pts_.size() >= budget) throw Error(ErrorCode::meshing, "mesh node budget exhausted");

      // Segments encroached by the circumcentre get split instead.
      bool split_any = false;
      const std::size_t count = segs_.size();
      for (std::size_t k = 0; k < count; ++k) {
        if (!segs_[k].alive) continue;
        const Vec2 sa = pts_[segs_[k].a], sb = pts_[segs_[k].b];
        if (dot(sa - cc, sb - cc) < 0.0) {
          split_segment(k);
          split_any = true;
        }
      }
      if (split_any) {
        if (tris_[t].alive) queue_.push_back(t);
        continue;
      }
      const int loc = locate(cc, t);
      if (loc < 0) continue;
      const int pid = add_point(cc, -1, -1);
      insert(pid, loc);
    }
  }

  Mesh compact() const {
    Mesh m;
    m.polygon = poly_;
    std::vector<int> remap(pts_.size(), -1);
    for (const Tri& tr : tris_) {
      if (!tr.alive) continue;
      std::array<int, 3> out{};
      for (int k = 0; k < 3; ++k) {
        int& r = remap[tr.v[k]];
        if (r < 0) {
          r = static_cast<int>(m.nodes.size());
          m.nodes.push_back(pts_[tr.v[k]]);
          m.node_vertex.push_back(node_vertex_[tr.v[k]]);
          m.node_side.push_back(node_side_[tr.v[k]]);
        }
        out[k] = r;
      }
      m.triangles.push_back(out);
      for (int i = 0; i < 3; ++i) {
        if (tr.nb[i] >= 0) continue;
        const int x = remap[tr.v[(i + 1) % 3]], y = remap[tr.v[(i + 2) % 3]];
        m.boundary.push_back({x, y, -1});
      }
    }
    m.vertex_node.assign(poly_.size(), -1);
    for (std::size_t k = 0; k < m.nodes.size(); ++k)
      if (m.node_vertex[k] >= 0) m.vertex_node[m.node_vertex[k]] = static_cast<int>(k);
    for (auto& e : m.boundary) {
      const int sa = m.node_side[e.a], sb = m.node_side[e.b];
      if (sa >= 0) e.side = sa;
      else if (sb >= 0) e.side = sb;
      else {
        // Both ends are corners of a side with no interior nodes.
        const int va = m.node_vertex[e.a], vb = m.node_vertex[e.b];
        e.side = (static_cast<std::size_t>(vb) == poly_.next(va)) ? va : vb;
      }
    }
    for (int v : m.vertex_node)
      if (v < 0) throw Error(ErrorCode::meshing, "polygon vertex missing from the mesh");
    return m;
  }

  const Polygon& poly_;
  const SizeField& size_;
  const MeshOptions& opt_;
  std::vector<Vec2> pts_;
  std::vector<int> node_vertex_, node_side_;
  std::vector<Tri> tris_;
  std::vector<Segment> segs_;
  std::unordered_map<std::uint64_t, int> seg_owner_;
  std::deque<int> queue_;
  std::vector<int> mark_;
  int stamp_ = 0;
  int hint_ = 0;
  std::array<int, 3> super_{};
};

}  // namespace detail

/// Quality triangulation with local size ~ h (r/diam)^g near graded corners.
inline Mesh triangulate(const Polygon& poly, double h, const MeshOptions& opt = {}) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_input, "mesh size must be positive");
  SizeField size;
  size.h = h;
  size.diam = poly.diameter();
  size.floor = h * opt.min_size_ratio;
  size.corners = poly.vertices();
  size.grading = opt.grading.empty() ? default_grading(poly) : opt.grading;
  if (size.grading.size() != poly.size())
    throw Error(ErrorCode::invalid_input, "grading list must match the vertex count");
  detail::DelaunayRefiner refiner(poly, size, opt);
  Mesh m = refiner.run();
  m.grading = size.grading;
  m.size = size;
  return m;
}

/// Uniform red refinement: every triangle is split into four.
inline Mesh refine(const Mesh& in) {
  Mesh m;
  m.polygon = in.polygon;
  m.nodes = in.nodes;
  m.node_vertex = in.node_vertex;
  m.node_side = in.node_side;
  m.vertex_node = in.vertex_node;
  m.grading = in.grading;
  m.size = in.size;
  m.size.h *= 0.5;
  m.size.floor *= 0.5;

  std::unordered_map<std::uint64_t, int> mid;
  std::unordered_map<std::uint64_t, int> edge_side;
  for (const auto& e : in.boundary) edge_side[detail::edge_key(e.a, e.b)] = e.side;

  auto midpoint = [&](int a, int b) {
    const auto key = detail::edge_key(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const int id = static_cast<int>(m.nodes.size());
    auto bs = edge_side.find(key);
    Vec2 p = (in.nodes[a] + in.nodes[b]) * 0.5;
    int side = -1;
    if (bs != edge_side.end()) {
      side = bs->second;
      // Snap onto the exact side line.
      const auto [A, B] = in.polygon.side(static_cast<std::size_t>(side));
      const double t = dot(p - A, B - A) / dot(B - A, B - A);
      p = lerp(A, B, t);
    }
    m.nodes.push_back(p);
    m.node_vertex.push_back(-1);
    m.node_side.push_back(side);
    mid.emplace(key, id);
    return id;
  };

  for (const auto& t : in.triangles) {
    const int a = t[0], b = t[1], c = t[2];
    const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
    m.triangles.push_back({a, ab, ca});
    m.triangles.push_back({ab, b, bc});
    m.triangles.push_back({ca, bc, c});
    m.triangles.push_back({ab, bc, ca});
  }
  for (const auto& e : in.boundary) {
    const int md = mid.at(detail::edge_key(e.a, e.b));
    m.boundary.push_back({e.a, md, e.side});
    m.boundary.push_back({md, e.b, e.side});
  }
  return m;
}

/// Bucket grid for point location in a mesh.
class TriangleLocator {
 public:
  TriangleLocator() = default;

  explicit TriangleLocator(const Mesh& m) : mesh_(&m) {
    const auto [lo, hi] = m.polygon.bounding_box();
    lo_ = lo;
    const double w = std::max(hi.x - lo.x, 1e-300), hgt = std::max(hi.y - lo.y, 1e-300);
    const double cells = std::max(1.0, std::sqrt(static_cast<double>(m.triangles.size()) / 2.0));
    nx_ = std::max(1, static_cast<int>(cells * std::sqrt(w / hgt)));
    ny_ = std::max(1, static_cast<int>(cells * std::sqrt(hgt / w)));
    dx_ = w / nx_;
    dy_ = hgt / ny_;
    buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      Vec2 a = m.nodes[m.triangles[t][0]], lo2 = a, hi2 = a;
      for (int k = 1; k < 3; ++k) {
        const Vec2 p = m.nodes[m.triangles[t][k]];
        lo2 = {std::min(lo2.x, p.x), std::min(lo2.y, p.y)};
        hi2 = {std::max(hi2.x, p.x), std::max(hi2.y, p.y)};
      }
      const int i0 = cell_x(lo2.x), i1 = cell_x(hi2.x), j0 = cell_y(lo2.y), j1 = cell_y(hi2.y);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(t));
    }
  }

  struct Hit {
    int triangle = -1;
    std::array<double, 3> bary{};
  };

  /// Triangle containing p (barycentric slack `tol` relative), or triangle -1.
  Hit locate(const Vec2& p, double tol = 1e-9) const {
    Hit best;
    double best_min = -std::numeric_limits<double>::infinity();
    const int ci = cell_x(p.x), cj = cell_y(p.y);
    for (int j = std::max(0, cj - 1); j <= std::min(ny_ - 1, cj + 1); ++j)
      for (int i = std::max(0, ci - 1); i <= std::min(nx_ - 1, ci + 1); ++i)
        for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
          const auto b = barycentric(t, p);
          const double mn = std::min({b[0], b[1], b[2]});
          if (mn > best_min) {
            best_min = mn;
            best = {t, b};
            if (mn >= 0.0 && (j == cj && i == ci)) return best;
          }
        }
    if (best_min < -tol) return {};
    return best;
  }

  std::array<double, 3> barycentric(int t, const Vec2& p) const {
    const auto& tr = mesh_->triangles[t];
    const Vec2 a = mesh_->nodes[tr[0]], b = mesh_->nodes[tr[1]], c = mesh_->nodes[tr[2]];
    const double d = orient(a, b, c);
    return {orient(p, b, c) / d, orient(a, p, c) / d, orient(a, b, p) / d};
  }

 private:
  int cell_x(double x) const { return std::clamp(static_cast<int>((x - lo_.x) / dx_), 0, nx_ - 1); }
  int cell_y(double y) const { return std::clamp(static_cast<int>((y - lo_.y) / dy_), 0, ny_ - 1); }

  const Mesh* mesh_ = nullptr;
  Vec2 lo_;
  int nx_ = 1, ny_ = 1;
  double dx_ = 1.0, dy_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace hotspots
