#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "hotspots/critical.hpp"
#include "hotspots/error.hpp"
#include "hotspots/geometry.hpp"
#include "hotspots/nodal.hpp"

namespace hotspots {

/// Minimal SVG canvas in polygon coordinates (y up).
class SvgPlot {
 public:
  explicit SvgPlot(const Polygon& frame, double width = 640.0) : width_(width) {
    Vec2 lo = frame.vertex(0), hi = lo;
    for (const auto& v : frame.vertices()) {
      lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
      hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    const double pad = 0.06 * std::max(hi.x - lo.x, hi.y - lo.y);
    lo_ = {lo.x - pad, lo.y - pad};
    span_ = std::max(hi.x - lo.x, hi.y - lo.y) + 2 * pad;
    height_ = width_ * (hi.y - lo.y + 2 * pad) / span_;
    hi_y_ = hi.y + pad;
  }

  void polygon(const Polygon& p, const std::string& stroke = "#222") {
    body_ << "<polygon fill=\"#f6f6f2\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& v : p.vertices()) body_ << X(v) << ',' << Y(v) << ' ';
    body_ << "\"/>\n";
  }

  void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double w = 1.2, bool closed = false) {
    body_ << '<' << (closed ? "polygon" : "polyline") << " fill=\"none\" stroke=\"" << stroke
          << "\" stroke-width=\"" << w << "\" points=\"";
    for (const auto& p : pts) body_ << X(p) << ',' << Y(p) << ' ';
    body_ << "\"/>\n";
  }

  void dot(const Vec2& p, const std::string& fill, double r = 4.0) {
    body_ << "<circle cx=\"" << X(p) << "\" cy=\"" << Y(p) << "\" r=\"" << r << "\" fill=\"" << fill << "\"/>\n";
  }

  void label(const Vec2& p, const std::string& text, double dx = 6, double dy = -6) {
    body_ << "<text x=\"" << X(p) + dx << "\" y=\"" << Y(p) + dy
          << "\" font-family=\"monospace\" font-size=\"11\">" << text << "</text>\n";
  }

  void nodal(const NodalGraph& g, const std::string& stroke = "#1f6fb4") {
    for (const auto& e : g.edges)
      polyline(e.points, e.boundary_lying ? "#9bbad6" : stroke, e.boundary_lying ? 4.0 : 1.4, e.closed);
    for (const auto& n : degree_one_vertices(g)) dot(n.p, stroke, 2.5);
  }

  void critical(const CriticalSet& cs) {
    for (const auto& c : cs.points) {
      const int i = c.index.value_or(99);
      const char* col = i == 1 ? "#c0392b" : i == -1 ? "#27ae60" : i == 0 ? "#8e44ad" : "#7f8c8d";
      dot(c.location, col);
      label(c.location, c.index ? std::to_string(*c.index) : "?");
    }
  }

  std::string str() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
       << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n"
       << body_.str() << "</svg>\n";
    return os.str();
  }

  void save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::io, "cannot write " + path);
    f << str();
  }

 private:
  double X(const Vec2& p) const { return (p.x - lo_.x) / span_ * width_; }
  double Y(const Vec2& p) const { return (hi_y_ - p.y) / span_ * width_; }

  double width_, height_ = 0, span_ = 1, hi_y_ = 0;
  Vec2 lo_;
  std::ostringstream body_;
};

}  // namespace hotspots
