#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hotspots/error.hpp"
#include "hotspots/geometry.hpp"

namespace hotspots {

/// Constraints for randomly generated test polygons.
struct CorpusOptions {
  double min_angle = 25.0 * pi / 180.0;
  double right_angle_band = 5.0 * pi / 180.0;  ///< reject angles this close to pi/2
  double min_side = 0.2;                       ///< relative to the diameter
  int max_attempts = 10000;
};

/// Star-shaped polygon with n vertices around the origin.
inline Polygon random_star_polygon(std::mt19937_64& rng, std::size_t n, const CorpusOptions& opt = {}) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    std::vector<double> ang(n);
    for (auto& a : ang) a = 2.0 * pi * uni(rng);
    std::sort(ang.begin(), ang.end());
    std::vector<Vec2> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = 0.6 + 0.6 * uni(rng);
      v[i] = {r * std::cos(ang[i]), r * std::sin(ang[i])};
    }
    try {
      Polygon p(v);
      bool ok = true;
      const double d = p.diameter();
      for (std::size_t i = 0; i < n && ok; ++i) {
        const double b = p.angle(i);
        ok = b > opt.min_angle && b < 2.0 * pi - opt.min_angle &&
             std::abs(b - 0.5 * pi) > opt.right_angle_band && std::abs(b - 1.5 * pi) > opt.right_angle_band &&
             std::abs(b - pi) > opt.right_angle_band && p.side_length(i) > opt.min_side * d;
      }
      if (ok) return p;
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::invalid_input, "could not draw a polygon satisfying the corpus constraints");
}

/// Triangle with angles drawn uniformly on the simplex, scaled to unit diameter.
inline Polygon random_triangle(std::mt19937_64& rng, double min_angle = 1e-3) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (;;) {
    const double a = uni(rng), b = uni(rng);
    const double A = pi * std::min(a, b), B = pi * (std::max(a, b) - std::min(a, b)), C = pi - A - B;
    if (std::min({A, B, C}) < min_angle) continue;
    // Base of length 1 from the origin, angle A there and B at (1, 0).
    const double t = std::sin(B) / std::sin(A + B);
    return Polygon({{0, 0}, {1, 0}, {t * std::cos(A), t * std::sin(A)}});
  }
}

/// Obtuse triangle with the obtuse angle in (pi/2 + band, pi - 2 min_acute).
inline Polygon random_obtuse_triangle(std::mt19937_64& rng, double min_acute = 15.0 * pi / 180.0,
                                      double band = 5.0 * pi / 180.0) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (;;) {
    const double C = 0.5 * pi + band + (0.5 * pi - band - 2 * min_acute) * uni(rng);
    const double A = min_acute + (pi - C - 2 * min_acute) * uni(rng);
    const double B = pi - C - A;
    if (B < min_acute) continue;
    const double t = std::sin(B) / std::sin(A + B);
    return Polygon({{0, 0}, {1, 0}, {t * std::cos(A), t * std::sin(A)}});
  }
}

}  // namespace hotspots
