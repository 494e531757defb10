#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <utility>

#include "hotspots/geometry.hpp"

namespace hotspots {

/// Anything that can be evaluated, with its gradient, at points of a domain.
/// Finite-element solutions and manufactured closed forms both qualify.
template <class F>
concept ScalarSource = requires(const F& f, Vec2 p) {
  { f.value(p) } -> std::convertible_to<double>;
  { f.gradient(p) } -> std::convertible_to<Vec2>;
};

/// Closed-form field from a pair of callables.
struct FunctionField {
  std::function<double(Vec2)> f;
  std::function<Vec2(Vec2)> grad;

  double value(Vec2 p) const { return f(p); }
  Vec2 gradient(Vec2 p) const { return grad(p); }
};

/// Which scalar field derived from u is being examined.
struct FieldKind {
  enum class Tag { value, directional, rotational };
  Tag tag = Tag::value;
  double psi = 0.0;  ///< direction for L_psi u
  Vec2 center;       ///< rotation centre w for R_w u

  static FieldKind u() { return {}; }
  static FieldKind directional(double psi) { return {Tag::directional, psi, {}}; }
  static FieldKind rotational(Vec2 w) { return {Tag::rotational, 0.0, w}; }

  /// Direction (or, for R_w, the rotation field) at p; unused for Tag::value.
  Vec2 direction_at(const Vec2& p) const {
    if (tag == Tag::directional) return {std::cos(psi), std::sin(psi)};
    return perp(p - center);
  }

  /// Field value given u and grad u at p.
  double apply(const Vec2& p, double u, const Vec2& g) const {
    if (tag == Tag::value) return u;
    return dot(direction_at(p), g);
  }
};

inline const char* to_string(FieldKind::Tag t) {
  switch (t) {
    case FieldKind::Tag::value: return "u";
    case FieldKind::Tag::directional: return "L_psi u";
    case FieldKind::Tag::rotational: return "R_w u";
  }
  return "unknown";
}

template <ScalarSource F>
double evaluate_field(const F& src, const FieldKind& kind, const Vec2& p) {
  if (kind.tag == FieldKind::Tag::value) return src.value(p);
  return dot(kind.direction_at(p), src.gradient(p));
}

}  // namespace hotspots
