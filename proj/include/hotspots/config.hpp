#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "hotspots/bessel.hpp"
#include "hotspots/corpus.hpp"
#include "hotspots/error.hpp"
#include "hotspots/field.hpp"
#include "hotspots/geometry.hpp"

namespace hotspots {

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"solve", "critical", "nodal", "lip1", "path", "break", "verify-index"};
  return c;
}

/// Parsed spec file plus command-line overrides.
struct RunConfig {
  std::string command;
  std::string spec_path;
  std::optional<Polygon> polygon;
  std::optional<DeformationPath> path;
  std::vector<FieldKind> fields;
  std::optional<double> h;  ///< absolute; defaults to h_relative * diameter
  double h_relative = 0.04;
  double tol = 1e-10;
  FitOptions fit;
  double threshold = 1e-3;
  std::size_t steps = 64;
  std::uint64_t seed = 1;
  double epsilon = 0.01;  ///< breaking distance relative to |e|
  double offset = 0.25;   ///< break points from p, relative to |e|
  std::string out;        ///< output directory; empty prints the report to stdout
  bool svg = false;       ///< also write SVG plots into `out`

  double mesh_size(const Polygon& p) const { return h ? *h : h_relative * p.diameter(); }

  void validate() const {
    if (std::find(commands().begin(), commands().end(), command) == commands().end())
      throw Error(ErrorCode::invalid_input, "unknown command '" + command + "'");
    auto positive = [](double x, const char* what) {
      if (!(x > 0)) throw Error(ErrorCode::invalid_input, std::string(what) + " must be positive");
    };
    if (h) positive(*h, "h");
    positive(h_relative, "relative h");
    positive(tol, "tol");
    positive(threshold, "threshold");
    positive(epsilon, "epsilon");
    positive(offset, "offset");
    if (steps == 0) throw Error(ErrorCode::invalid_input, "steps must be positive");
  }
};

namespace detail {

inline std::vector<Vec2> read_points(const nlohmann::json& a) {
  if (!a.is_array()) throw Error(ErrorCode::invalid_input, "expected an array of [x, y] pairs");
  std::vector<Vec2> v;
  for (const auto& p : a) {
    if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::invalid_input, "point must be [x, y]");
    v.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return v;
}

inline Polygon read_polygon(const nlohmann::json& j, std::mt19937_64& rng) {
  if (j.is_array()) return Polygon(read_points(j));
  if (j.contains("vertices")) {
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
    return Polygon(read_points(j["vertices"]), labels);
  }
  if (j.contains("isosceles")) {
    const auto& s = j["isosceles"];
    return isosceles_triangle(s.value("apex_deg", 50.0) * pi / 180.0, s.value("base", 1.0));
  }
  if (j.contains("regular")) {
    const auto& s = j["regular"];
    return regular_polygon(s.value("n", 5), s.value("circumradius", 1.0));
  }
  if (j.contains("random")) {
    const auto& s = j["random"];
    const std::string kind = s.value("kind", "star");
    if (kind == "star") return random_star_polygon(rng, s.value("n", 5));
    if (kind == "triangle") return random_triangle(rng);
    if (kind == "obtuse") return random_obtuse_triangle(rng);
    throw Error(ErrorCode::invalid_input, "unknown random polygon kind '" + kind + "'");
  }
  throw Error(ErrorCode::invalid_input, "cannot read a polygon from the spec");
}

inline FieldKind read_field(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "u");
  if (kind == "u") return FieldKind::u();
  if (kind == "directional") {
    if (j.contains("psi_deg")) return FieldKind::directional(j["psi_deg"].get<double>() * pi / 180.0);
    return FieldKind::directional(j.value("psi", 0.0));
  }
  if (kind == "rotational") {
    const auto w = j.at("w");
    return FieldKind::rotational({w[0].get<double>(), w[1].get<double>()});
  }
  throw Error(ErrorCode::invalid_input, "unknown field kind '" + kind + "'");
}

}  // namespace detail

/// Fill `cfg` from a JSON spec document. Values already set on the command
/// line are applied afterwards by the caller.
inline void apply_spec(RunConfig& cfg, const nlohmann::json& spec) {
  std::mt19937_64 rng(cfg.seed);
  if (spec.contains("polygon")) cfg.polygon = detail::read_polygon(spec["polygon"], rng);
  if (spec.contains("path")) {
    const auto& p = spec["path"];
    const std::string kind = p.value("kind", "vertex-lerp");
    if (kind == "vertex-lerp") {
      std::vector<std::vector<Vec2>> frames;
      if (p.contains("keyframes"))
        for (const auto& k : p["keyframes"]) frames.push_back(detail::read_points(k));
      else {
        frames.push_back(detail::read_polygon(p.at("from"), rng).vertices());
        frames.push_back(detail::read_polygon(p.at("to"), rng).vertices());
      }
      cfg.path = DeformationPath::from_keyframes(DeformationPath::Kind::vertex_lerp, std::move(frames));
    } else if (kind == "lip1-reduction") {
      cfg.path = lip1_reduction_path(detail::read_polygon(p.at("from"), rng));
    } else {
      throw Error(ErrorCode::invalid_input, "unknown path kind '" + kind + "'");
    }
    if (!cfg.polygon) cfg.polygon = cfg.path->at(0.0);
  }
  if (spec.contains("fields"))
    for (const auto& f : spec["fields"]) cfg.fields.push_back(detail::read_field(f));
  if (spec.contains("mesh")) {
    const auto& m = spec["mesh"];
    if (m.contains("h")) cfg.h = m["h"].get<double>();
    cfg.h_relative = m.value("h_relative", cfg.h_relative);
  }
  if (spec.contains("solver")) cfg.tol = spec["solver"].value("tol", cfg.tol);
  if (spec.contains("bessel")) {
    const auto& b = spec["bessel"];
    cfg.fit.terms = b.value("terms", cfg.fit.terms);
    cfg.threshold = b.value("threshold", cfg.threshold);
    if (b.contains("annulus")) cfg.fit.annulus = Annulus{b["annulus"][0].get<double>(), b["annulus"][1].get<double>()};
  }
  if (spec.contains("steps")) cfg.steps = spec["steps"].get<std::size_t>();
  if (spec.contains("breaking")) {
    cfg.epsilon = spec["breaking"].value("epsilon", cfg.epsilon);
    cfg.offset = spec["breaking"].value("offset", cfg.offset);
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::io, "cannot read " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_input, path + ": " + e.what());
  }
}

}  // namespace hotspots
