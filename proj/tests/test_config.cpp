#include <gtest/gtest.h>

#include "hotspots/config.hpp"
#include "hotspots/report.hpp"

using namespace hotspots;

namespace {

RunConfig from(const std::string& text, const std::string& command = "solve") {
  RunConfig c;
  c.command = command;
  apply_spec(c, nlohmann::json::parse(text));
  return c;
}

}  // namespace

TEST(Config, PolygonForms) {
  EXPECT_EQ(from(R"({"polygon": [[0,0],[1,0],[0,1]]})").polygon->size(), 3u);
  const auto l = from(R"({"polygon": {"vertices": [[0,0],[1,0],[1,1],[0,1]], "labels": ["A","B","C","D"]}})");
  EXPECT_EQ(l.polygon->labels().at(2), "C");
  const auto iso = from(R"({"polygon": {"isosceles": {"apex_deg": 50}}})");
  EXPECT_NEAR(iso.polygon->angle(2), 50 * pi / 180, 1e-12);
  EXPECT_EQ(from(R"({"polygon": {"regular": {"n": 7}}})").polygon->size(), 7u);
  EXPECT_EQ(from(R"({"polygon": {"random": {"kind": "star", "n": 6}}})").polygon->size(), 6u);
}

TEST(Config, RandomPolygonDependsOnSeed) {
  RunConfig a, b, c;
  a.seed = c.seed = 5;
  b.seed = 6;
  const auto j = nlohmann::json::parse(R"({"polygon": {"random": {"kind": "obtuse"}}})");
  apply_spec(a, j);
  apply_spec(b, j);
  apply_spec(c, j);
  EXPECT_EQ(a.polygon->vertices(), c.polygon->vertices());
  EXPECT_NE(a.polygon->vertices(), b.polygon->vertices());
}

TEST(Config, SolverAndMeshKeys) {
  const auto c = from(R"({"polygon": [[0,0],[1,0],[0,1]], "mesh": {"h": 0.02}, "solver": {"tol": 1e-9},
                          "bessel": {"terms": 7, "threshold": 0.01, "annulus": [0.01, 0.05]},
                          "steps": 12, "breaking": {"epsilon": 0.02, "offset": 0.2}})");
  EXPECT_EQ(*c.h, 0.02);
  EXPECT_EQ(c.mesh_size(*c.polygon), 0.02);
  EXPECT_EQ(c.tol, 1e-9);
  EXPECT_EQ(c.fit.terms, 7u);
  EXPECT_EQ(c.threshold, 0.01);
  EXPECT_EQ(c.fit.annulus->r_out, 0.05);
  EXPECT_EQ(c.steps, 12u);
  EXPECT_EQ(c.epsilon, 0.02);
  EXPECT_EQ(c.offset, 0.2);
  c.validate();
  const auto d = from(R"({"polygon": [[0,0],[2,0],[0,1]]})");
  EXPECT_NEAR(d.mesh_size(*d.polygon), 0.04 * std::sqrt(5.0), 1e-15);
}

TEST(Config, PathsAndFields) {
  const auto c = from(R"({"path": {"kind": "vertex-lerp", "from": [[0,0],[1,0],[0.3,0.2]], "to": [[0,0],[1,0],[0.6,0.25]]},
                          "fields": [{"kind": "u"}, {"kind": "directional", "psi_deg": 90},
                                     {"kind": "rotational", "w": [0.5, -0.2]}]})");
  ASSERT_TRUE(c.path);
  EXPECT_NEAR(c.path->at(0.5).vertex(2).x, 0.45, 1e-15);
  EXPECT_EQ(c.polygon->vertex(2).x, 0.3);
  ASSERT_EQ(c.fields.size(), 3u);
  EXPECT_NEAR(c.fields[1].psi, pi / 2, 1e-15);
  EXPECT_EQ(c.fields[2].tag, FieldKind::Tag::rotational);
  const auto r = from(R"({"path": {"kind": "lip1-reduction", "from": [[0,0],[1,-0.3],[2,0],[1.5,0.4],[0.6,0.45]]}})");
  EXPECT_EQ(r.path->kind(), DeformationPath::Kind::lip1_reduction);
}

TEST(Config, ErrorsAreTyped) {
  auto code = [](auto f) -> std::optional<ErrorCode> {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };
  EXPECT_EQ(code([] { from(R"({"polygon": [[0,0],[1,0]]})"); }), ErrorCode::degenerate_geometry);
  EXPECT_EQ(code([] { from(R"({"polygon": [[0,0],[1,0],[2]]})"); }), ErrorCode::invalid_input);
  EXPECT_EQ(code([] { from(R"({"polygon": {"random": {"kind": "blob"}}})"); }), ErrorCode::invalid_input);
  EXPECT_EQ(code([] { from(R"({"fields": [{"kind": "curl"}]})"); }), ErrorCode::invalid_input);
  EXPECT_EQ(code([] { from(R"({"path": {"kind": "spiral"}})"); }), ErrorCode::invalid_input);
  EXPECT_EQ(code([] { read_json_file("/nonexistent/spec.json"); }), ErrorCode::io);
  EXPECT_EQ(code([] {
              RunConfig c;
              c.command = "solve";
              c.tol = -1;
              c.validate();
            }),
            ErrorCode::invalid_input);
  EXPECT_EQ(code([] {
              RunConfig c;
              c.command = "frobnicate";
              c.validate();
            }),
            ErrorCode::invalid_input);
}

TEST(Report, DeterministicDump) {
  const Polygon t({{0, 0}, {1, 0}, {0.3, 0.2}});
  auto dump = [&] {
    const auto s = solve_polygon(t, 0.05);
    json j{{"schema", report_schema}, {"version", report_version}};
    j["solution"] = to_json(s);
    j["critical"] = to_json(find_critical_points(s));
    return j.dump(2);
  };
  const std::string a = dump();
  EXPECT_EQ(a, dump());
  const auto back = json::parse(a);
  EXPECT_EQ(back["schema"], "hotspots-report");
  EXPECT_EQ(back["version"], 1);
  EXPECT_TRUE(back["solution"].contains("mu"));
}

TEST(Report, NonFiniteBecomesNull) {
  EXPECT_TRUE(detail::num(std::numeric_limits<double>::quiet_NaN()).is_null());
  const auto e = error_record("io", "cannot read x");
  EXPECT_EQ(e["error"]["code"], "io");
}
