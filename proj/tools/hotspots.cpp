// Command-line front end: reads a JSON spec, runs one computation and writes
// a versioned JSON report (plus optional SVG plots).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "hotspots/config.hpp"
#include "hotspots/continuation.hpp"
#include "hotspots/report.hpp"
#include "hotspots/svg.hpp"

namespace fs = std::filesystem;
using namespace hotspots;

namespace {

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_input: return 2;
    case ErrorCode::io: return 3;
    case ErrorCode::precondition: return 4;
    default: return 5;
  }
}

struct Output {
  const RunConfig& cfg;

  void write(const std::string& name, const std::string& text) const {
    const fs::path p = fs::path(cfg.out) / name;
    std::ofstream f(p);
    if (!f) throw Error(ErrorCode::io, "cannot write " + p.string());
    f << text;
  }
  void report(const json& j) const {
    if (cfg.out.empty())
      std::cout << j.dump(2) << '\n';
    else
      write("report.json", j.dump(2) + "\n");
  }
  bool svg() const { return cfg.svg && !cfg.out.empty(); }
  void plot(const std::string& name, const SvgPlot& p) const { p.save((fs::path(cfg.out) / name).string()); }
};

const Polygon& need_polygon(const RunConfig& cfg) {
  if (!cfg.polygon) throw Error(ErrorCode::invalid_input, "spec has no polygon");
  return *cfg.polygon;
}

CriticalOptions critical_options(const RunConfig& cfg) {
  CriticalOptions o;
  o.fit = cfg.fit;
  o.coefficient_threshold = cfg.threshold;
  return o;
}

TrackOptions track_options(const RunConfig& cfg, const Polygon& frame) {
  TrackOptions o;
  o.h = cfg.mesh_size(frame);
  o.solver.tol = cfg.tol;
  o.critical = critical_options(cfg);
  o.steps = cfg.steps;
  o.threshold = cfg.threshold;
  return o;
}

EigenSolution solve(const RunConfig& cfg) {
  const Polygon& P = need_polygon(cfg);
  SolverOptions so;
  so.tol = cfg.tol;
  return solve_polygon(P, cfg.mesh_size(P), {}, so);
}

json header(const RunConfig& cfg) {
  json j{{"schema", report_schema}, {"version", report_version}, {"command", cfg.command}};
  j["config"] = {{"spec", cfg.spec_path},
                 {"h", cfg.h ? json(*cfg.h) : json(nullptr)},
                 {"h_relative", cfg.h_relative},
                 {"tol", cfg.tol},
                 {"bessel_terms", cfg.fit.terms},
                 {"threshold", cfg.threshold},
                 {"steps", cfg.steps},
                 {"seed", cfg.seed}};
  return j;
}

std::string table(const PathRun& run) {
  std::ostringstream os;
  os << std::setw(10) << "t" << std::setw(16) << "mu" << std::setw(4) << "S" << std::setw(4) << "V"
     << "  events\n";
  for (const auto& s : run.samples) {
    std::string ev;
    for (const auto& e : run.events)
      if (e.t1 == s.t) ev += std::string(ev.empty() ? "" : ",") + to_string(e.kind);
    os << std::setw(10) << std::fixed << std::setprecision(6) << s.t << std::setw(16) << std::setprecision(10)
       << s.mu << std::setw(4) << s.S << std::setw(4) << s.V << "  " << ev << '\n';
  }
  return os.str();
}

void plot_frames(const Output& out, const PathRun& run) {
  const Polygon& frame = run.samples.front().polygon;
  for (std::size_t i = 0; i < run.samples.size(); ++i) {
    SvgPlot plot(frame);
    plot.polygon(run.samples[i].polygon);
    plot.critical(run.samples[i].critical);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.svg", i);
    out.plot(name, plot);
  }
}

int run(RunConfig& cfg) {
  cfg.validate();
  const Output out{cfg};
  if (!cfg.out.empty()) fs::create_directories(cfg.out);
  json rep = header(cfg);

  if (cfg.command == "solve") {
    const auto sol = solve(cfg);
    rep["polygon"] = to_json(sol.polygon());
    rep["solution"] = to_json(sol);
    if (out.svg()) {
      SvgPlot plot(sol.polygon());
      plot.polygon(sol.polygon());
      plot.nodal(trace(sol, FieldKind::u()));
      out.plot("solution.svg", plot);
    }
  } else if (cfg.command == "critical" || cfg.command == "verify-index") {
    const auto sol = solve(cfg);
    const auto cs = find_critical_points(sol, critical_options(cfg));
    const auto f = verify_index_formula(cs);
    rep["polygon"] = to_json(sol.polygon());
    rep["solution"] = to_json(sol);
    rep["index_formula"] = to_json(f);
    if (cfg.command == "critical") {
      rep["critical"] = to_json(cs);
      json ex = json::array();
      for (const auto& e : vertex_expansions(sol, sol.polygon(), sol.mu(), cfg.fit))
        ex.push_back(e ? to_json(*e) : json(nullptr));
      rep["expansions"] = ex;
    } else {
      rep["critical_points"] = cs.points.size();
    }
    if (out.svg()) {
      SvgPlot plot(sol.polygon());
      plot.polygon(sol.polygon());
      plot.critical(cs);
      out.plot("critical.svg", plot);
    }
  } else if (cfg.command == "nodal") {
    const auto sol = solve(cfg);
    const Polygon& P = sol.polygon();
    std::vector<FieldKind> fields = cfg.fields;
    if (fields.empty()) fields.push_back(FieldKind::u());
    rep["polygon"] = to_json(P);
    rep["solution"] = to_json(sol);
    json traces = json::array();
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto g = trace(sol, fields[i]);
      json t = to_json(g);
      if (fields[i].tag == FieldKind::Tag::value) {
        const auto arc = check_simple_arc(g, P);
        t["simple_arc"] = {{"ok", arc.ok}, {"reason", arc.reason}};
        t["min_gradient"] = min_gradient_along(sol, g);
      } else {
        json verdicts = json::array();
        for (std::size_t v : P.corner_indices()) {
          json item{{"vertex", v}};
          try {
            item["verdict"] = to_json(arc_ends_at_vertex(sol, fields[i], v, cfg.fit, cfg.threshold));
          } catch (const Error& e) {
            item["skipped"] = e.what();
          }
          verdicts.push_back(item);
        }
        t["vertex_arcs"] = verdicts;
      }
      traces.push_back(t);
      if (out.svg()) {
        SvgPlot plot(P);
        plot.polygon(P);
        plot.nodal(g);
        out.plot("nodal_" + std::to_string(i) + ".svg", plot);
      }
    }
    rep["traces"] = traces;
  } else if (cfg.command == "lip1") {
    const Polygon& P = need_polygon(cfg);
    const auto cls = lip1_classify(P);
    rep["polygon"] = to_json(P);
    json c{{"is_lip1", cls.is_lip1}, {"witnesses", cls.witnesses}};
    if (cls.partition) c["partition"] = {cls.partition->first, cls.partition->second};
    rep["classification"] = c;
    if (cls.is_lip1) {
      const auto v = lip1_no_hotspots(P, track_options(cfg, P));
      rep["verdict"] = {{"pass", v.pass},
                        {"start_ok", v.start_ok},
                        {"end_ok", v.end_ok},
                        {"samples_ok", v.samples_ok},
                        {"acute", v.acute}};
      rep["run"] = to_json(v.run);
      if (!cfg.out.empty()) out.write("summary.txt", table(v.run));
      if (out.svg()) plot_frames(out, v.run);
    }
  } else if (cfg.command == "path") {
    if (!cfg.path) throw Error(ErrorCode::invalid_input, "spec has no path");
    const auto r = track(*cfg.path, track_options(cfg, cfg.path->at(0.0)));
    rep["run"] = to_json(r);
    if (!cfg.out.empty()) {
      out.write("summary.txt", table(r));
      std::cout << table(r);
    }
    if (out.svg()) plot_frames(out, r);
  } else if (cfg.command == "break") {
    const Polygon& T = need_polygon(cfg);
    BreakingOptions bo;
    bo.track = track_options(cfg, T);
    bo.epsilon = cfg.epsilon;
    bo.offset = cfg.offset;
    const auto r = breaking_experiment(T, bo);
    rep["breaking"] = to_json(r);
    if (!cfg.out.empty()) {
      std::ostringstream os;
      os << table(r.run) << "outcome: " << to_string(r.outcome) << "\n" << r.summary << '\n';
      out.write("summary.txt", os.str());
      std::cout << os.str();
    }
    if (out.svg()) plot_frames(out, r.run);
  }
  out.report(rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second Neumann eigenfunctions of polygons: critical points, nodal sets, continuation."};
  app.set_help_flag("--help", "Print help");
  app.require_subcommand(1);

  RunConfig cfg;
  double h = 0.0;
  const std::map<std::string, std::string> about{
      {"solve", "second Neumann eigenpair"},
      {"critical", "critical points, indices and vertex expansions"},
      {"nodal", "nodal sets of u and derivative fields"},
      {"lip1", "Lip-1 classification and the no-interior-extremum check"},
      {"path", "continuation along a polygon path"},
      {"break", "triangle breaking experiment"},
      {"verify-index", "index-sum identity"}};
  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->set_help_flag("--help", "Print help");
    sub->add_option("--spec", cfg.spec_path, "JSON spec file")->required()->check(CLI::ExistingFile);
    sub->add_option("--h", h, "absolute mesh size (default: 0.04 of the diameter)");
    sub->add_option("--tol", cfg.tol, "eigensolver tolerance");
    sub->add_option("--out", cfg.out, "output directory (default: report on stdout)");
    sub->add_flag("--svg", cfg.svg, "write SVG plots into the output directory");
    sub->add_option("--steps", cfg.steps, "continuation steps");
    sub->add_option("--seed", cfg.seed, "seed for random polygons in the spec");
    sub->callback([&cfg, name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << error_record("invalid_input", e.what()).dump(2) << '\n';
    return 2;
  }

  try {
    // Spec values first, then explicit flags win.
    RunConfig from_spec;
    from_spec.seed = cfg.seed;
    from_spec.command = cfg.command;
    from_spec.spec_path = cfg.spec_path;
    apply_spec(from_spec, read_json_file(cfg.spec_path));
    for (auto* sub : app.get_subcommands()) {
      if (sub->count("--h")) from_spec.h = h;
      if (sub->count("--tol")) from_spec.tol = cfg.tol;
      if (sub->count("--steps")) from_spec.steps = cfg.steps;
    }
    from_spec.out = cfg.out;
    from_spec.svg = cfg.svg;
    return run(from_spec);
  } catch (const Error& e) {
    std::cout << error_record(to_string(e.code()), e.what()).dump(2) << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cout << error_record("internal", e.what()).dump(2) << '\n';
    return 6;
  }
}
