#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hdgsc/cg.hpp"
#include "hdgsc/metrics.hpp"
#include "hdgsc/postprocess.hpp"
#include "hdgsc/problems.hpp"

namespace hdgsc {

struct RunConfig {
  std::string experiment = "cavity";  // cavity | metamaterial | manufactured
  std::set<std::string> methods = {"hdg"};
  int k = 1;
  std::vector<int> levels = {8, 16, 32};
  double sigma_plus = 1.0;
  double kappa = -1.001;
  double gamma = 1.0;
  MeshPattern pattern = MeshPattern::MirroredDiagonals;
  std::string out = "out";
  int quad_degree = -1;  // override; -1 = module defaults
  double slice_y = 0.5;
  int samples = 200;

  void validate() const {
    if (experiment != "cavity" && experiment != "metamaterial" && experiment != "manufactured")
      throw Error("cli", "unknown experiment '" + experiment + "'");
    for (const auto& m : methods)
      if (m != "hdg" && m != "cg") throw Error("cli", "unknown method '" + m + "'");
    if (levels.empty()) throw Error("cli", "at least one refinement level required");
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (levels[i] <= levels[i - 1]) throw Error("cli", "levels must be strictly increasing");
    if (k < 0) throw Error("cli", "k must be >= 0");
    if (methods.count("cg") && k < 1) throw Error("cli", "the cg method requires k >= 1");
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

inline std::string fmt_rate(double v) { return std::isnan(v) ? std::string() : fmt(v); }

inline std::string join_int(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string join_str(const std::set<std::string>& v) {
  std::string s;
  bool first = true;
  for (const auto& e : v) {
    s += (first ? "" : ",") + e;
    first = false;
  }
  return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cli", "cannot write " + path.string());
    f << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "experiment=" << c.experiment << "\n"
     << "methods=" << detail::join_str(c.methods) << "\n"
     << "k=" << c.k << "\n"
     << "levels=" << detail::join_int(c.levels) << "\n"
     << "sigma_plus=" << detail::fmt(c.sigma_plus) << "\n"
     << "kappa=" << detail::fmt(c.kappa) << "\n"
     << "gamma=" << detail::fmt(c.gamma) << "\n"
     << "pattern=" << (c.pattern == MeshPattern::MirroredDiagonals ? "mirrored" : "uniform")
     << "\n"
     << "out=" << c.out << "\n"
     << "quad_degree=" << c.quad_degree << "\n"
     << "slice_y=" << detail::fmt(c.slice_y) << "\n"
     << "samples=" << c.samples << "\n";
  return os.str();
}

// Applies key=value lines onto an existing config (file values override the
// defaults; command-line flags are applied on top by the CLI).
inline void apply_config_line(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "experiment") c.experiment = value;
  else if (key == "methods") {
    c.methods.clear();
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) c.methods.insert(tok);
  } else if (key == "k") c.k = std::stoi(value);
  else if (key == "levels") {
    c.levels.clear();
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) c.levels.push_back(std::stoi(tok));
  } else if (key == "sigma_plus") c.sigma_plus = std::stod(value);
  else if (key == "kappa") c.kappa = std::stod(value);
  else if (key == "gamma") c.gamma = std::stod(value);
  else if (key == "pattern") {
    if (value == "mirrored") c.pattern = MeshPattern::MirroredDiagonals;
    else if (value == "uniform") c.pattern = MeshPattern::UniformDiagonals;
    else throw Error("cli", "unknown mesh pattern '" + value + "'");
  } else if (key == "out") c.out = value;
  else if (key == "quad_degree") c.quad_degree = std::stoi(value);
  else if (key == "slice_y") c.slice_y = std::stod(value);
  else if (key == "samples") c.samples = std::stoi(value);
  else throw Error("cli", "unknown config key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("cli", "malformed config line: " + line);
    apply_config_line(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

struct ExperimentSetup {
  DomainSpec domain;
  ProblemData problem;
  bool mapped = false;
};

inline ExperimentSetup make_experiment(const RunConfig& c) {
  ExperimentSetup s;
  if (c.experiment == "cavity") {
    s.domain = cavity_domain();
    s.problem = cavity_problem(c.sigma_plus, c.kappa);
  } else if (c.experiment == "manufactured") {
    s.domain = cavity_domain();
    s.problem = linear_transmission_manufactured(c.sigma_plus, c.kappa * c.sigma_plus);
  } else {
    s.domain = metamaterial_domain();
    s.problem = metamaterial_problem(c.kappa);
    s.mapped = true;
  }
  return s;
}

inline Mesh build_level_mesh(const ExperimentSetup& s, const RunConfig& c, int n) {
  return s.mapped ? build_mapped_mesh(s.domain, n)
                  : build_structured_mesh(s.domain, n, c.pattern);
}

inline std::string table_to_csv(const ConvergenceTable& table) {
  std::string csv =
      "cells,h,e_u,rate_u,e_q_l2,rate_q_l2,e_q_vh,rate_q_vh,e_ubar,rate_ubar,e_ustar,"
      "rate_ustar\n";
  for (const auto& row : table.rows) {
    const ErrorReport& e = row.errors;
    csv += std::to_string(e.cells) + "," + detail::fmt(e.h) + "," + detail::fmt(e.e_u) + "," +
           detail::fmt_rate(row.rate_u) + ",";
    if (e.e_q_l2 > 0.0 || e.e_ubar > 0.0) {
      csv += detail::fmt(e.e_q_l2) + "," + detail::fmt_rate(row.rate_q_l2) + "," +
             detail::fmt(e.e_q_vh) + "," + detail::fmt_rate(row.rate_q_vh) + "," +
             detail::fmt(e.e_ubar) + "," + detail::fmt_rate(row.rate_ubar) + "," +
             detail::fmt(e.e_ustar) + "," + detail::fmt_rate(row.rate_ustar);
    } else {
      csv += ",,,,,,,";  // conforming method: primal error only
    }
    csv += "\n";
  }
  return csv;
}

// One refinement study per requested method; returns the tables and writes
// <out>/<experiment>_<method>_k<k>.csv plus a .meta sidecar.
inline std::map<std::string, ConvergenceTable> run_convergence_study(const RunConfig& config) {
  config.validate();
  const ExperimentSetup setup = make_experiment(config);
  if (!setup.problem.has_exact)
    throw Error("cli", "experiment '" + config.experiment + "' provides no exact solution");

  std::map<std::string, ConvergenceTable> tables;
  for (const std::string& method : config.methods) {
    ConvergenceTable table;
    for (int n : config.levels) {
      const Mesh mesh = build_level_mesh(setup, config, n);
      const FacetClassification cls = classify_facets(mesh, setup.domain);
      ConvergenceRow row;
      if (method == "hdg") {
        const TauField tau = make_tau(mesh, cls, config.gamma);
        const HdgAssembler assembler(mesh, cls, config.k, setup.problem, tau,
                                     config.quad_degree);
        const DiscreteSolution sol = assembler.solve();
        const PostprocessedField star = postprocess(assembler, sol);
        row.errors = compute_errors(assembler, sol, &star, config.quad_degree);
      } else {
        const CgSolver cg(mesh, cls, config.k, setup.problem, config.quad_degree);
        row.errors.e_u = cg.l2_error(cg.solve(), config.quad_degree);
        row.errors.h = mesh.h;
        row.errors.cells = int(mesh.triangles.size());
      }
      table.rows.push_back(row);
    }
    compute_rates(table);
    tables[method] = table;

    const std::string stem =
        config.experiment + "_" + method + "_k" + std::to_string(config.k);
    detail::write_file(std::filesystem::path(config.out) / (stem + ".csv"),
                       table_to_csv(table));
    std::string meta = serialize_config(config);
    meta += "method=" + method + "\n";
    meta += "h_definition=longest_edge\n";
    meta += "tau_on_interface=0\n";
    if (config.experiment == "metamaterial")
      meta += "metamaterial_bc=homogeneous_dirichlet_assumed\n";
    detail::write_file(std::filesystem::path(config.out) / (stem + ".meta"), meta);
  }
  return tables;
}

namespace detail {

// Deterministic point location by brute force; returns element and reference
// coordinates, or -1 when outside the mesh.
inline int locate_element(const Mesh& mesh, const AffineMaps& maps, const Vec2& p, Vec2& ref) {
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Vec2 r = maps.to_reference(int(t), p);
    if (r.x >= -1e-10 && r.y >= -1e-10 && r.x + r.y <= 1.0 + 1e-10) {
      ref = r;
      return int(t);
    }
  }
  return -1;
}

}  // namespace detail

// Field samples on a per-element barycentric lattice plus a slice along
// x2 = slice_y; writes field_<method>.csv and slice.csv under config.out.
inline void run_field_output(const RunConfig& config) {
  config.validate();
  const ExperimentSetup setup = make_experiment(config);
  const int n = config.levels.front();
  const Mesh mesh = build_level_mesh(setup, config, n);
  const FacetClassification cls = classify_facets(mesh, setup.domain);
  const AffineMaps maps = make_affine_maps(mesh);

  if (config.slice_y < setup.domain.lower.y - 1e-12 ||
      config.slice_y > setup.domain.upper.y + 1e-12)
    throw Error("cli", "slice line x2=" + std::to_string(config.slice_y) + " is outside the domain");

  struct MethodField {
    std::string name;
    std::function<double(int, const Vec2&)> eval;          // element, reference point
    std::function<double(int, const Vec2&)> eval_star;     // may be null
  };
  std::vector<MethodField> fields;

  // Keep solver state alive for the evaluation closures.
  std::shared_ptr<HdgAssembler> hdg;
  std::shared_ptr<DiscreteSolution> hdg_sol;
  std::shared_ptr<PostprocessedField> hdg_star;
  std::shared_ptr<BasisSet> star_basis;
  std::shared_ptr<CgSolver> cg;
  std::shared_ptr<std::vector<double>> cg_sol;
  std::shared_ptr<TauField> tau;

  if (config.methods.count("hdg")) {
    tau = std::make_shared<TauField>(make_tau(mesh, cls, config.gamma));
    hdg = std::make_shared<HdgAssembler>(mesh, cls, config.k, setup.problem, *tau,
                                         config.quad_degree);
    hdg_sol = std::make_shared<DiscreteSolution>(hdg->solve());
    hdg_star = std::make_shared<PostprocessedField>(postprocess(*hdg, *hdg_sol));
    star_basis = std::make_shared<BasisSet>(ElementKind::Triangle, config.k + 1);
    fields.push_back({"hdg",
                      [&, hdg, hdg_sol](int t, const Vec2& r) { return hdg->eval_u(*hdg_sol, t, r); },
                      [&, hdg_star, star_basis](int t, const Vec2& r) {
                        return eval_ustar(*hdg_star, *star_basis, t, r);
                      }});
  }
  if (config.methods.count("cg")) {
    cg = std::make_shared<CgSolver>(mesh, cls, config.k, setup.problem, config.quad_degree);
    cg_sol = std::make_shared<std::vector<double>>(cg->solve());
    fields.push_back({"cg",
                      [cg, cg_sol](int t, const Vec2& r) { return cg->eval(*cg_sol, t, r); },
                      nullptr});
  }

  // Per-element lattice samples.
  const int lat = 3;
  for (const auto& mf : fields) {
    std::string csv = mf.eval_star ? "x,y,u,ustar\n" : "x,y,u\n";
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
      for (int i = 0; i <= lat; ++i)
        for (int j = 0; j <= lat - i; ++j) {
          const Vec2 ref{double(i) / lat, double(j) / lat};
          const Vec2 x = maps.to_physical(int(t), ref);
          csv += detail::fmt(x.x) + "," + detail::fmt(x.y) + "," + detail::fmt(mf.eval(int(t), ref));
          if (mf.eval_star) csv += "," + detail::fmt(mf.eval_star(int(t), ref));
          csv += "\n";
        }
    detail::write_file(std::filesystem::path(config.out) / ("field_" + mf.name + ".csv"), csv);
  }

  // Slice along x2 = slice_y.
  std::string header = "x1";
  for (const auto& mf : fields) header += ",u_" + mf.name;
  if (setup.problem.has_exact) header += ",u_exact";
  std::string csv = header + "\n";
  const double x0 = setup.domain.lower.x, x1 = setup.domain.upper.x;
  for (int i = 0; i < config.samples; ++i) {
    const double x = x0 + (x1 - x0) * (i + 0.5) / config.samples;
    const Vec2 p{x, config.slice_y};
    Vec2 ref;
    const int t = detail::locate_element(mesh, maps, p, ref);
    if (t < 0) throw Error("cli", "slice sample point outside the mesh");
    csv += detail::fmt(x);
    for (const auto& mf : fields) csv += "," + detail::fmt(mf.eval(t, ref));
    if (setup.problem.has_exact)
      csv += "," + detail::fmt(setup.problem.exact_u(p, mesh.triangles[t].tag));
    csv += "\n";
  }
  detail::write_file(std::filesystem::path(config.out) / "slice.csv", csv);
}

}  // namespace hdgsc
