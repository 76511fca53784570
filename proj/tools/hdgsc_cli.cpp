// Command-line driver: convergence studies, field/slice output, and mesh dumps
// for the sign-changing diffusion solvers.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdgsc/driver.hpp"

int main(int argc, char** argv) {
  using namespace hdgsc;

  CLI::App app{"Hybridized DG / conforming FEM driver for sign-changing diffusion"};

  std::string mode = "study";
  std::string config_file;
  std::string experiment, pattern, out;
  std::vector<std::string> methods;
  std::vector<int> levels;
  int k = -999, quad_degree = -999, samples = -999;
  double sigma_plus = 1e300, kappa = 1e300, gamma = 1e300, slice_y = 1e300;

  app.add_option("--mode", mode, "study | field | mesh")
      ->check(CLI::IsMember({"study", "field", "mesh"}));
  app.add_option("--config", config_file, "key=value config file (flags override it)");
  app.add_option("--experiment", experiment, "cavity | metamaterial | manufactured");
  app.add_option("--method", methods, "hdg and/or cg (repeatable)");
  app.add_option("--k", k, "polynomial degree");
  app.add_option("--levels", levels, "mesh resolutions, e.g. --levels 8 16 32 64");
  app.add_option("--sigma-plus", sigma_plus, "diffusion coefficient on the positive subdomain");
  app.add_option("--kappa", kappa, "coefficient contrast sigma_minus / sigma_plus (negative)");
  app.add_option("--gamma", gamma, "stabilization magnitude |tau| away from the interface");
  app.add_option("--pattern", pattern, "mirrored | uniform")
      ->check(CLI::IsMember({"mirrored", "uniform"}));
  app.add_option("--out", out, "output directory");
  app.add_option("--quad-degree", quad_degree, "quadrature degree override");
  app.add_option("--slice-y", slice_y, "x2 coordinate of the slice line (field mode)");
  app.add_option("--samples", samples, "number of slice sample points (field mode)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: cli: " << e.what() << "\n";
    return 1;
  }

  try {
    RunConfig config;
    if (!config_file.empty()) {
      std::ifstream f(config_file);
      if (!f) throw Error("cli", "cannot open config file '" + config_file + "'");
      config = parse_config(f, config);
    }
    if (!experiment.empty()) apply_config_line(config, "experiment", experiment);
    if (!methods.empty()) {
      config.methods.clear();
      for (const auto& m : methods) config.methods.insert(m);
      for (const auto& m : config.methods)
        if (m != "hdg" && m != "cg") throw Error("cli", "unknown method '" + m + "'");
    }
    if (k != -999) config.k = k;
    if (!levels.empty()) config.levels = levels;
    if (sigma_plus != 1e300) config.sigma_plus = sigma_plus;
    if (kappa != 1e300) config.kappa = kappa;
    if (gamma != 1e300) config.gamma = gamma;
    if (!pattern.empty()) apply_config_line(config, "pattern", pattern);
    if (!out.empty()) config.out = out;
    if (quad_degree != -999) config.quad_degree = quad_degree;
    if (slice_y != 1e300) config.slice_y = slice_y;
    if (samples != -999) config.samples = samples;

    if (mode == "study") {
      const auto tables = run_convergence_study(config);
      for (const auto& [method, table] : tables) {
        std::cout << method << " (" << config.experiment << ", k=" << config.k << ")\n";
        std::cout << table_to_csv(table);
      }
    } else if (mode == "field") {
      run_field_output(config);
      std::cout << "field and slice output written to " << config.out << "\n";
    } else {
      config.validate();
      const ExperimentSetup setup = make_experiment(config);
      const Mesh mesh = build_level_mesh(setup, config, config.levels.front());
      const FacetClassification cls = classify_facets(mesh, setup.domain);
      detail::write_file(std::filesystem::path(config.out) / "mesh.txt",
                         mesh_to_text(mesh, cls));
      std::cout << "mesh with " << mesh.triangles.size() << " triangles written to "
                << config.out << "\n";
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.module() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: cli: " << e.what() << "\n";
    return 1;
  }
}
