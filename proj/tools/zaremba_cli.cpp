// Command-line front end: run experiment configs, sweep the disk partitions,
// list the bundled reproductions, export figures and meshes, validate configs.
#include "zaremba/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace zaremba;

namespace {

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv("ZAREMBA_OUT_ROOT")) return env;
  return "results";
}

std::filesystem::path config_dir() {
  if (const char* env = std::getenv("ZAREMBA_CONFIG_DIR")) return env;
  return "configs";
}

int run_one(const std::filesystem::path& path, const std::filesystem::path& out,
            double mesh_h, int modes, int threads) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(path);
    if (mesh_h > 0) cfg.mesh_h = mesh_h;
    if (modes > 0) cfg.solver_count = modes;
  } catch (const ConfigError& e) {
    json err = {{"error", "config"}, {"message", e.what()}, {"file", path.string()}};
    std::cerr << err.dump(2) << "\n";
    return 2;
  }
  try {
    const RunResult rr = run_experiment(cfg, out, threads);
    std::cout << "wrote " << rr.bundle_path.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    json err = {{"error", "config"}, {"message", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return 2;
  } catch (const std::exception& e) {
    json err = {{"error", "numerical"}, {"message", e.what()}, {"config", cfg.name}};
    std::cerr << err.dump(2) << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zaremba: mixed Dirichlet-Neumann eigenvalue laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = default_output_root().string();
  double mesh_h = -1;
  int modes = -1;
  int threads = 1;

  auto* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "path to a config JSON file")->required();
  run->add_option("--out", out_dir, "output directory root");
  run->add_option("--mesh-h", mesh_h, "override the mesh size");
  run->add_option("--modes", modes, "override the eigenvalue count");
  run->add_option("--threads", threads, "worker threads for sweeps");

  double sweep_h = 0.05;
  int sweep_count = 3;
  std::uint64_t sweep_seed = 1;
  auto* sweep = app.add_subcommand("sweep", "run the disk-partition sweep directly");
  sweep->add_option("--mesh-h", sweep_h, "mesh size");
  sweep->add_option("--eigencount", sweep_count, "eigenvalues per cell");
  sweep->add_option("--seed", sweep_seed, "mesh seed");
  sweep->add_option("--threads", threads, "worker threads");
  sweep->add_option("--out", out_dir, "output directory root");

  auto* list = app.add_subcommand("list", "list the bundled experiment configs");

  std::string export_what = "domain";
  std::string export_out = "figure.svg";
  auto* exp = app.add_subcommand("export", "export a figure or mesh from a config");
  exp->add_option("config", config_path, "path to a config JSON file")->required();
  exp->add_option("--what", export_what, "domain | mesh | mode | vtk");
  exp->add_option("--to", export_out, "output file");
  exp->add_option("--mesh-h", mesh_h, "override the mesh size");

  auto* val = app.add_subcommand("validate", "schema-check a config file");
  val->add_option("config", config_path, "path to a config JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return run_one(config_path, out_dir, mesh_h, modes, threads);

  if (sweep->parsed()) {
    json doc = {{"name", "disk_sweep_cli"},
                {"task", "sweep"},
                {"mesh", {{"h", sweep_h}, {"seed", sweep_seed}, {"kind", "unstructured"}}},
                {"task_params", {{"eigencount", sweep_count}}}};
    try {
      const auto cfg = parse_config(doc);
      const RunResult rr = run_experiment(cfg, out_dir, threads);
      std::cout << "wrote " << rr.bundle_path.string() << "\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return 3;
    }
  }

  if (list->parsed()) {
    const auto dir = config_dir();
    for (const auto& name : experiment_catalog()) {
      const auto path = dir / (name + ".json");
      std::string status = "missing";
      try {
        (void)load_config(path);
        status = "ok";
      } catch (const std::exception&) {
        status = std::filesystem::exists(path) ? "invalid" : "missing";
      }
      std::cout << name << "  [" << status << "]  " << path.string() << "\n";
    }
    return 0;
  }

  if (val->parsed()) {
    try {
      const auto cfg = load_config(config_path);
      std::cout << "valid: " << cfg.name << " (task " << cfg.task << ")\n";
      return 0;
    } catch (const ConfigError& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }
  }

  if (exp->parsed()) {
    try {
      auto cfg = load_config(config_path);
      if (mesh_h > 0) cfg.mesh_h = mesh_h;
      const DomainSpec spec = cfg.task == "symmetry-pair"
                                  ? build_domain_pair(cfg.domain).first
                                  : build_domain(cfg.domain);
      if (export_what == "domain") {
        export_svg_domain(export_out, spec);
      } else {
        Mesh m = spec.sheets == 2 ? build_cover_mesh(spec, cfg.mesh_h)
                 : spec.symmetry_axes.empty() || cfg.mesh_kind == "unstructured"
                     ? mesh_unstructured(spec, cfg.mesh_h, cfg.mesh_seed)
                     : mesh_symmetric(spec, cfg.mesh_h);
        if (export_what == "mesh") {
          export_svg_mesh(export_out, m);
        } else if (export_what == "vtk") {
          export_vtk(export_out, m);
        } else if (export_what == "mode") {
          const auto pair = assemble(m, spec.weight);
          auto [s, b] = solve_lowest(pair, 1);
          export_svg_mode(export_out, m, pair.lift(b.vectors.col(0)));
        } else {
          std::cerr << "unknown export kind " << export_what << "\n";
          return 2;
        }
      }
      std::cout << "wrote " << export_out << "\n";
      return 0;
    } catch (const ConfigError& e) {
      std::cerr << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return 3;
    }
  }
  return 0;
}
