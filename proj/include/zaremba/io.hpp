#pragma once

#include "zaremba/analysis.hpp"
#include "zaremba/dtn.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace zaremba {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "zaremba 1.0.0";

// ---- domain and mesh serialization ------------------------------------------

json spec_to_json(const DomainSpec& spec);
DomainSpec spec_from_json(const json& j);

void save_mesh(const std::filesystem::path& path, const Mesh& m);
Mesh load_mesh(const std::filesystem::path& path);

// legacy ASCII unstructured-grid export; `point_data` optional nodal scalars
void export_vtk(const std::filesystem::path& path, const Mesh& m,
                const Eigen::VectorXd* point_data = nullptr,
                const std::string& data_name = "u");

// ---- figures -----------------------------------------------------------------

// Dirichlet curves solid red, Neumann curves dashed blue.
void export_svg_domain(const std::filesystem::path& path, const DomainSpec& spec);
void export_svg_mesh(const std::filesystem::path& path, const Mesh& m);
// filled triangle color map of a full-vertex coefficient vector
void export_svg_mode(const std::filesystem::path& path, const Mesh& m,
                     const Eigen::VectorXd& full_values);
void export_svg_nutable(const std::filesystem::path& path, const NuTable& table);

// ---- experiment configs --------------------------------------------------------

// Parsed and schema-checked experiment description. Unknown keys anywhere in
// the document are rejected.
struct ExperimentConfig {
  std::string name;
  std::string task;  // solve | compare | sweep | dtn-scan | cover-check |
                     // heat-fit | symmetry-pair
  json domain;       // family + parameters
  double mesh_h = 0.1;
  int mesh_levels = 1;
  std::string mesh_kind = "symmetric";  // symmetric | unstructured | structured
  std::uint64_t mesh_seed = 1;
  int structured_nx = 16, structured_ny = 16;
  int solver_count = 10;
  double solver_tol = 1e-10;
  double cluster_tol = 1e-6;
  json task_params;  // per-task knobs
  std::string output;

  json echo;  // the validated raw document
};

ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// Builds the DomainSpec named by a config's domain block. For pair families
// ("symmetry-pair" domains) use build_domain_pair instead.
DomainSpec build_domain(const json& domain);
std::pair<DomainSpec, DomainSpec> build_domain_pair(const json& domain);

// ---- runner ---------------------------------------------------------------------

struct RunResult {
  json bundle;
  std::filesystem::path bundle_path;
};

// Executes a config and writes bundle.json plus mesh/CSV side files under
// out_dir/<config name>/. Throws ConfigError for schema problems and
// std::runtime_error for numerical failures.
RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir, int threads = 1);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// names of the reproduction configs shipped in configs/
std::vector<std::string> experiment_catalog();

}  // namespace zaremba
