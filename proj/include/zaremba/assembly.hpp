#pragma once

#include "zaremba/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace zaremba {

using SpMat = Eigen::SparseMatrix<double>;

// Stiffness and weighted mass over the full vertex set, no constraints applied.
struct FullSystem {
  SpMat K, M;
};

// K from exact P1 gradients; M by the 3-point edge-midpoint rule (exact for
// the flat weight, O(h^2) consistent for radial weights).
FullSystem assemble_full(const Mesh& m, const MetricWeight& w);

// Constrained vertices from boundary tags: every endpoint of a Dirichlet edge.
// Junction vertices between D and N edges come out Dirichlet.
std::vector<char> dirichlet_vertices(const Mesh& m);

struct MatrixPair {
  SpMat K, M;  // free-dof blocks
  std::vector<int> dof_to_vertex;
  std::vector<int> vertex_to_dof;  // -1 at constrained vertices
  std::vector<char> constrained;

  int dim() const { return (int)dof_to_vertex.size(); }
  Eigen::VectorXd lift(const Eigen::VectorXd& free_vec) const;      // zeros at constraints
  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full) const;
};

MatrixPair constrain(const FullSystem& full, const std::vector<char>& dirichlet);
MatrixPair assemble(const Mesh& m, const MetricWeight& w);

// Factorized (K - lambda M) under a Dirichlet set; supports inhomogeneous
// Dirichlet data and weak Neumann loads, and exposes the residual functional
// used for variational flux recovery.
class ShiftedSolver {
 public:
  ShiftedSolver(const FullSystem& full, std::vector<char> dirichlet, double lambda,
                std::string problem_name = "shifted system");

  // dirichlet_values read at constrained vertices, load read at free vertices;
  // both full-length. Returns the full-length field.
  Eigen::VectorXd solve(const Eigen::VectorXd& dirichlet_values,
                        const Eigen::VectorXd& load) const;

  // r = (K - lambda M) field over all vertices; at Dirichlet-constrained rows
  // this is the boundary-flux functional of the discrete solution.
  Eigen::VectorXd residual(const Eigen::VectorXd& field) const;

  double lambda() const { return lambda_; }
  bool singular() const { return singular_; }
  // inverse-power estimate of the distance from lambda to the nearest
  // eigenvalue of the homogeneous problem
  double distance_to_singularity() const { return spectral_gap_; }
  const std::vector<char>& constrained() const { return dirichlet_; }

 private:
  SpMat A_full_;
  SpMat A_ff_, A_fc_, M_ff_;
  Eigen::SparseLU<SpMat> lu_;
  std::vector<int> v2d_;
  std::vector<int> d2v_;
  std::vector<char> dirichlet_;
  std::string name_;
  double lambda_ = 0.0;
  double spectral_gap_ = 0.0;
  bool singular_ = false;
};

// Number of generalized eigenvalues below `lambda` by LDLT inertia of
// K - lambda M on the free block; -1 when the factorization breaks down.
int eigenvalue_count_below(const FullSystem& full, const std::vector<char>& dirichlet,
                           double lambda);

}  // namespace zaremba
