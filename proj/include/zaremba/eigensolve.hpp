#pragma once

#include "zaremba/assembly.hpp"

#include <Eigen/Dense>

namespace zaremba {

struct Spectrum {
  std::vector<double> values;     // ascending
  std::vector<double> residuals;  // ||K u - lambda M u|| / ||M u|| per pair
  double cluster_tol = 1e-6;
};

struct EigenBasis {
  Eigen::MatrixXd vectors;  // columns, M-orthonormal, aligned with Spectrum::values
};

struct EigOptions {
  double tol = 1e-10;         // relative residual target
  double cluster_tol = 1e-6;  // multiplicity grouping tolerance
  double sigma = std::numeric_limits<double>::quiet_NaN();  // auto when NaN
  int max_subspace = 0;                                     // auto when 0
  int dense_threshold = 500;
};

// Lowest eigenpairs of K u = lambda M u: shift-invert Lanczos with full
// reorthogonalization and a deterministic start vector; dense reduction below
// `dense_threshold` unknowns.
std::pair<Spectrum, EigenBasis> solve_lowest(const MatrixPair& pair, int count,
                                             const EigOptions& opts = {});

// Greedy grouping of consecutive eigenvalues with relative gap < cluster_tol;
// representative value is the cluster mean.
std::vector<std::pair<double, int>> cluster_multiplicities(const Spectrum& s);

}  // namespace zaremba
