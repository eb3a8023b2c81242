#pragma once

#include "zaremba/eigensolve.hpp"

namespace zaremba {

// The eigenfunction transplantation between the swapped problems on a
// reflection-built mesh spanning the angular range [0, 4 alpha]: a signed
// combination of the sector reflections with weights 1/sqrt(2).
struct TransplantMap {
  SpMat matrix;   // acts on full-vertex coefficient vectors
  bool forward;   // true: problem I -> problem II, false: the paper's inverse
  double alpha;   // quarter opening of the domain
  double geometric_defect;  // worst reflection lookup mismatch (0 on exact meshes)
};

// `interface_branch2` switches the formula used on the middle symmetry ray
// phi = 2 alpha to the second branch; the two must agree on admissible vectors.
TransplantMap build_transplant(const Mesh& m, bool forward = true,
                               bool interface_branch2 = false);

struct TransplantModeReport {
  int mode = 0;
  double lambda = 0;
  double residual = 0;              // ||K2 v - lambda M2 v|| / ||M2 v||
  double constraint_violation = 0;  // max |v| over the target Dirichlet set
  double norm_defect = 0;           // | ||v||_M - ||u||_M |
};

struct TransplantReport {
  std::vector<TransplantModeReport> modes;
  double tol = 0;
  bool pass = false;
  int first_failure = -1;
};

// Checks that the transplant carries each eigenpair of problem I into an
// eigenpair of problem II on the same mesh: residual below tol, target
// constraints met exactly, M-norm preserved.
TransplantReport verify_transplantation(const MatrixPair& problem1,
                                        const MatrixPair& problem2, const Spectrum& s1,
                                        const EigenBasis& b1, const TransplantMap& map,
                                        double tol = 1e-9);

}  // namespace zaremba
