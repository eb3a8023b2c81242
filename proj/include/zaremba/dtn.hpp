#pragma once

#include "zaremba/eigensolve.hpp"

#include <Eigen/Dense>

namespace zaremba {

// Quarter-disk with the four labeled boundary pieces: the Dirichlet arc
// (pi/2, 3pi/4), the Neumann arc (3pi/4, pi), the horizontal radius [-1, 0]
// and the vertical radius [0, i]. The mesh is symmetric about the 3pi/4 line,
// so the two radii carry matching trace nodes.
struct QuarterGeometry {
  Mesh mesh;
  std::vector<int> piece1;  // Dirichlet arc vertices (closed)
  std::vector<int> piece2;  // Neumann arc vertices (closed)
  std::vector<int> piece3;  // horizontal radius, interior nodes by distance from O
  std::vector<int> piece4;  // vertical radius, interior nodes by distance from O
  int corner_origin = -1;   // z = 0
  int corner_top = -1;      // z = i
  int corner_left = -1;     // z = -1
};

QuarterGeometry build_quarter_geometry(double h);

enum class TraceKind { DD, DN, ND, NN };
const char* trace_kind_name(TraceKind k);

struct DtnSet {
  double lambda = 0;
  Eigen::MatrixXd DD, DN, ND, NN;
  Eigen::MatrixXd composite;  // DD^{-1} ND NN^{-1} DN
};

struct DetSample {
  double lambda = 0;
  int sign = 0;
  double log_abs = 0;
  bool admissible = false;
};

struct ScanResult {
  std::vector<DetSample> samples;
  std::vector<double> crossings;
  // intervals containing an auxiliary eigenvalue where a sign flip cannot be
  // attributed to a crossing, plus refined flips rejected as pole-adjacent
  std::vector<std::pair<double, double>> flagged_gaps;
  // refined sign flips that proved to be even-order dips of the determinant
  // (an eigenvalue of C grazing -1 near an operator singularity)
  std::vector<double> rejected_dips;
};

// Builds the four boundary-response operators at spectral parameters lambda,
// guarding every solve with the spectra of the four auxiliary problems.
class DtnFactory {
 public:
  DtnFactory(QuarterGeometry geometry, double lambda_max_hint = 40.0);

  const QuarterGeometry& geometry() const { return geo_; }
  int trace_dim() const { return (int)geo_.piece4.size(); }

  // distance from lambda to the nearest auxiliary eigenvalue; `which` names
  // the offending problem
  double distance_to_poles(double lambda, std::string* which = nullptr) const;
  bool admissible(double lambda, double rel_tol = 1e-6) const;
  // auxiliary eigenvalues inside (lo, hi)
  std::vector<double> poles_in(double lo, double hi) const;

  Eigen::MatrixXd trace_operator(TraceKind kind, double lambda) const;
  DtnSet build_set(double lambda) const;
  DetSample sample(double lambda) const;

  const std::vector<double>& aux_spectrum(TraceKind kind) const;
  // the auxiliary spectra are tabulated up to this value; scans beyond it are
  // rejected (rebuild the factory with a larger hint)
  double covered_window() const { return covered_; }

 private:
  void ensure_window(double hi);
  std::vector<char> flags_for(TraceKind kind) const;

  QuarterGeometry geo_;
  FullSystem full_;
  std::vector<char> base_dirichlet_;
  std::vector<double> aux_[4];
  double covered_ = 0.0;
};

// Samples sign(det(C_lambda + I)) on a uniform grid and bisects each admissible
// sign change; sign changes across auxiliary eigenvalues are flagged, not
// reported as crossings. Refined flips closer than pole_flag_rel (relative) to
// an auxiliary eigenvalue are classified as pole-adjacent artifacts.
ScanResult scan_crossings(const DtnFactory& factory, double lambda_lo, double lambda_hi,
                          int grid, double pole_flag_rel = 5e-3);

}  // namespace zaremba
