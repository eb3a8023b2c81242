#pragma once

#include "zaremba/eigensolve.hpp"
#include "zaremba/transplant.hpp"

#include <optional>

namespace zaremba {

// sqrt(sum of squared differences of the first `count` eigenvalues), plus the
// elementwise differences
std::pair<double, std::vector<double>> compare_spectra(const Spectrum& a, const Spectrum& b,
                                                       int count);

struct RichardsonResult {
  std::vector<double> values;           // (4 lambda_{h/2} - lambda_h) / 3
  std::vector<double> error_estimates;  // |lambda_{h/2} - lambda_h| / 3
  std::vector<int> fine_index;          // coarse mode -> matched fine mode
  std::vector<double> overlaps;         // matched |<u_h, u_{h/2}>_M|
  bool aligned = true;                  // all overlaps above threshold
};

// Extrapolates eigenvalues from a mesh and its uniform refinement. `parents`
// is the midpoint table produced by refine_uniform; modes are realigned by
// M-weighted eigenvector overlap before extrapolation.
RichardsonResult richardson(const Spectrum& s_h, const EigenBasis& b_h,
                            const MatrixPair& p_h, const Spectrum& s_h2,
                            const EigenBasis& b_h2, const MatrixPair& p_h2,
                            const std::vector<std::array<int, 2>>& parents,
                            double overlap_threshold = 0.8);

// One cell of the disk-partition sweep.
struct NuCell {
  int k = 0, n = 0;
  double nu = 0;
  std::vector<double> diffs;
  bool trivial = false;
  std::string error;  // nonempty when the cell failed
};

struct NuTable {
  std::vector<NuCell> cells;  // all (k, n) with 1 <= k <= n <= max_index
  int max_index = 12;
  int eigencount = 3;
  double h = 0;
  std::uint64_t seed = 0;
  std::string mesh_descriptor;

  const NuCell* cell(int k, int n) const;
  double min_nontrivial() const;
  double max_trivial() const;
};

// The section-3.4 experiment: for every pair (k pi/24, n pi/24) with
// k <= n <= 12, both swapped problems are solved on one shared unstructured
// mesh and nu(k, n) recorded. Cell failures are recorded, not fatal.
NuTable sweep_disk(double h, int eigencount = 3, std::uint64_t seed = 1, int threads = 1);

struct HeatFit {
  double area = 0;
  double c = 0;                  // coefficient of 1/sqrt(t)
  double d = 0;                  // fitted constant
  double implied_imbalance = 0;  // L_N - L_D = 8 sqrt(pi) c
  double residual = 0;           // rms misfit over the window
  double t_lo = 0, t_hi = 0;
  int modes = 0;
};

// Fits Z(t) = sum exp(-lambda_i t) to area/(4 pi t) + c/sqrt(t) + d on the
// window [30/lambda_max, t_hi], 64 geometric points.
HeatFit heat_fit(const Spectrum& s, double area, double t_hi = 0.5);

// Proposition 2 gate: the boundary-length imbalance |L_D - L_N| when it
// exceeds tol, nullopt when the decomposition is balanced.
std::optional<double> length_balance_violation(const DomainSpec& spec, double tol = 1e-9);

// Spectrum of the sheet-swap odd (or even) subspace of a double-cover problem.
Spectrum cover_subspace_spectrum(const FullSystem& full, const std::vector<char>& dirichlet,
                                 const SymmetryPerm& sheet_swap, int count, bool odd,
                                 const EigOptions& opts = {});

inline Spectrum cover_odd_spectrum(const FullSystem& full, const std::vector<char>& dirichlet,
                                   const SymmetryPerm& sheet_swap, int count,
                                   const EigOptions& opts = {}) {
  return cover_subspace_spectrum(full, dirichlet, sheet_swap, count, true, opts);
}

}  // namespace zaremba
