#include "zaremba/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace zaremba {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::pair<double, std::vector<double>> compare_spectra(const Spectrum& a, const Spectrum& b,
                                                       int count) {
  if ((int)a.values.size() < count || (int)b.values.size() < count)
    throw std::invalid_argument("compare_spectra: not enough eigenvalues");
  std::vector<double> diffs(count);
  double sq = 0;
  for (int i = 0; i < count; ++i) {
    diffs[i] = a.values[i] - b.values[i];
    sq += diffs[i] * diffs[i];
  }
  return {std::sqrt(sq), diffs};
}

RichardsonResult richardson(const Spectrum& s_h, const EigenBasis& b_h,
                            const MatrixPair& p_h, const Spectrum& s_h2,
                            const EigenBasis& b_h2, const MatrixPair& p_h2,
                            const std::vector<std::array<int, 2>>& parents,
                            double overlap_threshold) {
  const int k = (int)s_h.values.size();
  if ((int)s_h2.values.size() < k)
    throw std::invalid_argument("richardson: refined spectrum has fewer modes");
  const int n_coarse = (int)p_h.constrained.size();
  const int n_fine = (int)p_h2.constrained.size();
  if (n_fine != n_coarse + (int)parents.size())
    throw std::invalid_argument("richardson: parent table does not match the meshes");

  // P1 prolongation of the coarse modes onto the fine mesh
  Eigen::MatrixXd prolonged(n_fine, k);
  for (int j = 0; j < k; ++j) {
    const Eigen::VectorXd u = p_h.lift(b_h.vectors.col(j));
    Eigen::VectorXd v(n_fine);
    v.head(n_coarse) = u;
    for (std::size_t m = 0; m < parents.size(); ++m)
      v[n_coarse + (int)m] = 0.5 * (u[parents[m][0]] + u[parents[m][1]]);
    prolonged.col(j) = v;
  }

  RichardsonResult res;
  res.fine_index.assign(k, -1);
  res.overlaps.assign(k, 0.0);
  std::vector<char> used(s_h2.values.size(), 0);
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd pi = p_h2.restrict_to_free(prolonged.col(i));
    const Eigen::VectorXd Mpi = p_h2.M * pi;
    const double pnorm = std::sqrt(pi.dot(Mpi));
    int best = -1;
    double best_ov = -1;
    for (int j = 0; j < (int)s_h2.values.size(); ++j) {
      if (used[j]) continue;
      const double ov = std::abs(b_h2.vectors.col(j).dot(Mpi)) / pnorm;
      if (ov > best_ov) {
        best_ov = ov;
        best = j;
      }
    }
    used[best] = 1;
    res.fine_index[i] = best;
    res.overlaps[i] = best_ov;
    if (best_ov < overlap_threshold) res.aligned = false;
    const double lam_h = s_h.values[i];
    const double lam_h2 = s_h2.values[best];
    res.values.push_back((4.0 * lam_h2 - lam_h) / 3.0);
    res.error_estimates.push_back(std::abs(lam_h2 - lam_h) / 3.0);
  }
  return res;
}

const NuCell* NuTable::cell(int k, int n) const {
  for (const auto& c : cells)
    if (c.k == k && c.n == n) return &c;
  return nullptr;
}

double NuTable::min_nontrivial() const {
  double best = std::numeric_limits<double>::max();
  for (const auto& c : cells)
    if (!c.trivial && c.error.empty()) best = std::min(best, c.nu);
  return best;
}

double NuTable::max_trivial() const {
  double worst = 0;
  for (const auto& c : cells)
    if (c.trivial && c.error.empty()) worst = std::max(worst, c.nu);
  return worst;
}

namespace {

NuCell sweep_cell(int k, int n, double h, int eigencount, std::uint64_t seed) {
  NuCell cell;
  cell.k = k;
  cell.n = n;
  cell.trivial = disk_partition_swap_is_trivial(k * kPi / 24, n * kPi / 24);
  try {
    const auto [spec1, spec2] = build_disk_partition(k * kPi / 24, n * kPi / 24);
    const Mesh mesh = mesh_unstructured(spec1, h, seed);
    const FullSystem full = assemble_full(mesh, spec1.weight);
    const auto pair1 = constrain(full, dirichlet_vertices(mesh));
    std::vector<char> d2(mesh.num_vertices(), 0);
    for (const auto& be : mesh.boundary_edges)
      if (be.tag == BoundaryTag::Neumann) d2[be.a] = d2[be.b] = 1;
    const auto pair2 = constrain(full, d2);
    auto [s1, b1] = solve_lowest(pair1, eigencount);
    auto [s2, b2] = solve_lowest(pair2, eigencount);
    auto [nu, diffs] = compare_spectra(s1, s2, eigencount);
    cell.nu = nu;
    cell.diffs = diffs;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

NuTable sweep_disk(double h, int eigencount, std::uint64_t seed, int threads) {
  NuTable table;
  table.eigencount = eigencount;
  table.h = h;
  table.seed = seed;
  table.mesh_descriptor =
      "unstructured h=" + std::to_string(h) + " seed=" + std::to_string(seed);
  std::vector<std::pair<int, int>> cells;
  for (int k = 1; k <= table.max_index; ++k)
    for (int n = k; n <= table.max_index; ++n) cells.push_back({k, n});

  if (threads <= 1) {
    for (auto [k, n] : cells) table.cells.push_back(sweep_cell(k, n, h, eigencount, seed));
    return table;
  }
  // chunked fan-out; cells are independent and the table order is fixed by
  // the spawn order, so the result is thread-count independent
  for (std::size_t start = 0; start < cells.size(); start += threads) {
    std::vector<std::future<NuCell>> futs;
    for (std::size_t i = start; i < std::min(start + threads, cells.size()); ++i)
      futs.push_back(std::async(std::launch::async, sweep_cell, cells[i].first,
                                cells[i].second, h, eigencount, seed));
    for (auto& f : futs) table.cells.push_back(f.get());
  }
  return table;
}

HeatFit heat_fit(const Spectrum& s, double area, double t_hi) {
  if (s.values.empty()) throw std::invalid_argument("heat_fit: empty spectrum");
  const double lam_max = s.values.back();
  const double t_lo = 30.0 / lam_max;
  if (!(t_lo < t_hi))
    throw std::invalid_argument(
        "heat_fit: window invalid; supply more eigenvalues or a larger t_hi (truncation "
        "tail too heavy at the left endpoint)");
  const int npts = 64;
  Eigen::MatrixXd A(npts, 2);
  Eigen::VectorXd rhs(npts);
  for (int i = 0; i < npts; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, (double)i / (npts - 1));
    double z = 0;
    for (double lam : s.values) z += std::exp(-lam * t);
    A(i, 0) = 1.0 / std::sqrt(t);
    A(i, 1) = 1.0;
    rhs[i] = z - area / (4.0 * kPi * t);
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(rhs);
  HeatFit fit;
  fit.area = area;
  fit.c = coef[0];
  fit.d = coef[1];
  fit.implied_imbalance = coef[0] * 8.0 * std::sqrt(kPi);
  fit.residual = (A * coef - rhs).norm() / std::sqrt((double)npts);
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.modes = (int)s.values.size();
  return fit;
}

std::optional<double> length_balance_violation(const DomainSpec& spec, double tol) {
  const auto [ld, ln] = boundary_lengths(spec);
  const double imbalance = std::abs(ld - ln);
  if (imbalance > tol) return imbalance;
  return std::nullopt;
}

Spectrum cover_subspace_spectrum(const FullSystem& full, const std::vector<char>& dirichlet,
                                 const SymmetryPerm& sheet_swap, int count, bool odd,
                                 const EigOptions& opts) {
  const int nv = (int)dirichlet.size();
  if ((int)sheet_swap.map.size() != nv)
    throw std::invalid_argument("cover_subspace_spectrum: permutation size mismatch");
  for (int v = 0; v < nv; ++v)
    if (dirichlet[v] != dirichlet[sheet_swap.map[v]])
      throw std::invalid_argument(
          "cover_subspace_spectrum: constraints are not sheet-swap invariant");
  const MatrixPair pair = constrain(full, dirichlet);
  const int nf = pair.dim();

  std::vector<Eigen::Triplet<double>> tb;
  int cols = 0;
  const double w = 1.0 / std::sqrt(2.0);
  for (int d = 0; d < nf; ++d) {
    const int v = pair.dof_to_vertex[d];
    const int sv = sheet_swap.map[v];
    if (sv == v) {
      if (!odd) tb.emplace_back(d, cols++, 1.0);  // swap-fixed vertices die in the odd space
      continue;
    }
    if (sv < v) continue;  // handled by the partner
    const int d2 = pair.vertex_to_dof[sv];
    tb.emplace_back(d, cols, w);
    tb.emplace_back(d2, cols, odd ? -w : w);
    ++cols;
  }
  if (cols < count)
    throw std::runtime_error("cover_subspace_spectrum: projector rank below requested count");
  SpMat B(nf, cols);
  B.setFromTriplets(tb.begin(), tb.end());
  B.makeCompressed();

  MatrixPair sub;
  sub.K = SpMat(B.transpose() * pair.K * B);
  sub.M = SpMat(B.transpose() * pair.M * B);
  sub.K.makeCompressed();
  sub.M.makeCompressed();
  sub.dof_to_vertex.resize(cols);
  sub.vertex_to_dof.resize(cols);
  sub.constrained.assign(cols, 0);
  for (int i = 0; i < cols; ++i) sub.dof_to_vertex[i] = sub.vertex_to_dof[i] = i;
  auto [s, b] = solve_lowest(sub, count, opts);
  return s;
}

}  // namespace zaremba
