#include "zaremba/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <stdexcept>

namespace zaremba {

FullSystem assemble_full(const Mesh& m, const MetricWeight& w) {
  const int n = m.num_vertices();
  std::vector<Eigen::Triplet<double>> tk, tm;
  tk.reserve(m.num_triangles() * 9);
  tm.reserve(m.num_triangles() * 9);
  for (const auto& t : m.triangles) {
    const Vec2& a = m.vertices[t[0]];
    const Vec2& b = m.vertices[t[1]];
    const Vec2& c = m.vertices[t[2]];
    const double area2 = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (area2 <= 0) throw std::runtime_error("assemble: inverted triangle");
    const double area = 0.5 * area2;
    // gradients of the barycentric basis
    const Vec2 g[3] = {Vec2(b.y() - c.y(), c.x() - b.x()) / area2,
                       Vec2(c.y() - a.y(), a.x() - c.x()) / area2,
                       Vec2(a.y() - b.y(), b.x() - a.x()) / area2};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        tk.emplace_back(t[i], t[j], area * g[i].dot(g[j]));
    // edge-midpoint rule for the weighted mass
    const Vec2 mid[3] = {0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)};
    // basis values at midpoints: phi_i(mid of edge not containing i) = 0, else 1/2
    // mid[0]=ab touches 0,1; mid[1]=bc touches 1,2; mid[2]=ca touches 2,0
    static const int touch[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (int q = 0; q < 3; ++q) {
      const double wq = (area / 3.0) * w(mid[q].norm());
      const int i0 = touch[q][0], i1 = touch[q][1];
      tm.emplace_back(t[i0], t[i0], wq * 0.25);
      tm.emplace_back(t[i1], t[i1], wq * 0.25);
      tm.emplace_back(t[i0], t[i1], wq * 0.25);
      tm.emplace_back(t[i1], t[i0], wq * 0.25);
    }
  }
  FullSystem fs;
  fs.K.resize(n, n);
  fs.M.resize(n, n);
  fs.K.setFromTriplets(tk.begin(), tk.end());
  fs.M.setFromTriplets(tm.begin(), tm.end());
  fs.K.makeCompressed();
  fs.M.makeCompressed();
  return fs;
}

std::vector<char> dirichlet_vertices(const Mesh& m) {
  std::vector<char> d(m.num_vertices(), 0);
  for (const auto& be : m.boundary_edges) {
    if (be.tag == BoundaryTag::Dirichlet) {
      d[be.a] = 1;
      d[be.b] = 1;
    }
  }
  return d;
}

Eigen::VectorXd MatrixPair::lift(const Eigen::VectorXd& free_vec) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(constrained.size());
  for (int i = 0; i < dim(); ++i) full[dof_to_vertex[i]] = free_vec[i];
  return full;
}

Eigen::VectorXd MatrixPair::restrict_to_free(const Eigen::VectorXd& full) const {
  Eigen::VectorXd v(dim());
  for (int i = 0; i < dim(); ++i) v[i] = full[dof_to_vertex[i]];
  return v;
}

MatrixPair constrain(const FullSystem& full, const std::vector<char>& dirichlet) {
  const int n = (int)dirichlet.size();
  if (full.K.rows() != n) throw std::invalid_argument("constrain: size mismatch");
  MatrixPair p;
  p.constrained = dirichlet;
  p.vertex_to_dof.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (!dirichlet[v]) {
      p.vertex_to_dof[v] = (int)p.dof_to_vertex.size();
      p.dof_to_vertex.push_back(v);
    }
  }
  const int nf = p.dim();
  if (nf == 0) throw std::invalid_argument("constrain: no free dofs");
  std::vector<Eigen::Triplet<double>> tk, tm;
  for (int col = 0; col < n; ++col) {
    if (dirichlet[col]) continue;
    for (SpMat::InnerIterator it(full.K, col); it; ++it)
      if (!dirichlet[it.row()])
        tk.emplace_back(p.vertex_to_dof[it.row()], p.vertex_to_dof[col], it.value());
    for (SpMat::InnerIterator it(full.M, col); it; ++it)
      if (!dirichlet[it.row()])
        tm.emplace_back(p.vertex_to_dof[it.row()], p.vertex_to_dof[col], it.value());
  }
  p.K.resize(nf, nf);
  p.M.resize(nf, nf);
  p.K.setFromTriplets(tk.begin(), tk.end());
  p.M.setFromTriplets(tm.begin(), tm.end());
  p.K.makeCompressed();
  p.M.makeCompressed();
  // the mass must be positive definite; Cholesky is the check
  Eigen::SimplicialLLT<SpMat> llt(p.M);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("constrain: mass matrix not positive definite");
  return p;
}

MatrixPair assemble(const Mesh& m, const MetricWeight& w) {
  return constrain(assemble_full(m, w), dirichlet_vertices(m));
}

ShiftedSolver::ShiftedSolver(const FullSystem& full, std::vector<char> dirichlet,
                             double lambda, std::string problem_name)
    : dirichlet_(std::move(dirichlet)), name_(std::move(problem_name)), lambda_(lambda) {
  const int n = (int)dirichlet_.size();
  A_full_ = full.K - lambda * full.M;
  A_full_.makeCompressed();
  v2d_.assign(n, -1);
  for (int v = 0; v < n; ++v)
    if (!dirichlet_[v]) {
      v2d_[v] = (int)d2v_.size();
      d2v_.push_back(v);
    }
  const int nf = (int)d2v_.size();
  std::vector<Eigen::Triplet<double>> tff, tfc, tmm;
  for (int col = 0; col < n; ++col) {
    for (SpMat::InnerIterator it(A_full_, col); it; ++it) {
      const int r = (int)it.row();
      if (dirichlet_[r]) continue;
      if (!dirichlet_[col])
        tff.emplace_back(v2d_[r], v2d_[col], it.value());
      else
        tfc.emplace_back(v2d_[r], col, it.value());
    }
    for (SpMat::InnerIterator it(full.M, col); it; ++it)
      if (!dirichlet_[it.row()] && !dirichlet_[col])
        tmm.emplace_back(v2d_[it.row()], v2d_[col], it.value());
  }
  A_ff_.resize(nf, nf);
  A_ff_.setFromTriplets(tff.begin(), tff.end());
  A_ff_.makeCompressed();
  A_fc_.resize(nf, n);
  A_fc_.setFromTriplets(tfc.begin(), tfc.end());
  A_fc_.makeCompressed();
  M_ff_.resize(nf, nf);
  M_ff_.setFromTriplets(tmm.begin(), tmm.end());
  M_ff_.makeCompressed();
  lu_.compute(A_ff_);
  singular_ = lu_.info() != Eigen::Success;
  if (!singular_) {
    // inverse-power probe of (K - lambda M)^{-1} M: its dominant magnitude is
    // 1/|lambda_nearest - lambda|
    Eigen::VectorXd v = Eigen::VectorXd::Ones(nf);
    v /= std::sqrt(v.dot(M_ff_ * v));
    double rho = 0.0;
    for (int it = 0; it < 3; ++it) {
      Eigen::VectorXd w = lu_.solve(M_ff_ * v);
      const double nw = std::sqrt(std::abs(w.dot(M_ff_ * w)));
      if (!std::isfinite(nw) || nw == 0.0) {
        rho = std::numeric_limits<double>::infinity();
        break;
      }
      rho = nw;
      v = w / nw;
    }
    spectral_gap_ = 1.0 / rho;
    singular_ = spectral_gap_ < 1e-8 * std::max(1.0, std::abs(lambda_));
  }
}

Eigen::VectorXd ShiftedSolver::solve(const Eigen::VectorXd& dirichlet_values,
                                     const Eigen::VectorXd& load) const {
  if (singular_)
    throw std::runtime_error("ShiftedSolver: " + name_ +
                             " is singular at lambda = " + std::to_string(lambda_) +
                             " (distance to spectrum ~ " + std::to_string(spectral_gap_) +
                             ")");
  const int n = (int)dirichlet_.size();
  Eigen::VectorXd uc = Eigen::VectorXd::Zero(n);
  for (int v = 0; v < n; ++v)
    if (dirichlet_[v]) uc[v] = dirichlet_values[v];
  Eigen::VectorXd rhs((int)d2v_.size());
  for (std::size_t i = 0; i < d2v_.size(); ++i) rhs[(int)i] = load[d2v_[i]];
  rhs -= A_fc_ * uc;
  const Eigen::VectorXd uf = lu_.solve(rhs);
  Eigen::VectorXd u = uc;
  for (std::size_t i = 0; i < d2v_.size(); ++i) u[d2v_[i]] = uf[(int)i];
  return u;
}

Eigen::VectorXd ShiftedSolver::residual(const Eigen::VectorXd& field) const {
  return A_full_ * field;
}

int eigenvalue_count_below(const FullSystem& full, const std::vector<char>& dirichlet,
                           double lambda) {
  MatrixPair p = constrain(full, dirichlet);
  SpMat A = p.K - lambda * p.M;
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success) return -1;
  const auto& D = ldlt.vectorD();
  int count = 0;
  for (int i = 0; i < D.size(); ++i)
    if (D[i] < 0) ++count;
  return count;
}

}  // namespace zaremba
