#include "zaremba/eigensolve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace zaremba {

namespace {

std::pair<Spectrum, EigenBasis> solve_dense(const MatrixPair& pair, int count,
                                            const EigOptions& opts) {
  const Eigen::MatrixXd K = Eigen::MatrixXd(pair.K);
  const Eigen::MatrixXd M = Eigen::MatrixXd(pair.M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("solve_lowest: dense generalized eigensolver failed");
  Spectrum s;
  s.cluster_tol = opts.cluster_tol;
  EigenBasis b;
  b.vectors.resize(K.rows(), count);
  for (int i = 0; i < count; ++i) {
    const double lam = es.eigenvalues()[i];
    Eigen::VectorXd v = es.eigenvectors().col(i);
    const double mn = std::sqrt(v.dot(M * v));
    v /= mn;
    s.values.push_back(lam);
    const double res = (K * v - lam * (M * v)).norm() / (M * v).norm();
    s.residuals.push_back(res);
    b.vectors.col(i) = v;
  }
  return {s, b};
}

}  // namespace

std::pair<Spectrum, EigenBasis> solve_lowest(const MatrixPair& pair, int count,
                                             const EigOptions& opts) {
  const int n = pair.dim();
  if (count <= 0 || count > n)
    throw std::invalid_argument("solve_lowest: count out of range");
  if (opts.tol < 1e-12) throw std::invalid_argument("solve_lowest: tol below 1e-12");

  if (n <= opts.dense_threshold) return solve_dense(pair, count, opts);

  // shift slightly below the spectrum (all eigenvalues are >= 0 here)
  double sigma = opts.sigma;
  if (std::isnan(sigma)) {
    const double scale = pair.K.diagonal().sum() / pair.M.diagonal().sum();
    sigma = -std::clamp(1e-3 * scale, 1e-6, 10.0);
  }

  SpMat A = pair.K - sigma * pair.M;
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("solve_lowest: factorization of K - sigma M failed");

  const SpMat& M = pair.M;
  const int m_max = opts.max_subspace > 0
                        ? std::min(opts.max_subspace, n)
                        : std::min(n, std::max(4 * count + 40, 80));

  Eigen::MatrixXd Q(n, m_max);
  std::vector<double> alpha, beta;  // tridiagonal T
  // deterministic start: all ones, M-normalized
  Eigen::VectorXd q = Eigen::VectorXd::Ones(n);
  q /= std::sqrt(q.dot(M * q));
  Q.col(0) = q;

  Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
  double beta_prev = 0.0;
  int j = 0;
  Spectrum best_s;
  EigenBasis best_b;

  auto extract = [&](int k) -> std::pair<Spectrum, EigenBasis> {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    // theta sorted ascending; the largest theta give the smallest lambda
    Spectrum s;
    s.cluster_tol = opts.cluster_tol;
    EigenBasis b;
    b.vectors.resize(n, count);
    std::vector<std::pair<double, int>> lam_idx;
    for (int i = 0; i < k; ++i) {
      const double theta = es.eigenvalues()[i];
      if (theta <= 0) continue;  // spurious direction outside the window
      lam_idx.push_back({sigma + 1.0 / theta, i});
    }
    std::sort(lam_idx.begin(), lam_idx.end());
    if ((int)lam_idx.size() < count) return {s, b};  // not enough yet
    for (int i = 0; i < count; ++i) {
      const auto [lam, idx] = lam_idx[i];
      Eigen::VectorXd x = Q.leftCols(k) * es.eigenvectors().col(idx);
      const double mn = std::sqrt(x.dot(M * x));
      x /= mn;
      const Eigen::VectorXd Mx = M * x;
      const double res = (pair.K * x - lam * Mx).norm() / Mx.norm();
      s.values.push_back(lam);
      s.residuals.push_back(res);
      b.vectors.col(i) = x;
    }
    return {s, b};
  };

  std::uint64_t rng_state = 0x5bd1e995u;
  while (j < m_max) {
    // w = (K - sigma M)^{-1} M q_j
    Eigen::VectorXd w = ldlt.solve(M * Q.col(j));
    const double a = Q.col(j).dot(M * w);
    alpha.push_back(a);
    w -= a * Q.col(j);
    if (j > 0) w -= beta_prev * prev;
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd proj = Q.leftCols(j + 1).transpose() * (M * w);
      w -= Q.leftCols(j + 1) * proj;
    }
    double b = std::sqrt(std::max(0.0, w.dot(M * w)));
    if (b < 1e-14) {
      // invariant subspace hit: deterministic restart direction
      for (int i = 0; i < n; ++i) {
        rng_state = rng_state * 6364136223846793005ull + 1442695040888963407ull;
        w[i] = ((rng_state >> 33) % 10007) / 10007.0 - 0.5;
      }
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd proj = Q.leftCols(j + 1).transpose() * (M * w);
        w -= Q.leftCols(j + 1) * proj;
      }
      const double nb = std::sqrt(std::max(0.0, w.dot(M * w)));
      if (nb < 1e-14) break;  // space exhausted
      w /= nb;
      b = 0.0;
    } else {
      w /= b;
    }
    beta.push_back(b);
    prev = Q.col(j);
    beta_prev = b;
    ++j;
    if (j >= m_max) break;
    Q.col(j) = w;

    // convergence check on true residuals, every few steps once feasible
    if (j >= count + 2 && (j % 10 == 0 || j == m_max - 1)) {
      auto [s, basis] = extract(j);
      if ((int)s.values.size() == count) {
        bool ok = true;
        for (int i = 0; i < count; ++i) {
          const double scale = std::max(std::abs(s.values[i]), 1.0);
          if (s.residuals[i] > opts.tol * scale) {
            ok = false;
            break;
          }
        }
        best_s = s;
        best_b = basis;
        if (ok) break;
      }
    }
  }
  if (best_s.values.empty()) {
    auto [s, basis] = extract(j);
    best_s = s;
    best_b = basis;
  }
  if ((int)best_s.values.size() != count)
    throw std::runtime_error("solve_lowest: Lanczos failed to produce enough Ritz values");
  bool ok = true;
  for (int i = 0; i < count; ++i) {
    const double scale = std::max(std::abs(best_s.values[i]), 1.0);
    if (best_s.residuals[i] > opts.tol * scale) ok = false;
  }
  if (!ok) {
    double worst = 0;
    for (double r : best_s.residuals) worst = std::max(worst, r);
    throw std::runtime_error("solve_lowest: no convergence, worst residual " +
                             std::to_string(worst));
  }
  const double knorm = pair.K.coeffs().cwiseAbs().maxCoeff();
  for (double v : best_s.values)
    if (v < -10.0 * std::numeric_limits<double>::epsilon() * knorm)
      throw std::runtime_error("solve_lowest: spurious negative eigenvalue");
  return {best_s, best_b};
}

std::vector<std::pair<double, int>> cluster_multiplicities(const Spectrum& s) {
  std::vector<std::pair<double, int>> out;
  if (s.values.empty()) return out;
  double sum = s.values[0];
  int count = 1;
  for (std::size_t i = 1; i < s.values.size(); ++i) {
    const double gap = s.values[i] - s.values[i - 1];
    const double scale = std::max(std::abs(s.values[i]), 1e-12);
    if (gap / scale < s.cluster_tol) {
      sum += s.values[i];
      ++count;
    } else {
      out.push_back({sum / count, count});
      sum = s.values[i];
      count = 1;
    }
  }
  out.push_back({sum / count, count});
  return out;
}

}  // namespace zaremba
