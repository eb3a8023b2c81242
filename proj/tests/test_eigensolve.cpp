#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zaremba/eigensolve.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace zaremba;

namespace {
constexpr double kPi = 3.14159265358979323846;
const BoundaryTag D = BoundaryTag::Dirichlet;
const BoundaryTag N = BoundaryTag::Neumann;
}  // namespace

TEST_CASE("square Dirichlet spectrum matches separation of variables") {
  const auto spec = build_rectangle(0, 0, kPi, kPi, D, D, D, D);
  const auto m = mesh_structured_rectangle(spec, 40, 40);
  const auto pair = assemble(m, MetricWeight::flat());
  auto [s, b] = solve_lowest(pair, 6);
  const auto ref = oracle::square_dirichlet_spectrum(6);  // {2, 5, 5, 8, 10, 10}
  for (int i = 0; i < 6; ++i)
    CHECK(s.values[i] == doctest::Approx(ref[i]).epsilon(4e-3));
  // the {5,5} pair is exactly degenerate on the diagonal-symmetric mesh
  auto clusters = cluster_multiplicities(s);
  REQUIRE(clusters.size() >= 2);
  CHECK(clusters[1].second == 2);
  CHECK(clusters[1].first == doctest::Approx(5.0).epsilon(2e-3));
}

TEST_CASE("disk Dirichlet ground state approaches the Bessel zero") {
  const auto spec = build_disk(D);
  const auto m = mesh_symmetric(spec, 0.05);
  const auto pair = assemble(m, MetricWeight::flat());
  auto [s, b] = solve_lowest(pair, 1);
  const double j01 = oracle::bessel_zero(0, 1);
  CHECK(s.values[0] == doctest::Approx(j01 * j01).epsilon(2e-3));
}

TEST_CASE("residuals meet the requested tolerance") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto m = mesh_symmetric(spec, 0.07);
  const auto pair = assemble(m, MetricWeight::flat());
  auto [s, b] = solve_lowest(pair, 10);
  for (double r : s.residuals) CHECK(r <= 1e-10 * std::max(1.0, s.values.back()));
  // M-orthonormality of the returned basis
  const Eigen::MatrixXd G = b.vectors.transpose() * pair.M * b.vectors;
  CHECK((G - Eigen::MatrixXd::Identity(10, 10)).lpNorm<Eigen::Infinity>() < 1e-10);
  // values ascend
  for (std::size_t i = 1; i < s.values.size(); ++i) CHECK(s.values[i] >= s.values[i - 1]);
}

TEST_CASE("dense and iterative paths agree to 1e-9") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto m = mesh_symmetric(spec, 0.16);
  const auto pair = assemble(m, MetricWeight::flat());
  REQUIRE(pair.dim() <= 500);
  EigOptions dense_opts;
  auto [sd, bd] = solve_lowest(pair, 8, dense_opts);
  EigOptions iter_opts;
  iter_opts.dense_threshold = 0;  // force the Lanczos path
  auto [si, bi] = solve_lowest(pair, 8, iter_opts);
  for (int i = 0; i < 8; ++i)
    CHECK(si.values[i] == doctest::Approx(sd.values[i]).epsilon(1e-9));
}

TEST_CASE("shift choice does not change the sorted eigenvalues") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto m = mesh_symmetric(spec, 0.06);
  const auto pair = assemble(m, MetricWeight::flat());
  EigOptions a;
  a.dense_threshold = 0;
  a.sigma = -0.5;
  EigOptions b;
  b.dense_threshold = 0;
  b.sigma = -3.0;
  auto [sa, ba] = solve_lowest(pair, 6, a);
  auto [sb, bb] = solve_lowest(pair, 6, b);
  for (int i = 0; i < 6; ++i)
    CHECK(sa.values[i] == doctest::Approx(sb.values[i]).epsilon(1e-9));
}

TEST_CASE("permutation similarity leaves the spectrum unchanged") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto m = mesh_symmetric(spec, 0.1);
  const auto* perm = m.find_perm("reflect_" + std::to_string(kPi / 2));
  REQUIRE(perm != nullptr);
  const auto fs = assemble_full(m, MetricWeight::flat());
  const auto dirichlet = dirichlet_vertices(m);
  const auto pair = constrain(fs, dirichlet);
  // permute the full system by the mesh symmetry, then constrain
  const int n = m.num_vertices();
  std::vector<Eigen::Triplet<double>> tp;
  for (int i = 0; i < n; ++i) tp.emplace_back(perm->map[i], i, 1.0);
  SpMat P(n, n);
  P.setFromTriplets(tp.begin(), tp.end());
  FullSystem permuted{SpMat(P.transpose() * fs.K * P), SpMat(P.transpose() * fs.M * P)};
  std::vector<char> pd(n, 0);
  for (int i = 0; i < n; ++i) pd[i] = dirichlet[perm->map[i]];
  const auto pair2 = constrain(permuted, pd);
  auto [s1, b1] = solve_lowest(pair, 8);
  auto [s2, b2] = solve_lowest(pair2, 8);
  for (int i = 0; i < 8; ++i)
    CHECK(s1.values[i] == doctest::Approx(s2.values[i]).epsilon(1e-9));
}

TEST_CASE("cluster_multiplicities groups near-degenerate values") {
  Spectrum s;
  s.values = {2.0, 5.0 - 5e-10, 5.0 + 5e-10, 8.0};
  s.residuals = {0, 0, 0, 0};
  s.cluster_tol = 1e-6;
  const auto c = cluster_multiplicities(s);
  REQUIRE(c.size() == 3);
  CHECK(c[0].second == 1);
  CHECK(c[1].second == 2);
  CHECK(c[1].first == doctest::Approx(5.0));
  CHECK(c[2].second == 1);
}

TEST_CASE("count and tolerance preconditions") {
  const auto spec = build_rectangle(0, 0, 1, 1, D, D, D, D);
  const auto m = mesh_structured_rectangle(spec, 4, 4);
  const auto pair = assemble(m, MetricWeight::flat());
  CHECK_THROWS(solve_lowest(pair, 0));
  CHECK_THROWS(solve_lowest(pair, pair.dim() + 1));
  EigOptions bad;
  bad.tol = 1e-13;
  CHECK_THROWS(solve_lowest(pair, 1, bad));
}
