#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zaremba/assembly.hpp"
#include "zaremba/eigensolve.hpp"

#include <cmath>

using namespace zaremba;

namespace {
constexpr double kPi = 3.14159265358979323846;
const BoundaryTag D = BoundaryTag::Dirichlet;
const BoundaryTag N = BoundaryTag::Neumann;
}  // namespace

TEST_CASE("all-Neumann square: constants span the stiffness kernel") {
  const auto spec = build_rectangle(0, 0, 1, 1, N, N, N, N);
  const auto m = mesh_structured_rectangle(spec, 6, 6);
  const auto pair = assemble(m, MetricWeight::flat());
  CHECK(pair.dim() == m.num_vertices());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(pair.dim());
  CHECK((pair.K * ones).lpNorm<Eigen::Infinity>() < 1e-13);
  // total mass equals the area
  CHECK(ones.dot(pair.M * ones) == doctest::Approx(1.0).epsilon(1e-13));
  // smallest eigenvalue is zero with constant eigenvector
  auto [s, b] = solve_lowest(pair, 3);
  CHECK(std::abs(s.values[0]) < 1e-10);
  Eigen::VectorXd v0 = b.vectors.col(0);
  v0 /= v0[0];
  CHECK((v0 - Eigen::VectorXd::Ones(pair.dim())).lpNorm<Eigen::Infinity>() < 1e-7);
}

TEST_CASE("flat mass equals the exact P1 mass matrix") {
  const auto spec = build_rectangle(0, 0, 1, 1, N, N, N, N);
  const auto m = mesh_structured_rectangle(spec, 3, 3);
  const auto fs = assemble_full(m, MetricWeight::flat());
  // reference: exact consistent mass assembled per triangle (area/12 pattern)
  std::vector<Eigen::Triplet<double>> tm;
  for (const auto& t : m.triangles) {
    const double area = m.triangle_area(
        (int)(&t - m.triangles.data()));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        tm.emplace_back(t[i], t[j], (i == j ? 2.0 : 1.0) * area / 12.0);
  }
  SpMat ref(m.num_vertices(), m.num_vertices());
  ref.setFromTriplets(tm.begin(), tm.end());
  const SpMat diff = fs.M - ref;
  CHECK(Eigen::MatrixXd(diff).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("assembled matrices are exactly symmetric") {
  const auto spec = build_half_disk(1, MetricWeight::spherical());
  const auto m = mesh_symmetric(spec, 0.1);
  const auto fs = assemble_full(m, spec.weight);
  CHECK(Eigen::MatrixXd(SpMat(fs.K - SpMat(fs.K.transpose()))).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(Eigen::MatrixXd(SpMat(fs.M - SpMat(fs.M.transpose()))).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("spherical weight: total mass approximates the hemisphere area") {
  auto disk = build_disk(N);
  const auto m = mesh_symmetric(disk, 0.05);
  const auto fs = assemble_full(m, MetricWeight::spherical());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_vertices());
  const double total = ones.dot(fs.M * ones);
  // exact integral of 4/(1+r^2)^2 over the unit disk
  CHECK(total == doctest::Approx(2 * kPi).epsilon(1e-3 / (2 * kPi)));
  CHECK(std::abs(total - 2 * kPi) <= 1e-3);
}

TEST_CASE("symmetry permutations commute with the assembled matrices") {
  const auto spec = build_half_disk(1, MetricWeight::spherical());
  const auto m = mesh_symmetric(spec, 0.12);
  const auto fs = assemble_full(m, spec.weight);
  const auto* perm = m.find_perm("reflect_" + std::to_string(kPi / 2));
  REQUIRE(perm != nullptr);
  const int n = m.num_vertices();
  std::vector<Eigen::Triplet<double>> tp;
  for (int i = 0; i < n; ++i) tp.emplace_back(perm->map[i], i, 1.0);
  SpMat P(n, n);
  P.setFromTriplets(tp.begin(), tp.end());
  const double kerr =
      Eigen::MatrixXd(SpMat(P.transpose() * fs.K * P) - fs.K).lpNorm<Eigen::Infinity>();
  const double merr =
      Eigen::MatrixXd(SpMat(P.transpose() * fs.M * P) - fs.M).lpNorm<Eigen::Infinity>();
  CHECK(kerr < 1e-12);
  CHECK(merr < 1e-12);
}

TEST_CASE("adding Dirichlet constraints never lowers the ground state") {
  const auto spec = build_rectangle(0, 0, 1, 1, D, N, N, N);
  const auto m = mesh_structured_rectangle(spec, 8, 8);
  const auto fs = assemble_full(m, MetricWeight::flat());
  auto dirichlet = dirichlet_vertices(m);
  double prev = -1.0;
  for (int extra = 0; extra < 3; ++extra) {
    auto flags = dirichlet;
    // grow the constraint set along the right edge
    int added = 0;
    for (int v = 0; v < m.num_vertices() && added < extra * 4; ++v) {
      if (std::abs(m.vertices[v].x() - 1.0) < 1e-12 && !flags[v]) {
        flags[v] = 1;
        ++added;
      }
    }
    const auto pair = constrain(fs, flags);
    auto [s, b] = solve_lowest(pair, 1);
    CHECK(s.values[0] >= prev - 1e-11);
    prev = s.values[0];
  }
}

TEST_CASE("shifted solve with zero data returns the zero field") {
  const auto spec = build_rectangle(0, 0, 1, 1, D, D, D, D);
  const auto m = mesh_structured_rectangle(spec, 6, 6);
  const auto fs = assemble_full(m, MetricWeight::flat());
  ShiftedSolver solver(fs, dirichlet_vertices(m), 0.0);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(m.num_vertices());
  const Eigen::VectorXd u = solver.solve(z, z);
  CHECK(u.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("discrete harmonic extension obeys the maximum principle") {
  const auto spec = build_rectangle(0, 0, 1, 1, D, D, D, D);
  const auto m = mesh_structured_rectangle(spec, 10, 10);
  const auto fs = assemble_full(m, MetricWeight::flat());
  ShiftedSolver solver(fs, dirichlet_vertices(m), 0.0);
  Eigen::VectorXd data = Eigen::VectorXd::Zero(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v)
    if (std::abs(m.vertices[v].y() - 1.0) < 1e-12) data[v] = 1.0;  // 1 on the top side
  const Eigen::VectorXd u =
      solver.solve(data, Eigen::VectorXd::Zero(m.num_vertices()));
  CHECK(u.minCoeff() >= -1e-13);
  CHECK(u.maxCoeff() <= 1.0 + 1e-13);
}

TEST_CASE("singular shifted systems are reported") {
  const auto spec = build_rectangle(0, 0, kPi, kPi, D, D, D, D);
  const auto m = mesh_structured_rectangle(spec, 12, 12);
  const auto fs = assemble_full(m, MetricWeight::flat());
  const auto pair = assemble(m, MetricWeight::flat());
  auto [s, b] = solve_lowest(pair, 1);
  ShiftedSolver solver(fs, dirichlet_vertices(m), s.values[0]);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m.num_vertices());
  CHECK_THROWS(solver.solve(z, z));
}

TEST_CASE("inertia counts eigenvalues below the shift") {
  const auto spec = build_rectangle(0, 0, kPi, kPi, D, D, D, D);
  const auto m = mesh_structured_rectangle(spec, 10, 10);
  const auto fs = assemble_full(m, MetricWeight::flat());
  const auto pair = assemble(m, MetricWeight::flat());
  auto [s, b] = solve_lowest(pair, 6);
  // between the 4th and 5th discrete eigenvalues the inertia must be 4
  const double lam = 0.5 * (s.values[3] + s.values[4]);
  CHECK(eigenvalue_count_below(fs, dirichlet_vertices(m), lam) == 4);
  CHECK(eigenvalue_count_below(fs, dirichlet_vertices(m), s.values[0] * 0.5) == 0);
}
