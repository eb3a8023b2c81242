#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zaremba/transplant.hpp"

#include <cmath>

using namespace zaremba;

namespace {
constexpr double kPi = 3.14159265358979323846;

struct ProblemPair {
  Mesh mesh;
  FullSystem full;
  MatrixPair p1, p2;
};

ProblemPair make_pair(const DomainSpec& spec1, const DomainSpec& spec2, double h) {
  ProblemPair pp;
  pp.mesh = mesh_symmetric(spec1, h);
  pp.full = assemble_full(pp.mesh, spec1.weight);
  pp.p1 = constrain(pp.full, dirichlet_vertices(pp.mesh));
  // problem II: same mesh, swapped tags
  std::vector<char> d2(pp.mesh.num_vertices(), 0);
  for (const auto& be : pp.mesh.boundary_edges)
    if (be.tag == BoundaryTag::Neumann) d2[be.a] = d2[be.b] = 1;
  pp.p2 = constrain(pp.full, d2);
  (void)spec2;
  return pp;
}

SectorialBlock triangle_block() {
  SectorialBlock b;
  b.alpha = kPi / 4;
  b.z1 = Vec2(1, 0);
  b.z2 = Vec2(0.5, 0.5);
  b.gamma = {Curve::segment(Vec2(1, 0), Vec2(0.5, 0.5), BoundaryTag::Neumann)};
  b.piece_part = {2};
  return b;
}

SectorialBlock rectangle_block() {
  SectorialBlock b;
  b.alpha = kPi / 4;
  b.z1 = Vec2(1, 0);
  b.z2 = Vec2(1, 1);
  b.gamma = {Curve::segment(Vec2(1, 0), Vec2(1, 1), BoundaryTag::Neumann)};
  b.piece_part = {1};
  return b;
}
}  // namespace

TEST_CASE("transplant maps zero to zero and is linear") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto m = mesh_symmetric(spec, 0.1);
  const auto T = build_transplant(m);
  CHECK(T.geometric_defect == 0.0);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(m.num_vertices());
  CHECK((T.matrix * z).norm() == 0.0);
}

TEST_CASE("forward then inverse is the identity on admissible vectors") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  auto pp = make_pair(spec, spec, 0.1);
  const auto F = build_transplant(pp.mesh, true);
  const auto G = build_transplant(pp.mesh, false);
  // deterministic test vectors in the problem-I admissible space
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(pp.mesh.num_vertices());
    for (int i = 0; i < pp.p1.dim(); ++i)
      u[pp.p1.dof_to_vertex[i]] = std::sin(0.37 * (i + 1) * (trial + 1));
    const Eigen::VectorXd back = G.matrix * (F.matrix * u);
    CHECK((back - u).lpNorm<Eigen::Infinity>() < 1e-12 * u.lpNorm<Eigen::Infinity>());
  }
}

TEST_CASE("eighth power of the map is the identity on the swapped-admissible space") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  auto pp = make_pair(spec, spec, 0.12);
  const auto F = build_transplant(pp.mesh, true);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(pp.mesh.num_vertices());
  for (int i = 0; i < pp.p2.dim(); ++i)
    v[pp.p2.dof_to_vertex[i]] = std::cos(1.7 * i + 0.3);
  Eigen::VectorXd w = v;
  for (int k = 0; k < 8; ++k) w = F.matrix * w;
  CHECK((w - v).lpNorm<Eigen::Infinity>() < 1e-12 * v.lpNorm<Eigen::Infinity>());
}

TEST_CASE("the map preserves the M-norm on admissible vectors") {
  const auto spec = build_half_disk(1, MetricWeight::spherical());
  auto pp = make_pair(spec, spec, 0.1);
  const auto F = build_transplant(pp.mesh, true);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(pp.mesh.num_vertices());
    for (int i = 0; i < pp.p1.dim(); ++i)
      u[pp.p1.dof_to_vertex[i]] = std::sin(0.61 * (i + 2) * (trial + 1));
    const Eigen::VectorXd v = F.matrix * u;
    const double nu = u.dot(pp.full.M * u);
    const double nv = v.dot(pp.full.M * v);
    CHECK(nv == doctest::Approx(nu).epsilon(1e-12));
  }
}

TEST_CASE("interface rows agree between the two formula branches on admissible vectors") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  auto pp = make_pair(spec, spec, 0.1);
  const auto T1 = build_transplant(pp.mesh, true, false);
  const auto T2 = build_transplant(pp.mesh, true, true);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(pp.mesh.num_vertices());
  for (int i = 0; i < pp.p1.dim(); ++i) u[pp.p1.dof_to_vertex[i]] = std::sin(0.83 * i);
  const Eigen::VectorXd d = T1.matrix * u - T2.matrix * u;
  CHECK(d.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("theorem 1 on the half-disk: exact discrete isospectrality") {
  for (const auto& weight : {MetricWeight::flat(), MetricWeight::spherical()}) {
    const auto spec = build_half_disk(1, weight);
    auto pp = make_pair(spec, spec, 0.07);
    EigOptions opts;
    opts.tol = 1e-12;
    auto [s1, b1] = solve_lowest(pp.p1, 20, opts);
    auto [s2, b2] = solve_lowest(pp.p2, 20, opts);
    for (int i = 0; i < 20; ++i)
      CHECK(s1.values[i] == doctest::Approx(s2.values[i]).epsilon(1e-10));
    const auto T = build_transplant(pp.mesh, true);
    const auto rep = verify_transplantation(pp.p1, pp.p2, s1, b1, T, 1e-9);
    CHECK(rep.pass);
    for (const auto& r : rep.modes) {
      CHECK(r.residual <= 1e-9);
      CHECK(r.constraint_violation <= 1e-12);
      CHECK(r.norm_defect <= 1e-9);
    }
  }
}

TEST_CASE("theorem 2 instances: triangle and rectangle") {
  for (const auto& block : {triangle_block(), rectangle_block()}) {
    const auto spec1 = build_sectorial_domain(block, false);
    auto pp = make_pair(spec1, spec1, 0.08);
    EigOptions opts;
    opts.tol = 1e-12;
    auto [s1, b1] = solve_lowest(pp.p1, 12, opts);
    auto [s2, b2] = solve_lowest(pp.p2, 12, opts);
    for (int i = 0; i < 12; ++i)
      CHECK(s1.values[i] == doctest::Approx(s2.values[i]).epsilon(1e-10));
    const auto T = build_transplant(pp.mesh, true);
    const auto rep = verify_transplantation(pp.p1, pp.p2, s1, b1, T, 1e-9);
    CHECK(rep.pass);
  }
}

TEST_CASE("negative control: an asymmetric vertex perturbation is detected") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  auto m = mesh_symmetric(spec, 0.1);
  // shift one interior vertex off the symmetric position
  int victim = -1;
  for (int i = 0; i < m.num_vertices(); ++i) {
    const Vec2& p = m.vertices[i];
    if (p.norm() > 0.3 && p.norm() < 0.7 && p.y() > 0.2 && std::abs(p.x()) > 0.2) {
      victim = i;
      break;
    }
  }
  REQUIRE(victim >= 0);
  m.vertices[victim] += Vec2(1e-3, -1e-3);
  m.symmetry_perms.clear();  // perms no longer valid
  const auto full = assemble_full(m, MetricWeight::flat());
  const auto p1 = constrain(full, dirichlet_vertices(m));
  std::vector<char> d2(m.num_vertices(), 0);
  for (const auto& be : m.boundary_edges)
    if (be.tag == BoundaryTag::Neumann) d2[be.a] = d2[be.b] = 1;
  const auto p2 = constrain(full, d2);
  auto [s1, b1] = solve_lowest(p1, 10);
  const auto T = build_transplant(m, true);
  CHECK(T.geometric_defect > 1e-4);
  const auto rep = verify_transplantation(p1, p2, s1, b1, T, 1e-9);
  CHECK_FALSE(rep.pass);
  double worst = 0;
  for (const auto& r : rep.modes) worst = std::max(worst, r.residual);
  CHECK(worst > 1e-6);
}

TEST_CASE("transplant requires the reflection structure") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto m = mesh_unstructured(spec, 0.1, 5);
  CHECK_THROWS(build_transplant(m));
}
