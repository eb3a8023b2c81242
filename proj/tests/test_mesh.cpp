#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zaremba/mesh.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace zaremba;

namespace {
constexpr double kPi = 3.14159265358979323846;
const BoundaryTag D = BoundaryTag::Dirichlet;
const BoundaryTag N = BoundaryTag::Neumann;
}  // namespace

TEST_CASE("fundamental quarter-disk mesh snaps arc vertices onto the circle") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto m = mesh_fundamental(spec, 0.0, kPi / 2, 0.1);
  int on_circle = 0;
  for (const auto& v : m.vertices) {
    if (v.norm() > 1 - 1e-12) {
      CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
      ++on_circle;
    }
  }
  CHECK(on_circle > 10);
}

TEST_CASE("halving h roughly quadruples the triangle count") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto coarse = mesh_fundamental(spec, 0.0, kPi / 2, 0.1);
  const auto fine = mesh_fundamental(spec, 0.0, kPi / 2, 0.05);
  const double ratio = (double)fine.num_triangles() / coarse.num_triangles();
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("fundamental mesh rejects degenerate input") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  CHECK_THROWS(mesh_fundamental(spec, 0.0, 0.0, 0.1));
  CHECK_THROWS(mesh_fundamental(spec, 0.0, kPi / 2, -1.0));
}

TEST_CASE("sector block mesh boundary edges carry piece provenance") {
  SectorialBlock b;
  b.alpha = kPi / 4;
  b.z1 = Vec2(1, 0);
  b.z2 = Vec2(std::cos(kPi / 4), std::sin(kPi / 4));
  b.gamma = {Curve::arc(Vec2(0, 0), 1.0, 0.0, kPi / 8, N),
             Curve::arc(Vec2(0, 0), 1.0, kPi / 8, kPi / 4, N)};
  b.piece_part = {1, 2};
  const auto spec = build_sectorial_domain(b, false);
  const auto m = mesh_fundamental(spec, 0.0, kPi / 4, 0.1);
  std::set<int> outer_curves;
  for (const auto& be : m.boundary_edges)
    if (be.curve >= 0 && spec.curves[be.curve].kind == Curve::Kind::Arc)
      outer_curves.insert(be.curve);
  // both pieces of gamma_1 are represented, with their own tags
  REQUIRE(outer_curves.size() == 2);
  std::set<BoundaryTag> tags;
  for (int c : outer_curves) tags.insert(spec.curves[c].tag);
  CHECK(tags.size() == 2);
}

TEST_CASE("reflection about the vertical axis yields a symmetric half-disk mesh") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto quarter = mesh_fundamental(spec, 0.0, kPi / 4, 0.1);
  const auto half = mesh_by_reflection(quarter, {kPi / 4, kPi / 2});
  half.validate();
  const auto* perm = half.find_perm("reflect_" + std::to_string(kPi / 2));
  REQUIRE(perm != nullptr);
  for (std::size_t i = 0; i < perm->map.size(); ++i)
    CHECK(perm->map[perm->map[i]] == (int)i);
}

TEST_CASE("sectorial mesh by reflection has four copies of the block") {
  SectorialBlock b;
  b.alpha = kPi / 4;
  b.z1 = Vec2(1, 0);
  b.z2 = Vec2(0.5, 0.5);
  b.gamma = {Curve::segment(Vec2(1, 0), Vec2(0.5, 0.5), N)};
  b.piece_part = {2};
  const auto spec = build_sectorial_domain(b, false);
  const auto block = mesh_fundamental(spec, 0.0, kPi / 4, 0.1);
  const auto full = mesh_by_reflection(block, {kPi / 4, kPi / 2});
  CHECK(full.num_triangles() == 4 * block.num_triangles());
  full.validate();
}

TEST_CASE("mesh_symmetric produces a fully tagged half-disk mesh") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto m = mesh_symmetric(spec, 0.05);
  m.validate();
  double ld = 0, ln = 0;
  for (const auto& be : m.boundary_edges) {
    const double l = (m.vertices[be.a] - m.vertices[be.b]).norm();
    (be.tag == D ? ld : ln) += l;
  }
  // polygonal lengths approach the exact ones from below
  CHECK(ld == doctest::Approx(1 + kPi / 2).epsilon(2e-3));
  CHECK(ln == doctest::Approx(1 + kPi / 2).epsilon(2e-3));
}

TEST_CASE("unstructured meshing is deterministic per seed") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto a = mesh_unstructured(spec, 0.08, 1);
  const auto b = mesh_unstructured(spec, 0.08, 1);
  REQUIRE(a.num_vertices() == b.num_vertices());
  std::ostringstream sa, sb;
  for (int i = 0; i < a.num_vertices(); ++i) {
    sa.write(reinterpret_cast<const char*>(a.vertices[i].data()), 2 * sizeof(double));
    sb.write(reinterpret_cast<const char*>(b.vertices[i].data()), 2 * sizeof(double));
  }
  CHECK(sa.str() == sb.str());
  const auto c = mesh_unstructured(spec, 0.08, 2);
  CHECK(c.num_vertices() != 0);  // different seed still valid
}

TEST_CASE("unstructured disk mesh keeps arc endpoints as vertices") {
  const auto [spec, swapped] = build_disk_partition(5 * kPi / 24, kPi / 2);
  const auto m = mesh_unstructured(spec, 0.1, 3);
  for (const auto& c : spec.curves) {
    for (const Vec2& p : {c.start(), c.end()}) {
      bool found = false;
      for (const auto& v : m.vertices)
        if ((v - p).norm() < 1e-11) found = true;
      CHECK_MESSAGE(found, "arc endpoint missing from mesh");
    }
  }
  CHECK(m.min_angle_deg() >= 20.0);
}

TEST_CASE("refinement splits triangles in four and snaps arc midpoints") {
  const auto spec = build_half_disk(1, MetricWeight::flat());
  const auto m = mesh_symmetric(spec, 0.12);
  const auto r = refine_uniform(m);
  CHECK(r.num_triangles() == 4 * m.num_triangles());
  CHECK(r.boundary_edges.size() == 2 * m.boundary_edges.size());
  for (const auto& v : r.vertices)
    if (v.norm() > 1 - 1e-9) CHECK(std::abs(v.norm() - 1.0) <= 1e-14);
  // symmetry permutations survive refinement
  bool has_reflection = false;
  for (const auto& p : r.symmetry_perms)
    if (p.name.rfind("reflect_", 0) == 0) has_reflection = true;
  CHECK(has_reflection);
  r.validate();
}

TEST_CASE("structured rectangle mesh of the square has the diagonal symmetry") {
  const auto spec = build_rectangle(0, 0, kPi, kPi, D, D, D, D);
  const auto m = mesh_structured_rectangle(spec, 8, 8);
  m.validate();
  CHECK(m.find_perm("diagonal") != nullptr);
  CHECK(m.find_perm("mirror_x") != nullptr);
}

TEST_CASE("double cover mesh") {
  const auto cover = build_double_cover(build_alternating_disk());
  const auto m = build_cover_mesh(cover, 0.15);
  m.validate();
  SUBCASE("sheet swap fixes exactly the branch point") {
    const auto* T = m.find_perm("sheet_swap");
    REQUIRE(T != nullptr);
    int fixed = 0;
    for (int i = 0; i < m.num_vertices(); ++i)
      if (T->map[i] == i) {
        ++fixed;
        CHECK(m.vertices[i].norm() < 1e-12);
      }
    CHECK(fixed == 1);
  }
  SUBCASE("U and V are involutive symmetries with the expected fixed sets") {
    const auto* U = m.find_perm("cover_U");
    const auto* V = m.find_perm("cover_V");
    REQUIRE(U != nullptr);
    REQUIRE(V != nullptr);
    for (int i = 0; i < m.num_vertices(); ++i) {
      if (U->map[i] == i) {
        // fixed points of U lie over the positive-x radius (or at O)
        const Vec2& p = m.vertices[i];
        CHECK(std::abs(p.y()) < 1e-12);
        CHECK(p.x() > -1e-12);
      }
      if (V->map[i] == i) {
        const Vec2& p = m.vertices[i];
        CHECK(std::abs(p.y()) < 1e-12);
        CHECK(p.x() < 1e-12);
      }
    }
  }
  SUBCASE("vertex count matches the two-sheet gluing") {
    // base mesh duplicated, slit vertices doubled once (not four times), O single
    const auto base_m = mesh_symmetric(build_alternating_disk(), 0.15);
    CHECK(m.num_vertices() == 2 * base_m.num_vertices() - 1);
  }
}
