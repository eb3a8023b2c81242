#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zaremba/geometry.hpp"

#include <cmath>
#include <random>

using namespace zaremba;

namespace {
constexpr double kPi = 3.14159265358979323846;
const BoundaryTag D = BoundaryTag::Dirichlet;
const BoundaryTag N = BoundaryTag::Neumann;

// slow reference arclength in the weighted metric, independent of the library
// quadrature: fine midpoint sum
double midpoint_weighted_length(const Curve& c, const MetricWeight& w, int n = 200000) {
  double acc = 0;
  const double L = c.length();
  for (int i = 0; i < n; ++i) {
    const Vec2 p = c.at((i + 0.5) / n);
    acc += std::sqrt(w(p.norm())) * L / n;
  }
  return acc;
}
}  // namespace

TEST_CASE("half-disk problem I has balanced boundary parts") {
  const auto s = build_half_disk(1, MetricWeight::flat());
  const auto [ld, ln] = boundary_lengths(s);
  CHECK(ld == doctest::Approx(1 + kPi / 2).epsilon(1e-12));
  CHECK(ln == doctest::Approx(1 + kPi / 2).epsilon(1e-12));
}

TEST_CASE("half-disk problem II is problem I with tags exchanged") {
  const auto s1 = build_half_disk(1, MetricWeight::flat());
  const auto s2 = build_half_disk(2, MetricWeight::flat());
  REQUIRE(s1.curves.size() == s2.curves.size());
  for (std::size_t i = 0; i < s1.curves.size(); ++i) {
    CHECK(s1.curves[i].approx_equal(s2.curves[i].with_tag(swap_tag(s2.curves[i].tag))));
  }
}

TEST_CASE("spherical half-disk has equal weighted boundary parts") {
  const auto s = build_half_disk(1, MetricWeight::spherical());
  const auto [ld, ln] = boundary_lengths(s);
  // independent oracle: midpoint-rule arclength
  double ld_ref = 0, ln_ref = 0;
  for (const auto& c : s.curves)
    (c.tag == D ? ld_ref : ln_ref) += midpoint_weighted_length(c, s.weight);
  CHECK(ld == doctest::Approx(ld_ref).epsilon(1e-8));
  CHECK(ln == doctest::Approx(ln_ref).epsilon(1e-8));
  CHECK(ld == doctest::Approx(ln).epsilon(1e-9));
  CHECK(ld == doctest::Approx(kPi).epsilon(1e-9));
}

TEST_CASE("disk partition basics") {
  SUBCASE("arcs outside (0, pi] are rejected") {
    CHECK_THROWS(build_disk_partition(0.0, 1.0));
    CHECK_THROWS(build_disk_partition(1.0, kPi + 0.1));
  }
  SUBCASE("equal quarter arcs give the trivially isospectral pair") {
    CHECK(disk_partition_swap_is_trivial(kPi / 2, kPi / 2));
  }
  SUBCASE("every diagonal (alpha = beta) is trivial") {
    for (int k = 1; k <= 12; ++k) CHECK(disk_partition_swap_is_trivial(k * kPi / 24, k * kPi / 24));
  }
  SUBCASE("(11 pi/24, pi/2) is nontrivial") {
    CHECK_FALSE(disk_partition_swap_is_trivial(11 * kPi / 24, kPi / 2));
  }
  SUBCASE("Dirichlet totals are pi for both specs") {
    const auto [a, b] = build_disk_partition(kPi / 3, kPi / 3);
    CHECK(boundary_lengths(a).first == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(boundary_lengths(b).first == doctest::Approx(kPi).epsilon(1e-12));
  }
  SUBCASE("L_D = L_N = pi for random (alpha, beta)") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.05, kPi);
    for (int trial = 0; trial < 50; ++trial) {
      const auto [a, b] = build_disk_partition(u(rng), u(rng));
      const auto [ld, ln] = boundary_lengths(a);
      CHECK(ld == doctest::Approx(kPi).epsilon(1e-12));
      CHECK(ln == doctest::Approx(kPi).epsilon(1e-12));
    }
  }
}

namespace {
SectorialBlock half_disk_block() {
  SectorialBlock b;
  b.alpha = kPi / 4;
  b.z1 = Vec2(1, 0);
  b.z2 = Vec2(std::cos(kPi / 4), std::sin(kPi / 4));
  b.gamma = {Curve::arc(Vec2(0, 0), 1.0, 0.0, kPi / 4, N)};
  b.piece_part = {2};
  return b;
}

SectorialBlock triangle_block() {
  SectorialBlock b;
  b.alpha = kPi / 4;
  b.z1 = Vec2(1, 0);
  b.z2 = Vec2(0.5, 0.5);
  b.gamma = {Curve::segment(Vec2(1, 0), Vec2(0.5, 0.5), N)};
  b.piece_part = {2};
  return b;
}

SectorialBlock rectangle_block() {
  SectorialBlock b;
  b.alpha = kPi / 4;
  b.z1 = Vec2(1, 0);
  b.z2 = Vec2(1, 1);
  b.gamma = {Curve::segment(Vec2(1, 0), Vec2(1, 1), N)};
  b.piece_part = {1};
  return b;
}

bool curve_on_segment(const Curve& c, const Vec2& a, const Vec2& b) {
  if (c.kind != Curve::Kind::Segment) return false;
  for (double t : {0.0, 0.5, 1.0}) {
    const Vec2 p = c.at(t);
    const Vec2 d = (b - a).normalized();
    const Vec2 v = p - a;
    const double along = v.dot(d);
    if (std::abs(v.x() * d.y() - v.y() * d.x()) > 1e-12) return false;
    if (along < -1e-12 || along > (b - a).norm() + 1e-12) return false;
  }
  return true;
}
}  // namespace

TEST_CASE("sectorial block with quarter arc reproduces the half-disk") {
  const auto s = build_sectorial_domain(half_disk_block(), false);
  const auto ref = build_half_disk(1, MetricWeight::flat());
  REQUIRE(s.curves.size() == ref.curves.size());
  for (const auto& rc : ref.curves) {
    bool found = false;
    for (const auto& sc : s.curves) found = found || sc.approx_equal(rc);
    CHECK_MESSAGE(found, "missing half-disk curve");
  }
}

TEST_CASE("sectorial triangle example is the triangle (-1, 1, i)") {
  const auto s = build_sectorial_domain(triangle_block(), false);
  const Vec2 A(-1, 0), B(1, 0), C(0, 1);
  for (const auto& c : s.curves) {
    const bool ok = curve_on_segment(c, A, B) || curve_on_segment(c, B, C) ||
                    curve_on_segment(c, C, A);
    CHECK_MESSAGE(ok, "curve not on the triangle boundary");
  }
  const auto [ld, ln] = boundary_lengths(s);
  CHECK(ld == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-12));
  CHECK(ln == doctest::Approx(1 + std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("sectorial rectangle example is the 2x1 rectangle") {
  const auto s = build_sectorial_domain(rectangle_block(), false);
  double area = s.signed_area();
  CHECK(area == doctest::Approx(2.0).epsilon(1e-12));
  const auto [ld, ln] = boundary_lengths(s);
  CHECK(ld == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(ln == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sectorial builder is tag-equivariant under the swap flag") {
  for (auto block : {half_disk_block(), triangle_block(), rectangle_block()}) {
    const auto a = build_sectorial_domain(block, false);
    const auto b = build_sectorial_domain(block, true);
    REQUIRE(a.curves.size() == b.curves.size());
    for (std::size_t i = 0; i < a.curves.size(); ++i)
      CHECK(a.curves[i].approx_equal(b.curves[i].with_tag(swap_tag(b.curves[i].tag))));
  }
}

TEST_CASE("overlapping sectorial blocks are rejected") {
  SectorialBlock b;
  b.alpha = kPi / 4;
  b.z1 = Vec2(1, 0);
  b.z2 = Vec2(std::cos(kPi / 4) * 0.4, std::sin(kPi / 4) * 0.4);
  // a curve that wanders outside the sector would break K; the block validator
  // rejects it before the domain is assembled
  b.gamma = {Curve::segment(Vec2(1, 0), Vec2(0.8, 0.9), N),
             Curve::segment(Vec2(0.8, 0.9), b.z2, N)};
  b.piece_part = {1, 1};
  CHECK_THROWS(build_sectorial_domain(b, false));
}

TEST_CASE("symmetry pair of the unit square, Dirichlet top") {
  HalfInput half;
  half.chain = {Curve::segment(Vec2(1, 0), Vec2(1, 1), N),
                Curve::segment(Vec2(1, 1), Vec2(0, 1), D),
                Curve::segment(Vec2(0, 1), Vec2(0, 0), N)};
  half.axis_point = Vec2(0, 0);
  half.axis_dir = Vec2(1, 0);
  const auto [axi, cen] = build_symmetry_pair(half);
  // both are the 1 x 2 rectangle with Dirichlet exactly on the two short edges
  for (const auto& s : {axi, cen}) {
    double ld = 0;
    for (const auto& c : s.curves)
      if (c.tag == D) {
        ld += c.length();
        CHECK(std::abs(std::abs(c.at(0.5).y()) - 1.0) < 1e-12);
      }
    CHECK(ld == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.signed_area() == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("symmetry pair with asymmetric tags puts central Dirichlet on opposite edges") {
  HalfInput half;
  half.chain = {Curve::segment(Vec2(1, 0), Vec2(1, 1), N),
                Curve::segment(Vec2(1, 1), Vec2(0, 1), N),
                Curve::segment(Vec2(0, 1), Vec2(0, 0), D)};
  half.axis_point = Vec2(0, 0);
  half.axis_dir = Vec2(1, 0);
  const auto [axi, cen] = build_symmetry_pair(half);
  // axisymmetric: Dirichlet on the whole left edge x=0
  for (const auto& c : axi.curves)
    if (c.tag == D) CHECK(std::abs(c.at(0.5).x()) < 1e-12);
  // central: Dirichlet on x=0 upper edge and x=1 lower edge
  int d_left = 0, d_right = 0;
  for (const auto& c : cen.curves)
    if (c.tag == D) {
      const Vec2 m = c.at(0.5);
      if (std::abs(m.x()) < 1e-12 && m.y() > 0) ++d_left;
      if (std::abs(m.x() - 1) < 1e-12 && m.y() < 0) ++d_right;
    }
  CHECK(d_left == 1);
  CHECK(d_right == 1);
}

TEST_CASE("quarter-sphere symmetry pair reproduces the figure-12 tag layouts") {
  HalfInput half;
  half.chain = {Curve::segment(Vec2(0, 0), Vec2(1, 0), N),
                Curve::arc(Vec2(0, 0), 1.0, 0.0, kPi / 2, D)};
  half.axis_point = Vec2(0, 0);
  half.axis_dir = Vec2(0, 1);
  half.weight = MetricWeight::spherical();
  const auto [axi, cen] = build_symmetry_pair(half);
  // axisymmetric Q_{a,1}: Dirichlet on the full upper arc, Neumann diameter
  for (const auto& c : axi.curves) {
    if (c.kind == Curve::Kind::Arc)
      CHECK(c.tag == D);
    else
      CHECK(c.tag == N);
  }
  // central Q_c: Dirichlet on the arc (0,pi/2) and the segment [-1,0]
  for (const auto& c : cen.curves) {
    const Vec2 m = c.at(0.5);
    if (c.kind == Curve::Kind::Arc) {
      if (m.x() > 0)
        CHECK(c.tag == D);
      else
        CHECK(c.tag == N);
    } else {
      if (m.x() > 0)
        CHECK(c.tag == N);
      else
        CHECK(c.tag == D);
    }
  }
  // both are balanced decompositions of the quarter-sphere boundary
  for (const auto& s : {axi, cen}) {
    const auto [ld, ln] = boundary_lengths(s);
    CHECK(ld == doctest::Approx(kPi).epsilon(1e-9));
    CHECK(ln == doctest::Approx(kPi).epsilon(1e-9));
  }
}

TEST_CASE("double cover spec") {
  const auto base = build_alternating_disk();
  const auto cover = build_double_cover(base);
  SUBCASE("boundary totals double to 4 pi, split evenly") {
    const auto [ld, ln] = boundary_lengths(cover);
    CHECK(ld == doctest::Approx(2 * kPi).epsilon(1e-12));
    CHECK(ln == doctest::Approx(2 * kPi).epsilon(1e-12));
    CHECK(ld + ln == doctest::Approx(4 * kPi).epsilon(1e-12));
  }
  SUBCASE("tag pattern is invariant under the three cover symmetries") {
    auto tag_at = [&](double phi) {
      const double theta = std::fmod(phi, 2 * kPi);
      const Vec2 p(std::cos(theta), std::sin(theta));
      for (const auto& c : cover.curves)
        if (c.distance(p) < 1e-9) return c.tag;
      throw std::runtime_error("no curve at angle");
    };
    for (int k = 0; k < 32; ++k) {
      const double phi = (k + 0.5) * kPi / 8;  // sample all of [0, 4 pi)
      const double T = std::fmod(phi + 2 * kPi, 4 * kPi);
      const double U = std::fmod(4 * kPi - phi, 4 * kPi);
      const double V = std::fmod(2 * kPi - phi + 4 * kPi, 4 * kPi);
      CHECK(tag_at(phi) == tag_at(T));
      CHECK(tag_at(phi) == tag_at(U));
      CHECK(tag_at(phi) == tag_at(V));
    }
  }
  SUBCASE("slit endpoints sit at the branch point and on the boundary") {
    REQUIRE(cover.slit.has_value());
    CHECK(cover.slit->start().norm() < 1e-12);
    CHECK(cover.slit->end().norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("misaligned base tags are rejected") {
    auto bad = build_disk(D);
    CHECK_THROWS(build_double_cover(bad));
  }
}

TEST_CASE("boundary_lengths examples") {
  const auto hd = build_half_disk(1, MetricWeight::flat());
  CHECK(boundary_lengths(hd).first == doctest::Approx(1 + kPi / 2));
  const auto [p1, p2] = build_disk_partition(kPi / 3, kPi / 2);
  CHECK(boundary_lengths(p1).first == doctest::Approx(kPi));
  CHECK(boundary_lengths(p1).second == doctest::Approx(kPi));
  const auto dd = build_disk(D);
  CHECK(boundary_lengths(dd).first == doctest::Approx(2 * kPi));
  CHECK(boundary_lengths(dd).second == doctest::Approx(0.0));
}

TEST_CASE("spec validation rejects broken loops") {
  DomainSpec s;
  s.curves = {Curve::segment(Vec2(0, 0), Vec2(1, 0), N),
              Curve::segment(Vec2(1, 0.5), Vec2(0, 0), N)};
  CHECK_THROWS(s.validate());
}
