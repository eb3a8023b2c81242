#pragma once

#include <Eigen/Core>

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zaremba {

using Vec2 = Eigen::Vector2d;

// Coordinate tolerance used throughout for vertex identification / loop closure.
inline constexpr double kGeomTol = 1e-12;

enum class BoundaryTag { Dirichlet, Neumann };

BoundaryTag swap_tag(BoundaryTag t);
const char* tag_name(BoundaryTag t);

// Conformal factor f(|z|) of a radial metric ds^2 = f(|z|) |dz|^2.
// The flat metric is f == 1; the round-sphere pullback is f(r) = 4/(1+r^2)^2.
struct MetricWeight {
  enum class Kind { Flat, Radial };
  Kind kind = Kind::Flat;
  std::string name = "flat";
  std::function<double(double)> f;  // set iff kind == Radial

  static MetricWeight flat();
  static MetricWeight spherical();
  static MetricWeight radial(std::string name, std::function<double(double)> f);

  bool is_flat() const { return kind == Kind::Flat; }
  double operator()(double r) const { return kind == Kind::Flat ? 1.0 : f(r); }
};

// One tagged boundary piece: a straight segment or a circular arc.
// Arcs store angle0 < angle1 (counterclockwise parametrization); `reversed`
// flips the traversal direction so curves can be chained into a loop.
struct Curve {
  enum class Kind { Segment, Arc };
  Kind kind = Kind::Segment;
  BoundaryTag tag = BoundaryTag::Neumann;

  Vec2 p0 = Vec2::Zero(), p1 = Vec2::Zero();  // segment endpoints

  Vec2 center = Vec2::Zero();  // arc data
  double radius = 0.0;
  double angle0 = 0.0, angle1 = 0.0;
  bool reversed = false;

  static Curve segment(const Vec2& a, const Vec2& b, BoundaryTag t);
  static Curve arc(const Vec2& c, double r, double a0, double a1, BoundaryTag t);

  Vec2 start() const;
  Vec2 end() const;
  // t in [0,1] along the traversal direction
  Vec2 at(double t) const;
  double length() const;
  double weighted_length(const MetricWeight& w) const;

  Curve with_tag(BoundaryTag t) const;
  Curve reversed_copy() const;
  Curve rotated(double theta) const;
  Curve mirrored_x() const;           // (x,y) -> (x,-y)
  Curve reflected(double axis_angle) const;  // about the line through 0 at `axis_angle`
  Curve translated(const Vec2& d) const;
  Curve point_reflected(const Vec2& o) const;  // z -> 2o - z

  // Distance from p to the curve; also reports the parameter of the nearest point.
  double distance(const Vec2& p, double* t_out = nullptr) const;
  // Project p onto the curve (used to snap refined midpoints back to arcs).
  Vec2 project(const Vec2& p) const;

  bool approx_equal(const Curve& other, double tol = 1e-9) const;
};

// A full mixed boundary-value problem description: a closed tagged boundary
// loop, a metric weight, and (for the branched double cover) sheet data.
struct DomainSpec {
  std::vector<Curve> curves;  // ordered closed loop (base-disk loop when sheets == 2)
  MetricWeight weight = MetricWeight::flat();
  int sheets = 1;
  std::optional<Curve> slit;          // cut segment gluing the two sheets
  std::vector<double> symmetry_axes;  // reflection axes (angles through the origin),
                                      // innermost first; meshing hint
  std::string family;                 // builder name, carried into outputs
  std::map<std::string, double> params;

  void validate() const;  // throws std::invalid_argument on violation
  double signed_area() const;
};

// Building block of the Theorem-2 domains: a sector of opening `alpha` whose
// outer boundary gamma runs from z1 (arg 0) to z2 (arg alpha); every piece of
// gamma is assigned to part 1 or part 2 of the boundary decomposition.
struct SectorialBlock {
  double alpha = 0.0;
  Vec2 z1 = Vec2::Zero(), z2 = Vec2::Zero();
  std::vector<Curve> gamma;     // chain from z1 to z2, tags ignored
  std::vector<int> piece_part;  // 1 or 2, per gamma piece

  void validate() const;
};

// ---- builders -------------------------------------------------------------

// Problems I / II on the unit half-disk; variant 2 swaps every tag.
DomainSpec build_half_disk(int variant, const MetricWeight& weight);

// Unit-disk boundary split into arcs of lengths (alpha, beta, pi-alpha, pi-beta)
// starting at angle 0, tagged (D, N, D, N); the second spec has tags swapped.
std::pair<DomainSpec, DomainSpec> build_disk_partition(double alpha, double beta);

// Whether the (alpha, beta) partition's Dirichlet and Neumann sets are
// exchanged by some isometry of the disk (exhaustive dihedral-candidate search).
bool disk_partition_swap_is_trivial(double alpha, double beta, double tol = 1e-9);

DomainSpec build_sectorial_domain(const SectorialBlock& block, bool swapped);

// Input to build_symmetry_pair: tagged curves of the half-domain boundary
// minus the axis interval, chained from one axis point to the other.
struct HalfInput {
  std::vector<Curve> chain;
  Vec2 axis_point = Vec2::Zero();
  Vec2 axis_dir = Vec2(0.0, 1.0);
  MetricWeight weight = MetricWeight::flat();
};

// (axisymmetric, centrally symmetric) domains of the Davies-Parnovski
// comparison. For the spherical weight the central reflection is the sphere
// isometry of the quarter-sphere family, otherwise the planar point reflection.
std::pair<DomainSpec, DomainSpec> build_symmetry_pair(const HalfInput& half);

// The unit disk with alternating D/N quarter arcs split at angles pi/4 + k pi/2;
// base problem of the branched double cover.
DomainSpec build_alternating_disk();

DomainSpec build_double_cover(const DomainSpec& base);

// Totals of weighted arclength per tag.
std::pair<double, double> boundary_lengths(const DomainSpec& spec);

// Convenience: axis-aligned rectangle with one tag per side
// (bottom, right, top, left), counterclockwise from (x0,y0).
DomainSpec build_rectangle(double x0, double y0, double x1, double y1,
                           BoundaryTag bottom, BoundaryTag right,
                           BoundaryTag top, BoundaryTag left);

// Full disk with a single all-Dirichlet or all-Neumann boundary circle.
DomainSpec build_disk(BoundaryTag tag);

// Adaptive Simpson quadrature of g over [a,b], absolute tolerance `tol`.
double integrate_adaptive(const std::function<double(double)>& g, double a, double b,
                          double tol = 1e-10);

}  // namespace zaremba
