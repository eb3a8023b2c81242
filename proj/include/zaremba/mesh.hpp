#pragma once

#include "zaremba/geometry.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace zaremba {

struct BoundaryEdge {
  int a = -1, b = -1;
  BoundaryTag tag = BoundaryTag::Neumann;
  int curve = -1;  // index into spec.curves; -1 marks an interface edge of a
                   // fundamental block, consumed by mesh_by_reflection
};

struct SymmetryPerm {
  std::string name;
  std::vector<int> map;  // involutive vertex permutation
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<int> sheet_of_vertex;  // per vertex, only for sheets=2 meshes
  std::vector<SymmetryPerm> symmetry_perms;
  std::vector<double> reflection_axes;  // construction record (angles through origin)
  DomainSpec spec;

  int num_vertices() const { return (int)vertices.size(); }
  int num_triangles() const { return (int)triangles.size(); }
  double min_angle_deg() const;
  double triangle_area(int t) const;
  bool is_cover() const { return !sheet_of_vertex.empty(); }

  const SymmetryPerm* find_perm(const std::string& name) const;

  // Throws std::runtime_error on any violated invariant: positive areas,
  // manifold edges, tagged boundary coverage, Euler relation, valid perms.
  void validate(bool allow_interface_edges = false) const;
};

// Snap-tolerant point -> vertex index lookup.
class VertexLookup {
 public:
  explicit VertexLookup(double cell = 1e-7);
  void insert(const Vec2& p, int index);
  int find(const Vec2& p, double tol = 1e-9) const;
  void build(const std::vector<Vec2>& pts);

 private:
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<int>> grid_;
  std::vector<Vec2> pts_;
};

// Triangulate the wedge [wedge_lo, wedge_hi] of a domain that is star-shaped
// about the origin within that wedge. Arc vertices land exactly on their arcs.
Mesh mesh_fundamental(const DomainSpec& spec, double wedge_lo, double wedge_hi, double h);

// Union of the mesh with its reflections about the given axes (applied in
// order). Populates symmetry_perms with every reflection that survives as a
// symmetry of the final mesh.
Mesh mesh_by_reflection(const Mesh& fundamental, const std::vector<double>& axes);

// Wedge + reflections driven by spec.symmetry_axes.
Mesh mesh_symmetric(const DomainSpec& spec, double h, double wedge_lo = 0.0);

// Seeded deterministic Delaunay mesh with Lloyd smoothing; no symmetry perms.
Mesh mesh_unstructured(const DomainSpec& spec, double h, std::uint64_t seed);

// Each triangle split in four; boundary midpoints snapped back to their curve.
// When given, `midpoint_parents` receives the coarse endpoint pair of every
// new vertex, in index order (new vertex n_coarse + i has parents[i]).
Mesh refine_uniform(const Mesh& m,
                    std::vector<std::array<int, 2>>* midpoint_parents = nullptr);

// Crisscross mesh of an axis-aligned rectangle spec (4 triangles per cell).
Mesh mesh_structured_rectangle(const DomainSpec& spec, int nx, int ny);

// Branched double cover of the alternating disk: base disk meshed symmetric,
// two sheets cut along the positive-x radius and cross-glued; populates the
// sheet_swap / cover_U / cover_V permutations.
Mesh build_cover_mesh(const DomainSpec& cover_spec, double h);

// Build the vertex permutation induced by an isometry, if the mesh is closed
// under it.
std::optional<SymmetryPerm> try_build_perm(const Mesh& m, const std::string& name,
                                           const std::function<Vec2(const Vec2&)>& map,
                                           double tol = 1e-9);

// Replace the mesh's spec and re-derive every boundary tag by probing the new
// spec's curves; the boundary geometries must coincide.
void retag_mesh(Mesh& m, const DomainSpec& spec);

}  // namespace zaremba
