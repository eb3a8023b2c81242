#include "zaremba/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace zaremba {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double unit_double(std::uint64_t v) { return (v >> 11) * (1.0 / 9007199254740992.0); }

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double detl = (b.x() - a.x()) * (c.y() - a.y());
  const double detr = (b.y() - a.y()) * (c.x() - a.x());
  const double det = detl - detr;
  const double mag = std::abs(detl) + std::abs(detr);
  if (std::abs(det) > 1e-14 * mag) return det;
  const long double dl = ((long double)b.x() - a.x()) * ((long double)c.y() - a.y());
  const long double dr = ((long double)b.y() - a.y()) * ((long double)c.x() - a.x());
  return (double)(dl - dr);
}

// > 0 when p lies strictly inside the circumcircle of (a, b, c) (CCW)
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
  const double ax = a.x() - p.x(), ay = a.y() - p.y();
  const double bx = b.x() - p.x(), by = b.y() - p.y();
  const double cx = c.x() - p.x(), cy = c.y() - p.y();
  const double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
  const double det = a2 * (bx * cy - by * cx) - b2 * (ax * cy - ay * cx) +
                     c2 * (ax * by - ay * bx);
  const double mag = std::abs(a2 * (bx * cy - by * cx)) + std::abs(b2 * (ax * cy - ay * cx)) +
                     std::abs(c2 * (ax * by - ay * bx));
  if (std::abs(det) > 1e-12 * mag) return det;
  const long double lax = ax, lay = ay, lbx = bx, lby = by, lcx = cx, lcy = cy;
  const long double la2 = lax * lax + lay * lay, lb2 = lbx * lbx + lby * lby,
                    lc2 = lcx * lcx + lcy * lcy;
  const long double ldet = la2 * (lbx * lcy - lby * lcx) - lb2 * (lax * lcy - lay * lcx) +
                           lc2 * (lax * lby - lay * lbx);
  return (double)ldet;
}

}  // namespace

// ---- VertexLookup -------------------------------------------------------------

VertexLookup::VertexLookup(double cell) : cell_(cell) {}

static std::uint64_t grid_key(long long ix, long long iy) {
  return (std::uint64_t)(ix * 73856093LL) ^ (std::uint64_t)(iy * 19349663LL);
}

void VertexLookup::insert(const Vec2& p, int index) {
  if ((int)pts_.size() <= index) pts_.resize(index + 1, Vec2(1e300, 1e300));
  pts_[index] = p;
  const long long ix = (long long)std::floor(p.x() / cell_);
  const long long iy = (long long)std::floor(p.y() / cell_);
  grid_[grid_key(ix, iy)].push_back(index);
}

void VertexLookup::build(const std::vector<Vec2>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) insert(pts[i], (int)i);
}

int VertexLookup::find(const Vec2& p, double tol) const {
  const long long ix = (long long)std::floor(p.x() / cell_);
  const long long iy = (long long)std::floor(p.y() / cell_);
  int best = -1;
  double best_d = tol;
  for (long long dx = -1; dx <= 1; ++dx)
    for (long long dy = -1; dy <= 1; ++dy) {
      auto it = grid_.find(grid_key(ix + dx, iy + dy));
      if (it == grid_.end()) continue;
      for (int idx : it->second) {
        const double d = (pts_[idx] - p).norm();
        if (d <= best_d) {
          best_d = d;
          best = idx;
        }
      }
    }
  return best;
}

// ---- Mesh basics ----------------------------------------------------------------

double Mesh::triangle_area(int t) const {
  const auto& tr = triangles[t];
  const Vec2 &a = vertices[tr[0]], &b = vertices[tr[1]], &c = vertices[tr[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double Mesh::min_angle_deg() const {
  double worst = 180.0;
  for (const auto& tr : triangles) {
    for (int i = 0; i < 3; ++i) {
      const Vec2& a = vertices[tr[i]];
      const Vec2& b = vertices[tr[(i + 1) % 3]];
      const Vec2& c = vertices[tr[(i + 2) % 3]];
      const Vec2 u = b - a, v = c - a;
      const double ang = std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
      worst = std::min(worst, ang * 180.0 / kPi);
    }
  }
  return worst;
}

const SymmetryPerm* Mesh::find_perm(const std::string& name) const {
  for (const auto& p : symmetry_perms)
    if (p.name == name) return &p;
  return nullptr;
}

void Mesh::validate(bool allow_interface_edges) const {
  const int nv = num_vertices();
  if (is_cover() && (int)sheet_of_vertex.size() != nv)
    throw std::runtime_error("Mesh: sheet table size mismatch");
  double scale = 0.0;
  for (const auto& v : vertices) scale = std::max(scale, v.norm());
  scale = std::max(scale, 1.0);

  std::map<std::pair<int, int>, int> edge_count;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tr = triangles[t];
    for (int k = 0; k < 3; ++k)
      if (tr[k] < 0 || tr[k] >= nv) throw std::runtime_error("Mesh: triangle index range");
    if (triangle_area(t) <= 0.0) throw std::runtime_error("Mesh: non-positive triangle area");
    for (int k = 0; k < 3; ++k) {
      const int a = tr[k], b = tr[(k + 1) % 3];
      edge_count[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  std::set<std::pair<int, int>> boundary_set;
  for (const auto& e : edge_count) {
    if (e.second > 2) throw std::runtime_error("Mesh: edge shared by more than two triangles");
    if (e.second == 1) boundary_set.insert(e.first);
  }
  std::set<std::pair<int, int>> tagged_set;
  for (const auto& be : boundary_edges) {
    if (!allow_interface_edges && be.curve < 0)
      throw std::runtime_error("Mesh: untagged interface edge in final mesh");
    tagged_set.insert({std::min(be.a, be.b), std::max(be.a, be.b)});
  }
  if (tagged_set != boundary_set)
    throw std::runtime_error("Mesh: boundary edge table does not match triangulation boundary");

  // Euler relation V - E + F = 1 (simply connected, covers included)
  const long long V = nv, E = (long long)edge_count.size(), F = num_triangles();
  if (V - E + F != 1) throw std::runtime_error("Mesh: Euler relation violated");

  for (const auto& perm : symmetry_perms) {
    if ((int)perm.map.size() != nv) throw std::runtime_error("Mesh: perm size mismatch");
    std::set<std::array<int, 3>> tris;
    for (const auto& tr : triangles) {
      std::array<int, 3> s = {tr[0], tr[1], tr[2]};
      std::sort(s.begin(), s.end());
      tris.insert(s);
    }
    for (int i = 0; i < nv; ++i) {
      const int j = perm.map[i];
      if (j < 0 || j >= nv || perm.map[j] != i)
        throw std::runtime_error("Mesh: perm is not an involution: " + perm.name);
    }
    for (const auto& tr : triangles) {
      std::array<int, 3> s = {perm.map[tr[0]], perm.map[tr[1]], perm.map[tr[2]]};
      std::sort(s.begin(), s.end());
      if (!tris.count(s))
        throw std::runtime_error("Mesh: perm does not map triangles to triangles: " + perm.name);
      for (int k = 0; k < 3; ++k) {
        const int a = tr[k], b = tr[(k + 1) % 3];
        const double l0 = (vertices[a] - vertices[b]).norm();
        const double l1 = (vertices[perm.map[a]] - vertices[perm.map[b]]).norm();
        if (std::abs(l0 - l1) > 1e-12 * scale)
          throw std::runtime_error("Mesh: perm does not preserve edge lengths: " + perm.name);
      }
    }
  }
}

// ---- fundamental wedge meshing ---------------------------------------------------

namespace {

// radius of the outer boundary of `spec` along direction theta
double outer_radius(const DomainSpec& spec, double theta) {
  const Vec2 dir(std::cos(theta), std::sin(theta));
  double best = -1.0;
  for (const auto& c : spec.curves) {
    if (c.kind == Curve::Kind::Segment) {
      // solve o + t*dir = p0 + s*(p1-p0)
      const Vec2 d = c.p1 - c.p0;
      const double det = dir.x() * (-d.y()) - dir.y() * (-d.x());
      if (std::abs(det) < 1e-15) continue;
      const double t = (c.p0.x() * (-d.y()) - c.p0.y() * (-d.x())) / det;
      const double s = (dir.x() * c.p0.y() - dir.y() * c.p0.x()) / det;
      if (t > kGeomTol && s >= -1e-12 && s <= 1 + 1e-12) best = std::max(best, t);
    } else {
      if (c.center.norm() < 1e-14) {
        // arc about the origin: hit iff theta within the angular range
        const double span = c.angle1 - c.angle0;
        double rel = std::fmod(theta - c.angle0, 2 * kPi);
        if (rel < 0) rel += 2 * kPi;
        if (rel <= span + 1e-12) best = std::max(best, c.radius);
      } else {
        // general circle-ray intersection
        const Vec2 oc = -c.center;
        const double b = 2.0 * oc.dot(dir);
        const double cc = oc.squaredNorm() - c.radius * c.radius;
        const double disc = b * b - 4 * cc;
        if (disc < 0) continue;
        for (double t : {(-b - std::sqrt(disc)) / 2, (-b + std::sqrt(disc)) / 2}) {
          if (t <= kGeomTol) continue;
          const Vec2 p = t * dir;
          if (c.distance(p) < 1e-9) best = std::max(best, t);
        }
      }
    }
  }
  if (best <= 0)
    throw std::runtime_error("mesh_fundamental: no outer boundary along a wedge ray");
  return best;
}

bool point_on_ray(const Vec2& p, double theta, double tol) {
  const Vec2 dir(std::cos(theta), std::sin(theta));
  const double along = p.dot(dir);
  return along > -tol && std::abs(p.x() * dir.y() - p.y() * dir.x()) <= tol;
}

// locate the spec curve containing a boundary point (by proximity)
int locate_curve(const DomainSpec& spec, const Vec2& p, double tol = 1e-9) {
  int best = -1;
  double best_d = tol;
  for (std::size_t i = 0; i < spec.curves.size(); ++i) {
    const double d = spec.curves[i].distance(p);
    if (d < best_d) {
      best_d = d;
      best = (int)i;
    }
  }
  return best;
}

void tag_boundary_edges(Mesh& m, bool allow_interface) {
  for (auto& be : m.boundary_edges) {
    const Vec2 mid = 0.5 * (m.vertices[be.a] + m.vertices[be.b]);
    // probe on the true boundary: project the chord midpoint to the nearest curve
    int ci = -1;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < m.spec.curves.size(); ++i) {
      const double d = m.spec.curves[i].distance(mid);
      if (d < best_d) {
        best_d = d;
        ci = (int)i;
      }
    }
    const double chord = (m.vertices[be.a] - m.vertices[be.b]).norm();
    if (ci >= 0 && best_d <= std::max(1e-9, 0.3 * chord)) {
      be.curve = ci;
      be.tag = m.spec.curves[ci].tag;
    } else if (!allow_interface) {
      throw std::runtime_error("mesh: boundary edge not on any spec curve");
    } else {
      be.curve = -1;
    }
  }
}

}  // namespace

Mesh mesh_fundamental(const DomainSpec& spec, double wedge_lo, double wedge_hi, double h) {
  if (!(h > 0)) throw std::invalid_argument("mesh_fundamental: h must be positive");
  if (!(wedge_hi > wedge_lo + 1e-12))
    throw std::invalid_argument("mesh_fundamental: degenerate wedge");
  spec.validate();

  const double target = h / 1.5;  // keeps every edge (including diagonals) below h

  // angular breakpoints: curve endpoints strictly inside the wedge
  std::vector<double> breaks = {wedge_lo, wedge_hi};
  for (const auto& c : spec.curves) {
    for (const Vec2& p : {c.start(), c.end()}) {
      if (p.norm() < kGeomTol) continue;
      const double a = std::atan2(p.y(), p.x());
      for (double cand : {a, a + 2 * kPi, a - 2 * kPi}) {
        if (cand > wedge_lo + 1e-12 && cand < wedge_hi - 1e-12) breaks.push_back(cand);
      }
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               breaks.end());

  // outer ring angle list: every breakpoint, spans subdivided to `target`
  std::vector<double> outer_angles;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a0 = breaks[i], a1 = breaks[i + 1];
    const double rmid = outer_radius(spec, 0.5 * (a0 + a1));
    const int n = std::max(1, (int)std::ceil((a1 - a0) * rmid / target));
    for (int j = 0; j < n; ++j) outer_angles.push_back(a0 + (a1 - a0) * j / n);
  }
  outer_angles.push_back(wedge_hi);

  double rho_max = 0.0;
  for (double a : outer_angles) rho_max = std::max(rho_max, outer_radius(spec, a));
  const int nr = std::max(1, (int)std::ceil(rho_max / target));
  const int n_outer = (int)outer_angles.size() - 1;

  // rings of vertices; ring 0 is the origin
  Mesh m;
  m.spec = spec;
  m.vertices.push_back(Vec2(0, 0));
  std::vector<std::vector<int>> ring_idx(nr + 1);
  std::vector<std::vector<double>> ring_ang(nr + 1);
  ring_idx[0] = {0};
  ring_ang[0] = {wedge_lo};
  for (int i = 1; i <= nr; ++i) {
    std::vector<double> angles;
    if (i == nr) {
      angles = outer_angles;
    } else {
      const int ni = std::max(1, (int)std::lround((double)n_outer * i / nr));
      for (int j = 0; j <= ni; ++j)
        angles.push_back(wedge_lo + (wedge_hi - wedge_lo) * j / ni);
    }
    for (double a : angles) {
      const double rho = outer_radius(spec, a);
      const double r = rho * i / nr;
      m.vertices.push_back(r * Vec2(std::cos(a), std::sin(a)));
      ring_idx[i].push_back((int)m.vertices.size() - 1);
    }
    ring_ang[i] = angles;
  }

  // stitch consecutive rings with a sorted-merge walk
  for (int i = 0; i < nr; ++i) {
    const auto& A = ring_idx[i];
    const auto& B = ring_idx[i + 1];
    const auto& Aa = ring_ang[i];
    const auto& Ba = ring_ang[i + 1];
    std::size_t ia = 0, ib = 0;
    while (ia + 1 < A.size() || ib + 1 < B.size()) {
      const bool can_a = ia + 1 < A.size();
      const bool can_b = ib + 1 < B.size();
      bool advance_b;
      if (!can_a)
        advance_b = true;
      else if (!can_b)
        advance_b = false;
      else
        advance_b = Ba[ib + 1] <= Aa[ia + 1];
      if (advance_b) {
        m.triangles.push_back({A[ia], B[ib], B[ib + 1]});
        ++ib;
      } else {
        m.triangles.push_back({A[ia], B[ib], A[ia + 1]});
        // fix orientation: (A_ia, B_ib, A_ia+1) is clockwise; swap
        auto& t = m.triangles.back();
        std::swap(t[1], t[2]);
        ++ia;
      }
    }
  }
  // orientation pass
  for (auto& t : m.triangles) {
    const double s = orient2d(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    if (s < 0) std::swap(t[1], t[2]);
    if (s == 0) throw std::runtime_error("mesh_fundamental: degenerate triangle");
  }

  // boundary edges: outer ring chords + wedge ray edges
  const auto& outer = ring_idx[nr];
  for (std::size_t j = 0; j + 1 < outer.size(); ++j)
    m.boundary_edges.push_back({outer[j], outer[j + 1], BoundaryTag::Neumann, -1});
  for (double ray : {wedge_lo, wedge_hi}) {
    std::vector<int> chain = {0};
    for (int i = 1; i <= nr; ++i)
      chain.push_back(ray == wedge_lo ? ring_idx[i].front() : ring_idx[i].back());
    for (std::size_t k = 0; k + 1 < chain.size(); ++k)
      m.boundary_edges.push_back({chain[k], chain[k + 1], BoundaryTag::Neumann, -1});
  }
  tag_boundary_edges(m, /*allow_interface=*/true);
  m.validate(/*allow_interface_edges=*/true);
  return m;
}

// ---- reflections ------------------------------------------------------------------

namespace {

Vec2 reflect_about_axis(const Vec2& p, double theta) {
  double c = std::cos(2 * theta), s = std::sin(2 * theta);
  // exact values at the multiples of pi/2 keep reflection-built meshes bit-symmetric
  if (std::abs(c) < 1e-15) c = 0;
  if (std::abs(s) < 1e-15) s = 0;
  if (std::abs(std::abs(c) - 1) < 1e-15) c = c > 0 ? 1 : -1;
  if (std::abs(std::abs(s) - 1) < 1e-15) s = s > 0 ? 1 : -1;
  return Vec2(c * p.x() + s * p.y(), s * p.x() - c * p.y());
}

}  // namespace

std::optional<SymmetryPerm> try_build_perm(const Mesh& m, const std::string& name,
                                           const std::function<Vec2(const Vec2&)>& map,
                                           double tol) {
  VertexLookup lut;
  lut.build(m.vertices);
  SymmetryPerm perm;
  perm.name = name;
  perm.map.resize(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) {
    const int j = lut.find(map(m.vertices[i]), tol);
    if (j < 0) return std::nullopt;
    perm.map[i] = j;
  }
  for (int i = 0; i < m.num_vertices(); ++i)
    if (perm.map[perm.map[i]] != i) return std::nullopt;
  return perm;
}

Mesh mesh_by_reflection(const Mesh& fundamental, const std::vector<double>& axes) {
  Mesh cur = fundamental;
  for (double axis : axes) {
    double scale = 1.0;
    for (const auto& v : cur.vertices) scale = std::max(scale, v.norm());
    const double tol = 1e-12 * scale;
    // precondition: axis vertices exactly on the axis
    for (const auto& v : cur.vertices) {
      const double dline = std::abs(-std::sin(axis) * v.x() + std::cos(axis) * v.y());
      if (dline > 0 && dline <= tol && (reflect_about_axis(v, axis) - v).norm() > tol)
        throw std::runtime_error("mesh_by_reflection: vertex near but not on axis");
    }

    Mesh next;
    next.spec = cur.spec;
    next.vertices = cur.vertices;
    std::vector<int> image(cur.num_vertices());
    for (int i = 0; i < cur.num_vertices(); ++i) {
      const Vec2 r = reflect_about_axis(cur.vertices[i], axis);
      if ((r - cur.vertices[i]).norm() <= tol) {
        image[i] = i;
      } else {
        next.vertices.push_back(r);
        image[i] = (int)next.vertices.size() - 1;
      }
    }
    next.triangles = cur.triangles;
    for (const auto& t : cur.triangles)
      next.triangles.push_back({image[t[0]], image[t[2]], image[t[1]]});

    // overlap guard: total area must double (minus nothing; axis has measure zero)
    double area_old = 0, area_new = 0;
    for (int t = 0; t < (int)cur.triangles.size(); ++t) area_old += cur.triangle_area(t);
    for (int t = 0; t < (int)next.triangles.size(); ++t) area_new += next.triangle_area(t);
    if (std::abs(area_new - 2 * area_old) > 1e-9 * std::max(1.0, area_old))
      throw std::runtime_error("mesh_by_reflection: reflected copy overlaps original");

    // boundary edges: drop those on the axis, mirror the rest
    for (const auto& be : cur.boundary_edges) {
      const bool edge_on_axis =
          (reflect_about_axis(cur.vertices[be.a], axis) - cur.vertices[be.a]).norm() <= tol &&
          (reflect_about_axis(cur.vertices[be.b], axis) - cur.vertices[be.b]).norm() <= tol;
      if (edge_on_axis) continue;
      next.boundary_edges.push_back(be);
      next.boundary_edges.push_back({image[be.a], image[be.b], be.tag, be.curve});
    }
    next.reflection_axes = cur.reflection_axes;
    next.reflection_axes.push_back(axis);
    cur = std::move(next);
  }
  tag_boundary_edges(cur, /*allow_interface=*/true);

  // keep every recorded axis that is a symmetry of the final mesh
  cur.symmetry_perms.clear();
  for (double axis : cur.reflection_axes) {
    auto perm = try_build_perm(
        cur, "reflect_" + std::to_string(axis),
        [axis](const Vec2& p) { return reflect_about_axis(p, axis); }, 1e-9);
    if (perm) cur.symmetry_perms.push_back(std::move(*perm));
  }
  cur.validate(/*allow_interface_edges=*/true);
  return cur;
}

void retag_mesh(Mesh& m, const DomainSpec& spec) {
  spec.validate();
  m.spec = spec;
  tag_boundary_edges(m, /*allow_interface=*/false);
}

Mesh mesh_symmetric(const DomainSpec& spec, double h, double wedge_lo) {
  if (spec.symmetry_axes.empty())
    throw std::invalid_argument("mesh_symmetric: spec has no symmetry axes");
  Mesh fund = mesh_fundamental(spec, wedge_lo, spec.symmetry_axes.front(), h);
  Mesh m = mesh_by_reflection(fund, spec.symmetry_axes);
  tag_boundary_edges(m, /*allow_interface=*/false);
  m.validate();
  return m;
}

// ---- Bowyer-Watson Delaunay --------------------------------------------------------

namespace {

struct DelaunayMesh {
  std::vector<Vec2> pts;
  struct Tri {
    int v[3];
    int nb[3];  // neighbor opposite v[k]; -1 outside
    bool alive = true;
  };
  std::vector<Tri> tris;
  int last_alive = 0;

  int locate(const Vec2& p) const {
    // walk from last_alive
    int t = last_alive;
    if (t < 0 || t >= (int)tris.size() || !tris[t].alive) {
      t = -1;
      for (int i = (int)tris.size() - 1; i >= 0; --i)
        if (tris[i].alive) {
          t = i;
          break;
        }
    }
    int guard = 0;
    const int cap = (int)tris.size() * 4 + 64;
    while (guard++ < cap) {
      const Tri& tr = tris[t];
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const Vec2& a = pts[tr.v[(k + 1) % 3]];
        const Vec2& b = pts[tr.v[(k + 2) % 3]];
        if (orient2d(a, b, p) < 0) {
          const int nxt = tr.nb[k];
          if (nxt >= 0) {
            t = nxt;
            moved = true;
            break;
          }
        }
      }
      if (!moved) return t;
    }
    // fallback: brute force
    for (int i = 0; i < (int)tris.size(); ++i) {
      if (!tris[i].alive) continue;
      const Tri& tr = tris[i];
      bool inside = true;
      for (int k = 0; k < 3 && inside; ++k)
        inside = orient2d(pts[tr.v[(k + 1) % 3]], pts[tr.v[(k + 2) % 3]], p) >= 0;
      if (inside) return i;
    }
    throw std::runtime_error("delaunay: point location failed");
  }

  void insert(int pi) {
    const Vec2& p = pts[pi];
    const int t0 = locate(p);
    // grow cavity
    std::vector<int> cavity;
    std::vector<char> in_cavity(tris.size(), 0);
    std::vector<int> stack = {t0};
    in_cavity[t0] = 1;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      cavity.push_back(t);
      for (int k = 0; k < 3; ++k) {
        const int nb = tris[t].nb[k];
        if (nb < 0 || in_cavity[nb]) continue;
        const auto& tr = tris[nb];
        if (incircle(pts[tr.v[0]], pts[tr.v[1]], pts[tr.v[2]], p) > 0) {
          in_cavity[nb] = 1;
          stack.push_back(nb);
        }
      }
    }
    // collect boundary edges of the cavity (directed CCW as seen from inside)
    struct CavEdge {
      int a, b, outside;
    };
    std::vector<CavEdge> edges;
    for (int t : cavity) {
      for (int k = 0; k < 3; ++k) {
        const int nb = tris[t].nb[k];
        if (nb >= 0 && in_cavity[nb]) continue;
        edges.push_back({tris[t].v[(k + 1) % 3], tris[t].v[(k + 2) % 3], nb});
      }
    }
    for (int t : cavity) tris[t].alive = false;
    // fan of new triangles
    std::vector<int> new_tris;
    std::unordered_map<long long, std::pair<int, int>> half;  // directed edge -> (tri, slot)
    for (const auto& e : edges) {
      Tri nt;
      nt.v[0] = pi;
      nt.v[1] = e.a;
      nt.v[2] = e.b;
      nt.nb[0] = e.outside;
      nt.nb[1] = -2;
      nt.nb[2] = -2;
      tris.push_back(nt);
      const int ti = (int)tris.size() - 1;
      new_tris.push_back(ti);
      if (e.outside >= 0) {
        // fix the outside triangle's neighbor pointer
        Tri& ot = tris[e.outside];
        for (int k = 0; k < 3; ++k) {
          const int oa = ot.v[(k + 1) % 3], ob = ot.v[(k + 2) % 3];
          if ((oa == e.b && ob == e.a)) ot.nb[k] = ti;
        }
      }
    }
    // stitch the fan: edge (pi, e.a) of one new triangle pairs with edge (e.b', pi)
    std::unordered_map<int, int> out_by_a, in_by_b;
    for (int ti : new_tris) {
      out_by_a[tris[ti].v[1]] = ti;  // edge pi->a belongs to tri with v1 == a
      in_by_b[tris[ti].v[2]] = ti;
    }
    for (int ti : new_tris) {
      Tri& t = tris[ti];
      // neighbor opposite v[2] shares edge (pi, a): the new tri whose v2 == a
      auto it = in_by_b.find(t.v[1]);
      t.nb[2] = it != in_by_b.end() ? it->second : -1;
      auto it2 = out_by_a.find(t.v[2]);
      t.nb[1] = it2 != out_by_a.end() ? it2->second : -1;
    }
    if (!new_tris.empty()) last_alive = new_tris.back();
  }
};

// polyline point-in-polygon (crossing number)
bool inside_polyline(const std::vector<Vec2>& poly, const Vec2& p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 &a = poly[i], &b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

double dist_to_polyline(const std::vector<Vec2>& poly, const Vec2& p) {
  double best = std::numeric_limits<double>::max();
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 d = poly[i] - poly[j];
    double t = d.squaredNorm() > 0 ? (p - poly[j]).dot(d) / d.squaredNorm() : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, (p - (poly[j] + t * d)).norm());
  }
  return best;
}

std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& points,
                                                     const std::vector<Vec2>& hull_poly) {
  // bounding super-triangle
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 c = 0.5 * (lo + hi);
  const double R = std::max(1.0, (hi - lo).norm()) * 8.0;
  DelaunayMesh dm;
  dm.pts = points;
  const int s0 = (int)dm.pts.size(), s1 = s0 + 1, s2 = s0 + 2;
  dm.pts.push_back(c + R * Vec2(0, 2));
  dm.pts.push_back(c + R * Vec2(-1.8, -1));
  dm.pts.push_back(c + R * Vec2(1.8, -1));
  DelaunayMesh::Tri root;
  root.v[0] = s0;
  root.v[1] = s1;
  root.v[2] = s2;
  root.nb[0] = root.nb[1] = root.nb[2] = -1;
  dm.tris.push_back(root);
  for (int i = 0; i < (int)points.size(); ++i) dm.insert(i);

  std::vector<std::array<int, 3>> out;
  for (const auto& t : dm.tris) {
    if (!t.alive) continue;
    if (t.v[0] >= s0 || t.v[1] >= s0 || t.v[2] >= s0) continue;
    const Vec2 centroid =
        (dm.pts[t.v[0]] + dm.pts[t.v[1]] + dm.pts[t.v[2]]) / 3.0;
    if (!inside_polyline(hull_poly, centroid)) continue;
    out.push_back({t.v[0], t.v[1], t.v[2]});
  }
  return out;
}

}  // namespace

Mesh mesh_unstructured(const DomainSpec& spec, double h, std::uint64_t seed) {
  if (!(h > 0)) throw std::invalid_argument("mesh_unstructured: h must be positive");
  spec.validate();
  if (spec.sheets != 1)
    throw std::invalid_argument("mesh_unstructured: covers need build_cover_mesh");

  // boundary nodes, curve by curve, endpoints shared
  std::vector<Vec2> bpts;
  std::vector<std::pair<int, int>> bedges;  // consecutive node pairs
  std::vector<int> bedge_curve;
  VertexLookup lut;
  int nb = 0;
  for (std::size_t ci = 0; ci < spec.curves.size(); ++ci) {
    const auto& c = spec.curves[ci];
    const double spacing = c.kind == Curve::Kind::Arc ? 0.72 * h : 0.95 * h;
    const int n = std::max(1, (int)std::ceil(c.length() / spacing));
    int prev = -1;
    for (int k = 0; k <= n; ++k) {
      const Vec2 p = c.at((double)k / n);
      int idx = lut.find(p, 1e-11);
      if (idx < 0) {
        idx = nb++;
        bpts.push_back(p);
        lut.insert(p, idx);
      }
      if (k > 0) {
        bedges.push_back({prev, idx});
        bedge_curve.push_back((int)ci);
      }
      prev = idx;
    }
  }
  std::vector<Vec2> hull = bpts;  // ordered chain; valid as polygon (loop order)

  // interior seeds: hexagonal lattice, clipped with clearance, tiny seeded jitter
  std::uint64_t rng = seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& p : bpts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double ox = unit_double(splitmix64(rng)) * h;
  const double oy = unit_double(splitmix64(rng)) * h;
  std::vector<Vec2> pts = bpts;
  const double row_h = h * std::sqrt(3.0) / 2.0;
  int row = 0;
  for (double y = lo.y() - h + oy; y <= hi.y() + h; y += row_h, ++row) {
    const double shift = (row % 2) ? 0.5 * h : 0.0;
    for (double x = lo.x() - h + ox + shift; x <= hi.x() + h; x += h) {
      Vec2 p(x, y);
      p.x() += (unit_double(splitmix64(rng)) - 0.5) * 1e-6 * h;
      p.y() += (unit_double(splitmix64(rng)) - 0.5) * 1e-6 * h;
      if (!inside_polyline(hull, p)) continue;
      if (dist_to_polyline(hull, p) < 0.68 * h) continue;
      pts.push_back(p);
    }
  }

  // Delaunay + Lloyd smoothing of interior points
  std::vector<std::array<int, 3>> tris;
  for (int pass = 0; pass < 4; ++pass) {
    tris = delaunay_triangulate(pts, hull);
    if (pass == 3) break;
    std::vector<Vec2> acc(pts.size(), Vec2::Zero());
    std::vector<int> cnt(pts.size(), 0);
    for (const auto& t : tris)
      for (int k = 0; k < 3; ++k) {
        acc[t[k]] += pts[t[(k + 1) % 3]] + pts[t[(k + 2) % 3]];
        cnt[t[k]] += 2;
      }
    for (std::size_t i = nb; i < pts.size(); ++i) {
      if (cnt[i] == 0) continue;
      const Vec2 target = acc[i] / cnt[i];
      if (inside_polyline(hull, target) && dist_to_polyline(hull, target) > 0.55 * h)
        pts[i] = target;
    }
  }

  Mesh m;
  m.spec = spec;
  m.vertices = pts;
  m.triangles = tris;
  for (auto& t : m.triangles) {
    if (orient2d(pts[t[0]], pts[t[1]], pts[t[2]]) < 0) std::swap(t[1], t[2]);
  }
  for (std::size_t e = 0; e < bedges.size(); ++e) {
    m.boundary_edges.push_back({bedges[e].first, bedges[e].second,
                                spec.curves[bedge_curve[e]].tag, bedge_curve[e]});
  }
  // drop isolated vertices (clearance filtering can orphan none, but be safe)
  std::vector<char> used(m.vertices.size(), 0);
  for (const auto& t : m.triangles) used[t[0]] = used[t[1]] = used[t[2]] = 1;
  for (std::size_t i = 0; i < used.size(); ++i)
    if (!used[i]) {
      // remap: build compact index map
      std::vector<int> remap(m.vertices.size(), -1);
      std::vector<Vec2> nv;
      for (std::size_t k = 0; k < m.vertices.size(); ++k)
        if (used[k]) {
          remap[k] = (int)nv.size();
          nv.push_back(m.vertices[k]);
        }
      for (auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) t[k] = remap[t[k]];
      for (auto& be : m.boundary_edges) {
        be.a = remap[be.a];
        be.b = remap[be.b];
        if (be.a < 0 || be.b < 0)
          throw std::runtime_error("mesh_unstructured: boundary vertex dropped");
      }
      m.vertices = std::move(nv);
      break;
    }
  m.validate();
  const double ma = m.min_angle_deg();
  if (ma < 20.0) {
    double wx = 0, wy = 0;
    for (const auto& t : m.triangles) {
      // report the worst triangle's centroid
      for (int k = 0; k < 3; ++k) {
        const Vec2 u = m.vertices[t[(k + 1) % 3]] - m.vertices[t[k]];
        const Vec2 v = m.vertices[t[(k + 2) % 3]] - m.vertices[t[k]];
        const double ang =
            std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v)) * 180.0 / kPi;
        if (std::abs(ang - ma) < 1e-12) {
          const Vec2 cen = (m.vertices[t[0]] + m.vertices[t[1]] + m.vertices[t[2]]) / 3.0;
          wx = cen.x();
          wy = cen.y();
        }
      }
    }
    throw std::runtime_error("mesh_unstructured: sliver triangle (min angle " +
                             std::to_string(ma) + " deg) near (" + std::to_string(wx) + ", " +
                             std::to_string(wy) + ")");
  }
  return m;
}

// ---- uniform refinement --------------------------------------------------------------

Mesh refine_uniform(const Mesh& m, std::vector<std::array<int, 2>>* midpoint_parents) {
  Mesh r;
  r.spec = m.spec;
  r.vertices = m.vertices;
  r.sheet_of_vertex = m.sheet_of_vertex;
  if (midpoint_parents) midpoint_parents->clear();

  std::map<std::pair<int, int>, int> midpoint;
  std::map<std::pair<int, int>, int> edge_curve;  // boundary edge -> curve
  for (const auto& be : m.boundary_edges)
    edge_curve[{std::min(be.a, be.b), std::max(be.a, be.b)}] = be.curve;

  auto mid_of = [&](int a, int b) {
    const auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 p = 0.5 * (m.vertices[a] + m.vertices[b]);
    auto ec = edge_curve.find(key);
    if (ec != edge_curve.end() && ec->second >= 0)
      p = m.spec.curves[ec->second].project(p);  // snap to the source curve
    r.vertices.push_back(p);
    if (!r.sheet_of_vertex.empty()) {
      const int sa = m.sheet_of_vertex[a], sb = m.sheet_of_vertex[b];
      r.sheet_of_vertex.push_back(sa == sb ? sa : std::min(sa, sb));
    }
    if (midpoint_parents) midpoint_parents->push_back({key.first, key.second});
    const int idx = (int)r.vertices.size() - 1;
    midpoint[key] = idx;
    return idx;
  };

  for (const auto& t : m.triangles) {
    const int ab = mid_of(t[0], t[1]);
    const int bc = mid_of(t[1], t[2]);
    const int ca = mid_of(t[2], t[0]);
    r.triangles.push_back({t[0], ab, ca});
    r.triangles.push_back({ab, t[1], bc});
    r.triangles.push_back({ca, bc, t[2]});
    r.triangles.push_back({ab, bc, ca});
  }
  for (const auto& be : m.boundary_edges) {
    const int mid = mid_of(be.a, be.b);
    r.boundary_edges.push_back({be.a, mid, be.tag, be.curve});
    r.boundary_edges.push_back({mid, be.b, be.tag, be.curve});
  }
  r.reflection_axes = m.reflection_axes;
  // carry symmetry permutations over by extending them to midpoints
  for (const auto& perm : m.symmetry_perms) {
    SymmetryPerm np;
    np.name = perm.name;
    np.map.resize(r.num_vertices(), -1);
    for (int i = 0; i < m.num_vertices(); ++i) np.map[i] = perm.map[i];
    bool ok = true;
    for (const auto& [key, idx] : midpoint) {
      const auto ikey = std::make_pair(std::min(perm.map[key.first], perm.map[key.second]),
                                       std::max(perm.map[key.first], perm.map[key.second]));
      auto it = midpoint.find(ikey);
      if (it == midpoint.end()) {
        ok = false;
        break;
      }
      np.map[idx] = it->second;
    }
    if (ok) r.symmetry_perms.push_back(std::move(np));
  }
  r.validate(/*allow_interface_edges=*/true);
  return r;
}

// ---- structured rectangle --------------------------------------------------------------

Mesh mesh_structured_rectangle(const DomainSpec& spec, int nx, int ny) {
  spec.validate();
  if (spec.curves.size() < 4) throw std::invalid_argument("structured: not a rectangle spec");
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& c : spec.curves) {
    if (c.kind != Curve::Kind::Segment)
      throw std::invalid_argument("structured: rectangle curves must be segments");
    for (const Vec2& p : {c.start(), c.end()}) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  Mesh m;
  m.spec = spec;
  const double dx = (hi.x() - lo.x()) / nx, dy = (hi.y() - lo.y()) / ny;
  auto gid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.push_back(Vec2(lo.x() + i * dx, lo.y() + j * dy));
  // cell centers
  const int base = (int)m.vertices.size();
  auto cid = [&](int i, int j) { return base + j * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.vertices.push_back(Vec2(lo.x() + (i + 0.5) * dx, lo.y() + (j + 0.5) * dy));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = cid(i, j);
      m.triangles.push_back({gid(i, j), gid(i + 1, j), c});
      m.triangles.push_back({gid(i + 1, j), gid(i + 1, j + 1), c});
      m.triangles.push_back({gid(i + 1, j + 1), gid(i, j + 1), c});
      m.triangles.push_back({gid(i, j + 1), gid(i, j), c});
    }
  for (int i = 0; i < nx; ++i) {
    m.boundary_edges.push_back({gid(i, 0), gid(i + 1, 0), BoundaryTag::Neumann, -1});
    m.boundary_edges.push_back({gid(i, ny), gid(i + 1, ny), BoundaryTag::Neumann, -1});
  }
  for (int j = 0; j < ny; ++j) {
    m.boundary_edges.push_back({gid(0, j), gid(0, j + 1), BoundaryTag::Neumann, -1});
    m.boundary_edges.push_back({gid(nx, j), gid(nx, j + 1), BoundaryTag::Neumann, -1});
  }
  tag_boundary_edges(m, /*allow_interface=*/false);

  // symmetries useful for degenerate-pair detection
  const Vec2 c = 0.5 * (lo + hi);
  if (auto p = try_build_perm(m, "mirror_x", [c](const Vec2& q) {
        return Vec2(2 * c.x() - q.x(), q.y());
      }))
    m.symmetry_perms.push_back(std::move(*p));
  if (auto p = try_build_perm(m, "mirror_y", [c](const Vec2& q) {
        return Vec2(q.x(), 2 * c.y() - q.y());
      }))
    m.symmetry_perms.push_back(std::move(*p));
  if (nx == ny && std::abs(dx - dy) < 1e-14) {
    if (auto p = try_build_perm(m, "diagonal", [lo](const Vec2& q) {
          return Vec2(lo.x() + (q.y() - lo.y()), lo.y() + (q.x() - lo.x()));
        }))
      m.symmetry_perms.push_back(std::move(*p));
  }
  m.validate();
  return m;
}

// ---- branched double cover ----------------------------------------------------------

Mesh build_cover_mesh(const DomainSpec& cover_spec, double h) {
  if (cover_spec.sheets != 2)
    throw std::invalid_argument("build_cover_mesh: spec is not a cover");
  DomainSpec base = cover_spec;
  base.sheets = 1;
  base.slit.reset();
  base.validate();
  Mesh bm = mesh_symmetric(base, h);

  const double tol = 1e-12;
  const int nvb = bm.num_vertices();
  enum class VClass { Origin, Slit, Regular };
  std::vector<VClass> cls(nvb);
  for (int i = 0; i < nvb; ++i) {
    const Vec2& p = bm.vertices[i];
    if (p.norm() <= tol)
      cls[i] = VClass::Origin;
    else if (std::abs(p.y()) <= tol && p.x() > 0)
      cls[i] = VClass::Slit;
    else
      cls[i] = VClass::Regular;
  }

  // copies: regular -> (v,0),(v,1); slit -> X (sheet0-upper = sheet1-lower),
  // Y (sheet0-lower = sheet1-upper); origin -> one shared vertex
  Mesh cm;
  cm.spec = cover_spec;
  std::vector<int> reg0(nvb, -1), reg1(nvb, -1), slitX(nvb, -1), slitY(nvb, -1);
  int origin_idx = -1;
  auto add_vertex = [&](const Vec2& p, int sheet) {
    cm.vertices.push_back(p);
    cm.sheet_of_vertex.push_back(sheet);
    return (int)cm.vertices.size() - 1;
  };
  for (int i = 0; i < nvb; ++i) {
    switch (cls[i]) {
      case VClass::Origin:
        origin_idx = add_vertex(bm.vertices[i], 0);
        break;
      case VClass::Slit:
        slitX[i] = add_vertex(bm.vertices[i], 0);
        slitY[i] = add_vertex(bm.vertices[i], 1);
        break;
      case VClass::Regular:
        reg0[i] = add_vertex(bm.vertices[i], 0);
        reg1[i] = add_vertex(bm.vertices[i], 1);
        break;
    }
  }

  auto copy_of = [&](int v, int sheet, bool upper) {
    switch (cls[v]) {
      case VClass::Origin:
        return origin_idx;
      case VClass::Slit:
        if (upper) return sheet == 0 ? slitX[v] : slitY[v];
        return sheet == 0 ? slitY[v] : slitX[v];
      default:
        return sheet == 0 ? reg0[v] : reg1[v];
    }
  };

  for (const auto& t : bm.triangles) {
    const Vec2 cen = (bm.vertices[t[0]] + bm.vertices[t[1]] + bm.vertices[t[2]]) / 3.0;
    const bool upper = cen.y() > 0;
    for (int sheet = 0; sheet < 2; ++sheet)
      cm.triangles.push_back({copy_of(t[0], sheet, upper), copy_of(t[1], sheet, upper),
                              copy_of(t[2], sheet, upper)});
  }
  for (const auto& be : bm.boundary_edges) {
    const Vec2 mid = 0.5 * (bm.vertices[be.a] + bm.vertices[be.b]);
    const bool upper = mid.y() > 0 || (std::abs(mid.y()) <= tol && false);
    for (int sheet = 0; sheet < 2; ++sheet)
      cm.boundary_edges.push_back(
          {copy_of(be.a, sheet, upper), copy_of(be.b, sheet, upper), be.tag, be.curve});
  }

  // sheet swap T, and the two axial symmetries U, V of the cover
  VertexLookup blut;
  blut.build(bm.vertices);
  auto mirror_x_of = [&](int v) {
    const Vec2 p(bm.vertices[v].x(), -bm.vertices[v].y());
    const int j = blut.find(p, 1e-9);
    if (j < 0) throw std::runtime_error("build_cover_mesh: base mesh not mirror-symmetric");
    return j;
  };
  SymmetryPerm T{"sheet_swap", std::vector<int>(cm.num_vertices(), -1)};
  SymmetryPerm U{"cover_U", std::vector<int>(cm.num_vertices(), -1)};
  SymmetryPerm V{"cover_V", std::vector<int>(cm.num_vertices(), -1)};
  for (int v = 0; v < nvb; ++v) {
    const int mv = mirror_x_of(v);
    switch (cls[v]) {
      case VClass::Origin:
        T.map[origin_idx] = origin_idx;
        U.map[origin_idx] = origin_idx;
        V.map[origin_idx] = origin_idx;
        break;
      case VClass::Slit:
        T.map[slitX[v]] = slitY[v];
        T.map[slitY[v]] = slitX[v];
        U.map[slitX[v]] = slitX[v];  // F_U = the lifts of the positive-x ray
        U.map[slitY[v]] = slitY[v];
        V.map[slitX[v]] = slitY[v];
        V.map[slitY[v]] = slitX[v];
        break;
      case VClass::Regular:
        T.map[reg0[v]] = reg1[v];
        T.map[reg1[v]] = reg0[v];
        // U: (r, phi) -> (r, 4 pi - phi): base mirror + sheet swap away from F_U
        if (cls[mv] == VClass::Slit) {
          // v is strictly off the x-axis, its mirror cannot be on the slit
          throw std::runtime_error("build_cover_mesh: unexpected mirror image");
        }
        U.map[reg0[v]] = reg1[mv];
        U.map[reg1[v]] = reg0[mv];
        V.map[reg0[v]] = reg0[mv];
        V.map[reg1[v]] = reg1[mv];
        break;
    }
  }
  // vertices on the negative-x axis are Regular with mv == v; U swaps their
  // sheets (phi = pi <-> 3 pi), V fixes them, as the formulas above already give.
  cm.symmetry_perms = {T, U, V};
  cm.reflection_axes = bm.reflection_axes;
  cm.validate();
  return cm;
}

}  // namespace zaremba
