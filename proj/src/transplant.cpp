#include "zaremba/transplant.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace zaremba {

namespace {

constexpr double kPi = 3.14159265358979323846;

double vertex_angle(const Vec2& p) {
  double a = std::atan2(p.y(), p.x());
  if (a < -1e-9) a += 2 * kPi;
  return std::max(a, 0.0);
}

double snap_trig(double v) {
  if (std::abs(v) < 1e-15) return 0;
  if (std::abs(v - 1) < 1e-15) return 1;
  if (std::abs(v + 1) < 1e-15) return -1;
  return v;
}

Vec2 reflect_axis(const Vec2& p, double theta) {
  const double c = snap_trig(std::cos(2 * theta)), s = snap_trig(std::sin(2 * theta));
  return Vec2(c * p.x() + s * p.y(), s * p.x() - c * p.y());
}

Vec2 rotate(const Vec2& p, double theta) {
  const double c = snap_trig(std::cos(theta)), s = snap_trig(std::sin(theta));
  return Vec2(c * p.x() - s * p.y(), s * p.x() + c * p.y());
}

}  // namespace

TransplantMap build_transplant(const Mesh& m, bool forward, bool interface_branch2) {
  if (m.is_cover()) throw std::invalid_argument("build_transplant: not defined on covers");
  const int n = m.num_vertices();
  double span = 0.0;
  for (const auto& v : m.vertices)
    if (v.norm() > 1e-12) span = std::max(span, vertex_angle(v));
  const double alpha = span / 4.0;
  if (!(alpha > 1e-9))
    throw std::invalid_argument("build_transplant: mesh has no angular extent");

  // shortest edge controls the nearest-vertex fallback radius
  double min_edge = std::numeric_limits<double>::max();
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k)
      min_edge = std::min(min_edge, (m.vertices[t[k]] - m.vertices[t[(k + 1) % 3]]).norm());

  VertexLookup lut;
  lut.build(m.vertices);
  const double fallback = 0.25 * min_edge;
  VertexLookup coarse(fallback);
  coarse.build(m.vertices);
  double defect = 0.0;
  auto lookup = [&](const Vec2& p) {
    int j = lut.find(p, 1e-9);
    if (j < 0) {
      j = coarse.find(p, fallback);
      if (j < 0)
        throw std::runtime_error(
            "build_transplant: mesh is not closed under the quarter-line reflections");
      defect = std::max(defect, (m.vertices[j] - p).norm());
    }
    return j;
  };

  std::vector<Eigen::Triplet<double>> trip;
  const double w = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    const Vec2& p = m.vertices[i];
    if (p.norm() <= 1e-12) continue;  // the origin row is identically zero
    const double phi = vertex_angle(p);
    const bool on_interface = std::abs(phi - 2 * alpha) * p.norm() <= 1e-12;
    const bool branch1 = on_interface ? !interface_branch2 : phi < 2 * alpha;
    std::map<int, double> row;
    if (branch1) {
      const int j_ref = lookup(reflect_axis(p, alpha));  // value at 2a - phi
      const int j_rot = lookup(rotate(p, 2 * alpha));    // value at 2a + phi
      row[j_ref] += w;
      row[j_rot] += forward ? -w : w;
    } else {
      const int j_ref = lookup(reflect_axis(p, 3 * alpha));  // value at 6a - phi
      const int j_rot = lookup(rotate(p, -2 * alpha));       // value at phi - 2a
      row[j_ref] += w;
      row[j_rot] += forward ? w : -w;
    }
    for (const auto& [j, v] : row)
      if (v != 0.0) trip.emplace_back(i, j, v);
  }
  TransplantMap map;
  map.forward = forward;
  map.alpha = alpha;
  map.geometric_defect = defect;
  map.matrix.resize(n, n);
  map.matrix.setFromTriplets(trip.begin(), trip.end());
  map.matrix.makeCompressed();
  return map;
}

TransplantReport verify_transplantation(const MatrixPair& problem1,
                                        const MatrixPair& problem2, const Spectrum& s1,
                                        const EigenBasis& b1, const TransplantMap& map,
                                        double tol) {
  TransplantReport rep;
  rep.tol = tol;
  rep.pass = true;
  const int modes = (int)s1.values.size();
  for (int k = 0; k < modes; ++k) {
    const Eigen::VectorXd u_full = problem1.lift(b1.vectors.col(k));
    const Eigen::VectorXd v_full = map.matrix * u_full;
    TransplantModeReport r;
    r.mode = k;
    r.lambda = s1.values[k];
    for (std::size_t v = 0; v < problem2.constrained.size(); ++v)
      if (problem2.constrained[v])
        r.constraint_violation = std::max(r.constraint_violation, std::abs(v_full[v]));
    const Eigen::VectorXd v_free = problem2.restrict_to_free(v_full);
    const Eigen::VectorXd Mv = problem2.M * v_free;
    const double vnorm = std::sqrt(v_free.dot(Mv));
    r.residual = (problem2.K * v_free - s1.values[k] * Mv).norm() / Mv.norm();
    r.norm_defect = std::abs(vnorm - 1.0);
    const bool ok =
        r.residual <= tol && r.constraint_violation <= 1e-12 * std::max(1.0, vnorm);
    if (!ok && rep.first_failure < 0) rep.first_failure = k;
    rep.pass = rep.pass && ok;
    rep.modes.push_back(r);
  }
  return rep;
}

}  // namespace zaremba
