#include "zaremba/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace zaremba {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_2pi(double a) {
  double r = std::fmod(a, 2.0 * kPi);
  if (r < 0) r += 2.0 * kPi;
  return r;
}

double simpson(const std::function<double(double)>& g, double a, double b, double fa,
               double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& g, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = simpson(g, a, m, fa, flm, fm);
  const double right = simpson(g, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& g, double a, double b,
                          double tol) {
  if (a == b) return 0.0;
  const double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
  const double whole = simpson(g, a, b, fa, fm, fb);
  return adaptive_step(g, a, b, fa, fm, fb, whole, tol, 48);
}

BoundaryTag swap_tag(BoundaryTag t) {
  return t == BoundaryTag::Dirichlet ? BoundaryTag::Neumann : BoundaryTag::Dirichlet;
}

const char* tag_name(BoundaryTag t) {
  return t == BoundaryTag::Dirichlet ? "dirichlet" : "neumann";
}

MetricWeight MetricWeight::flat() { return MetricWeight{}; }

MetricWeight MetricWeight::spherical() {
  MetricWeight w;
  w.kind = Kind::Radial;
  w.name = "spherical";
  w.f = [](double r) {
    const double s = 1.0 + r * r;
    return 4.0 / (s * s);
  };
  return w;
}

MetricWeight MetricWeight::radial(std::string name, std::function<double(double)> f) {
  MetricWeight w;
  w.kind = Kind::Radial;
  w.name = std::move(name);
  w.f = std::move(f);
  return w;
}

Curve Curve::segment(const Vec2& a, const Vec2& b, BoundaryTag t) {
  Curve c;
  c.kind = Kind::Segment;
  c.tag = t;
  c.p0 = a;
  c.p1 = b;
  if ((b - a).norm() <= kGeomTol)
    throw std::invalid_argument("Curve::segment: zero length");
  return c;
}

Curve Curve::arc(const Vec2& cen, double r, double a0, double a1, BoundaryTag t) {
  if (!(a0 < a1)) throw std::invalid_argument("Curve::arc: requires angle0 < angle1");
  if (!(r > 0)) throw std::invalid_argument("Curve::arc: requires radius > 0");
  Curve c;
  c.kind = Kind::Arc;
  c.tag = t;
  c.center = cen;
  c.radius = r;
  c.angle0 = a0;
  c.angle1 = a1;
  return c;
}

Vec2 Curve::at(double t) const {
  if (reversed) t = 1.0 - t;
  if (kind == Kind::Segment) return p0 + t * (p1 - p0);
  const double a = angle0 + t * (angle1 - angle0);
  return center + radius * Vec2(std::cos(a), std::sin(a));
}

Vec2 Curve::start() const { return at(0.0); }
Vec2 Curve::end() const { return at(1.0); }

double Curve::length() const {
  if (kind == Kind::Segment) return (p1 - p0).norm();
  return radius * (angle1 - angle0);
}

double Curve::weighted_length(const MetricWeight& w) const {
  if (w.is_flat()) return length();
  const double L = length();
  auto integrand = [&](double t) {
    const Vec2 p = at(t);
    return std::sqrt(w(p.norm())) * L;
  };
  return integrate_adaptive(integrand, 0.0, 1.0, 1e-10);
}

Curve Curve::with_tag(BoundaryTag t) const {
  Curve c = *this;
  c.tag = t;
  return c;
}

Curve Curve::reversed_copy() const {
  Curve c = *this;
  if (kind == Kind::Segment)
    std::swap(c.p0, c.p1);
  else
    c.reversed = !c.reversed;
  return c;
}

Curve Curve::rotated(double theta) const {
  Curve c = *this;
  const double co = std::cos(theta), si = std::sin(theta);
  auto rot = [co, si](const Vec2& p) {
    return Vec2(co * p.x() - si * p.y(), si * p.x() + co * p.y());
  };
  if (kind == Kind::Segment) {
    c.p0 = rot(p0);
    c.p1 = rot(p1);
  } else {
    c.center = rot(center);
    c.angle0 = angle0 + theta;
    c.angle1 = angle1 + theta;
  }
  return c;
}

Curve Curve::mirrored_x() const {
  Curve c = *this;
  if (kind == Kind::Segment) {
    c.p0 = Vec2(p0.x(), -p0.y());
    c.p1 = Vec2(p1.x(), -p1.y());
  } else {
    c.center = Vec2(center.x(), -center.y());
    c.angle0 = -angle1;
    c.angle1 = -angle0;
    c.reversed = !c.reversed;
  }
  return c;
}

Curve Curve::reflected(double axis_angle) const {
  // reflection about the line through the origin at axis_angle:
  // rotate by -axis_angle, mirror in x, rotate back
  return rotated(-axis_angle).mirrored_x().rotated(axis_angle);
}

Curve Curve::translated(const Vec2& d) const {
  Curve c = *this;
  if (kind == Kind::Segment) {
    c.p0 += d;
    c.p1 += d;
  } else {
    c.center += d;
  }
  return c;
}

Curve Curve::point_reflected(const Vec2& o) const {
  Curve c = *this;
  if (kind == Kind::Segment) {
    c.p0 = 2.0 * o - p0;
    c.p1 = 2.0 * o - p1;
  } else {
    c.center = 2.0 * o - center;
    c.angle0 = angle0 + kPi;
    c.angle1 = angle1 + kPi;
  }
  return c;
}

double Curve::distance(const Vec2& p, double* t_out) const {
  if (kind == Kind::Segment) {
    const Vec2 d = p1 - p0;
    double t = d.squaredNorm() > 0 ? (p - p0).dot(d) / d.squaredNorm() : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (t_out) *t_out = reversed ? 1.0 - t : t;
    return (p - (p0 + t * d)).norm();
  }
  const Vec2 v = p - center;
  double theta = std::atan2(v.y(), v.x());
  // choose the representative of theta + 2 pi k nearest to the arc interval
  double best = std::numeric_limits<double>::max();
  double best_t = 0.0;
  for (int k = -2; k <= 2; ++k) {
    const double a = theta + 2.0 * kPi * k;
    const double ac = std::clamp(a, angle0, angle1);
    const Vec2 q = center + radius * Vec2(std::cos(ac), std::sin(ac));
    const double d = (p - q).norm();
    if (d < best) {
      best = d;
      best_t = (angle1 > angle0) ? (ac - angle0) / (angle1 - angle0) : 0.0;
    }
  }
  if (t_out) *t_out = reversed ? 1.0 - best_t : best_t;
  return best;
}

Vec2 Curve::project(const Vec2& p) const {
  double t = 0.0;
  distance(p, &t);
  return at(t);
}

bool Curve::approx_equal(const Curve& other, double tol) const {
  if (kind != other.kind || tag != other.tag) return false;
  const Vec2 s = start(), e = end(), m = at(0.5);
  const Vec2 os = other.start(), oe = other.end(), om = other.at(0.5);
  auto near = [tol](const Vec2& a, const Vec2& b) { return (a - b).norm() <= tol; };
  // same geometry traversed either way
  if (near(s, os) && near(e, oe) && near(m, om)) return true;
  if (near(s, oe) && near(e, os) && near(m, om)) return true;
  return false;
}

double DomainSpec::signed_area() const {
  double area = 0.0;
  for (const auto& c : curves) {
    const int n = c.kind == Curve::Kind::Arc
                      ? std::max(2, (int)std::ceil((c.angle1 - c.angle0) / 0.01))
                      : 1;
    Vec2 prev = c.at(0.0);
    for (int i = 1; i <= n; ++i) {
      const Vec2 q = c.at((double)i / n);
      area += 0.5 * (prev.x() * q.y() - q.x() * prev.y());
      prev = q;
    }
  }
  return area;
}

void DomainSpec::validate() const {
  if (curves.empty()) throw std::invalid_argument("DomainSpec: no curves");
  for (const auto& c : curves) {
    if (c.length() <= kGeomTol) throw std::invalid_argument("DomainSpec: zero-length curve");
    if (c.kind == Curve::Kind::Arc && !(c.angle0 < c.angle1))
      throw std::invalid_argument("DomainSpec: arc with angle0 >= angle1");
  }
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const Vec2 e = curves[i].end();
    const Vec2 s = curves[(i + 1) % curves.size()].start();
    if ((e - s).norm() > kGeomTol)
      throw std::invalid_argument("DomainSpec: boundary loop not closed at curve " +
                                  std::to_string(i));
  }
  if (sheets == 1) {
    if (signed_area() <= 0)
      throw std::invalid_argument("DomainSpec: boundary loop not counterclockwise");
  } else if (sheets == 2) {
    if (!slit) throw std::invalid_argument("DomainSpec: sheets=2 requires a slit");
    for (const Vec2 p : {slit->start(), slit->end()}) {
      if (p.norm() <= kGeomTol) continue;  // branch point O
      double d = std::numeric_limits<double>::max();
      for (const auto& c : curves) d = std::min(d, c.distance(p));
      if (d > kGeomTol)
        throw std::invalid_argument("DomainSpec: slit endpoint neither at O nor on boundary");
    }
  } else {
    throw std::invalid_argument("DomainSpec: sheets must be 1 or 2");
  }
}

// ---- half-disk -------------------------------------------------------------

DomainSpec build_half_disk(int variant, const MetricWeight& weight) {
  if (variant != 1 && variant != 2)
    throw std::invalid_argument("build_half_disk: variant must be 1 or 2");
  const BoundaryTag D = BoundaryTag::Dirichlet, N = BoundaryTag::Neumann;
  const Vec2 O(0, 0);
  DomainSpec s;
  s.curves = {
      Curve::segment(O, Vec2(1, 0), N),
      Curve::arc(O, 1.0, 0.0, kPi / 4, N),
      Curve::arc(O, 1.0, kPi / 4, kPi / 2, D),
      Curve::arc(O, 1.0, kPi / 2, 3 * kPi / 4, D),
      Curve::arc(O, 1.0, 3 * kPi / 4, kPi, N),
      Curve::segment(Vec2(-1, 0), O, D),
  };
  if (variant == 2)
    for (auto& c : s.curves) c.tag = swap_tag(c.tag);
  s.weight = weight;
  s.symmetry_axes = {kPi / 4, kPi / 2};
  s.family = "half_disk";
  s.params["variant"] = variant;
  s.validate();
  return s;
}

// ---- disk partition ---------------------------------------------------------

std::pair<DomainSpec, DomainSpec> build_disk_partition(double alpha, double beta) {
  if (!(alpha > 0 && alpha <= kPi) || !(beta > 0 && beta <= kPi))
    throw std::invalid_argument("build_disk_partition: alpha, beta must lie in (0, pi]");
  const BoundaryTag D = BoundaryTag::Dirichlet, N = BoundaryTag::Neumann;
  const Vec2 O(0, 0);
  const double a0 = 0, a1 = alpha, a2 = alpha + beta, a3 = kPi + beta, a4 = 2 * kPi;
  DomainSpec s;
  s.curves = {
      Curve::arc(O, 1.0, a0, a1, D),
      Curve::arc(O, 1.0, a1, a2, N),
      Curve::arc(O, 1.0, a2, a3, D),
      Curve::arc(O, 1.0, a3, a4, N),
  };
  s.family = "disk_partition";
  s.params["alpha"] = alpha;
  s.params["beta"] = beta;
  s.validate();
  DomainSpec t = s;
  for (auto& c : t.curves) c.tag = swap_tag(c.tag);
  return {s, t};
}

namespace {

using Interval = std::pair<double, double>;  // (start mod 2pi, length)

std::vector<Interval> normalize_intervals(const std::vector<Interval>& in) {
  std::vector<Interval> out;
  for (auto [lo, hi] : in) out.push_back({wrap_2pi(lo), hi - lo});
  return out;
}

bool angles_equal(double a, double b, double tol) {
  const double d = std::abs(wrap_2pi(a) - wrap_2pi(b));
  return d <= tol || std::abs(d - 2 * kPi) <= tol;
}

// multiset equality of circular-arc interval collections
bool interval_sets_equal(const std::vector<Interval>& a, const std::vector<Interval>& b,
                         double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& ia : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      if (angles_equal(ia.first, b[j].first, tol) && std::abs(ia.second - b[j].second) <= tol) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

bool disk_partition_swap_is_trivial(double alpha, double beta, double tol) {
  const double a1 = alpha, a2 = alpha + beta, a3 = kPi + beta;
  std::vector<Interval> D = {{0, a1}, {a2, a3}};
  std::vector<Interval> N = {{a1, a2}, {a3, 2 * kPi}};
  const std::vector<double> endpoints = {0, a1, a2, a3};
  const auto Nn = normalize_intervals(N);
  // candidate isometries map some endpoint onto some endpoint
  for (double e : endpoints) {
    for (double f : endpoints) {
      // rotation phi -> phi + (f - e)
      {
        const double th = f - e;
        std::vector<Interval> DR;
        for (auto [lo, hi] : D) DR.push_back({lo + th, hi + th});
        if (interval_sets_equal(normalize_intervals(DR), Nn, tol)) return true;
      }
      // reflection phi -> (e + f) - phi
      {
        const double c = e + f;
        std::vector<Interval> DR;
        for (auto [lo, hi] : D) DR.push_back({c - hi, c - lo});
        if (interval_sets_equal(normalize_intervals(DR), Nn, tol)) return true;
      }
    }
  }
  return false;
}

// ---- sectorial domains -------------------------------------------------------

void SectorialBlock::validate() const {
  if (!(alpha > 0 && alpha < kPi / 2))
    throw std::invalid_argument("SectorialBlock: alpha must lie in (0, pi/2)");
  if (std::abs(std::atan2(z1.y(), z1.x())) > 1e-12 || z1.norm() <= kGeomTol)
    throw std::invalid_argument("SectorialBlock: z1 must satisfy arg z1 = 0");
  if (std::abs(std::atan2(z2.y(), z2.x()) - alpha) > 1e-12 || z2.norm() <= kGeomTol)
    throw std::invalid_argument("SectorialBlock: z2 must satisfy arg z2 = alpha");
  if (gamma.empty() || gamma.size() != piece_part.size())
    throw std::invalid_argument("SectorialBlock: gamma and piece_part sizes mismatch");
  for (int p : piece_part)
    if (p != 1 && p != 2) throw std::invalid_argument("SectorialBlock: parts must be 1 or 2");
  if ((gamma.front().start() - z1).norm() > kGeomTol ||
      (gamma.back().end() - z2).norm() > kGeomTol)
    throw std::invalid_argument("SectorialBlock: gamma must run from z1 to z2");
  for (std::size_t i = 0; i + 1 < gamma.size(); ++i)
    if ((gamma[i].end() - gamma[i + 1].start()).norm() > kGeomTol)
      throw std::invalid_argument("SectorialBlock: gamma chain not connected");
  // vertices inside the closed sector, away from the origin
  for (const auto& c : gamma) {
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Vec2 v = c.at(t);
      if (v.norm() <= kGeomTol)
        throw std::invalid_argument("SectorialBlock: gamma passes through the origin");
      const double ang = std::atan2(v.y(), v.x());
      if (ang < -1e-12 || ang > alpha + 1e-12)
        throw std::invalid_argument("SectorialBlock: gamma leaves the sector");
    }
  }
  // pairwise self-intersection check on a polygonalized gamma
  std::vector<Vec2> poly;
  for (const auto& c : gamma) {
    const int n = c.kind == Curve::Kind::Arc ? 32 : 8;
    for (int i = 0; i < n; ++i) poly.push_back(c.at((double)i / n));
  }
  poly.push_back(gamma.back().end());
  auto seg_cross = [](const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
      return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 * o2 < -1e-24 && o3 * o4 < -1e-24;
  };
  for (std::size_t i = 0; i + 1 < poly.size(); ++i)
    for (std::size_t j = i + 2; j + 1 < poly.size(); ++j)
      if (seg_cross(poly[i], poly[i + 1], poly[j], poly[j + 1]))
        throw std::invalid_argument("SectorialBlock: gamma self-intersects");
}

DomainSpec build_sectorial_domain(const SectorialBlock& block, bool swapped) {
  block.validate();
  const double a = block.alpha;
  const BoundaryTag D = BoundaryTag::Dirichlet, N = BoundaryTag::Neumann;

  // Dirichlet membership of a gamma copy j in Problem I:
  // boundary part 1 = Gamma_{1,1} u Gamma_{2,2} u Gamma_{3,2} u Gamma_{4,1} u end radius
  auto tag_for = [&](int copy, int part) {
    const bool dirichlet = (copy == 1 || copy == 4) ? part == 1 : part == 2;
    BoundaryTag t = dirichlet ? D : N;
    return swapped ? swap_tag(t) : t;
  };

  std::vector<Curve> g1 = block.gamma;
  std::vector<int> parts = block.piece_part;
  const std::size_t n = g1.size();

  auto reflect_chain = [](const std::vector<Curve>& chain, double axis) {
    std::vector<Curve> out;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
      out.push_back(it->reflected(axis).reversed_copy());
    return out;
  };
  const std::vector<Curve> g2 = reflect_chain(g1, a);
  const std::vector<Curve> g3 = reflect_chain(g2, 2 * a);
  const std::vector<Curve> g4_tmp = reflect_chain(g1, 2 * a);
  // Gamma_4 = S_{2a} Gamma_1 runs from S_{2a} z2 to S_{2a} z1, which is the
  // orientation the loop needs; the double reversal in reflect_chain already
  // produces that order.
  const std::vector<Curve>& g4 = g4_tmp;

  auto part_of = [&](int copy, std::size_t idx) {
    // copies 2 and 4 reverse the piece order, copy 3 restores it
    if (copy == 1) return parts[idx];
    if (copy == 2 || copy == 4) return parts[n - 1 - idx];
    return parts[idx];
  };

  DomainSpec s;
  s.curves.push_back(Curve::segment(Vec2(0, 0), block.z1, swapped ? D : N));
  const std::vector<const std::vector<Curve>*> chains = {&g1, &g2, &g3, &g4};
  for (int copy = 1; copy <= 4; ++copy) {
    const auto& ch = *chains[copy - 1];
    for (std::size_t i = 0; i < ch.size(); ++i) {
      Curve c = ch[i];
      c.tag = tag_for(copy, part_of(copy, i));
      s.curves.push_back(c);
    }
  }
  const Vec2 end_radius = block.z1 * std::cos(4 * a) +
                          Vec2(-block.z1.y(), block.z1.x()) * std::sin(4 * a);
  s.curves.push_back(Curve::segment(end_radius, Vec2(0, 0), swapped ? N : D));

  s.symmetry_axes = {a, 2 * a};
  s.family = "sectorial";
  s.params["alpha"] = a;
  s.params["swapped"] = swapped ? 1 : 0;
  s.validate();

  // reject self-intersecting unions of the reflected copies
  std::vector<Vec2> poly;
  for (const auto& c : s.curves) {
    const int m = c.kind == Curve::Kind::Arc ? 32 : 8;
    for (int i = 0; i < m; ++i) poly.push_back(c.at((double)i / m));
  }
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };
  const std::size_t np = poly.size();
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = i + 2; j < np; ++j) {
      if (i == 0 && j == np - 1) continue;
      const Vec2 &A = poly[i], &B = poly[(i + 1) % np], &C = poly[j], &Dd = poly[(j + 1) % np];
      const double o1 = orient(A, B, C), o2 = orient(A, B, Dd);
      const double o3 = orient(C, Dd, A), o4 = orient(C, Dd, B);
      if (o1 * o2 < -1e-24 && o3 * o4 < -1e-24)
        throw std::invalid_argument("build_sectorial_domain: reflected copies overlap");
    }
  }
  return s;
}

// ---- symmetry pairs ----------------------------------------------------------

namespace {

bool on_line(const Vec2& p, const Vec2& pt, const Vec2& dir, double tol) {
  const Vec2 d = dir.normalized();
  const Vec2 v = p - pt;
  return std::abs(v.x() * d.y() - v.y() * d.x()) <= tol;
}

}  // namespace

std::pair<DomainSpec, DomainSpec> build_symmetry_pair(const HalfInput& half) {
  if (half.chain.empty()) throw std::invalid_argument("build_symmetry_pair: empty chain");
  const Vec2 a = half.chain.front().start();
  const Vec2 b = half.chain.back().end();
  const double scale = std::max(1.0, std::max(a.norm(), b.norm()));
  if (!on_line(a, half.axis_point, half.axis_dir, kGeomTol * scale) ||
      !on_line(b, half.axis_point, half.axis_dir, kGeomTol * scale))
    throw std::invalid_argument("build_symmetry_pair: chain endpoints must lie on the axis");
  for (std::size_t i = 0; i + 1 < half.chain.size(); ++i)
    if ((half.chain[i].end() - half.chain[i + 1].start()).norm() > kGeomTol)
      throw std::invalid_argument("build_symmetry_pair: chain not connected");
  // chain interior must stay strictly on one side of the axis
  const Vec2 d = half.axis_dir.normalized();
  auto side = [&](const Vec2& p) {
    const Vec2 v = p - half.axis_point;
    return v.x() * d.y() - v.y() * d.x();
  };
  double side_sign = 0.0;
  for (const auto& c : half.chain)
    for (double t : {0.25, 0.5, 0.75}) {
      const double s = side(c.at(t));
      if (std::abs(s) > 1e-9) {
        if (side_sign == 0.0) side_sign = s > 0 ? 1.0 : -1.0;
        if (s * side_sign < 0)
          throw std::invalid_argument(
              "build_symmetry_pair: reflected copy would overlap the half");
      }
    }

  const bool spherical_family = !half.weight.is_flat();

  // mirror across the axis: valid for flat weights and, when the axis passes
  // through the origin, for any radial weight
  if (spherical_family) {
    if (std::abs(side(Vec2(0, 0))) > kGeomTol || std::abs(d.x()) > kGeomTol)
      throw std::invalid_argument(
          "build_symmetry_pair: radial weights require the axis to be the vertical "
          "axis through the origin");
  }

  const double axis_angle = std::atan2(d.y(), d.x());
  auto mirror = [&](const Curve& c) {
    Curve t = c.translated(-half.axis_point);
    t = t.reflected(axis_angle);
    return t.translated(half.axis_point);
  };

  DomainSpec axi;
  axi.curves = half.chain;
  for (auto it = half.chain.rbegin(); it != half.chain.rend(); ++it)
    axi.curves.push_back(mirror(*it).reversed_copy());
  axi.weight = half.weight;
  axi.family = "symmetry_pair_axisymmetric";
  if (axi.signed_area() < 0) {
    std::vector<Curve> flipped;
    for (auto it = axi.curves.rbegin(); it != axi.curves.rend(); ++it)
      flipped.push_back(it->reversed_copy());
    axi.curves = std::move(flipped);
  }
  axi.validate();

  DomainSpec cen;
  cen.weight = half.weight;
  cen.family = "symmetry_pair_central";
  if (!spherical_family) {
    const Vec2 O = 0.5 * (a + b);
    cen.curves = half.chain;
    for (const auto& c : half.chain) cen.curves.push_back(c.point_reflected(O));
    if (cen.signed_area() < 0) {
      std::vector<Curve> flipped;
      for (auto it = cen.curves.rbegin(); it != cen.curves.rend(); ++it)
        flipped.push_back(it->reversed_copy());
      cen.curves = std::move(flipped);
    }
    cen.validate();
    // reject overlapping central reflections: proper boundary self-crossings
    std::vector<Vec2> poly;
    for (const auto& c : cen.curves) {
      const int m = c.kind == Curve::Kind::Arc ? 24 : 6;
      for (int i = 0; i < m; ++i) poly.push_back(c.at((double)i / m));
    }
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
      return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    };
    const std::size_t np = poly.size();
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = i + 2; j < np; ++j) {
        if (i == 0 && j == np - 1) continue;
        const Vec2 &A = poly[i], &B = poly[(i + 1) % np];
        const Vec2 &C = poly[j], &Dd = poly[(j + 1) % np];
        const double o1 = orient(A, B, C), o2 = orient(A, B, Dd);
        const double o3 = orient(C, Dd, A), o4 = orient(C, Dd, B);
        if (o1 * o2 < -1e-24 && o3 * o4 < -1e-24)
          throw std::invalid_argument(
              "build_symmetry_pair: centrally reflected copy overlaps the half");
      }
  } else {
    // Quarter-sphere family: the central symmetry is the sphere rotation
    // pulled back through stereographic projection, z -> (i - z)/(1 - i z).
    // It swaps the unit-circle arc [0, pi/2] with the diameter segment [0, 1].
    auto iota_arc_angle_to_x = [](double phi) { return -std::cos(phi) / (1.0 + std::sin(phi)); };
    auto iota_x_to_arc_angle = [](double t) { return kPi / 2 + 2.0 * std::atan(t); };
    cen.curves = half.chain;
    for (const auto& c : half.chain) {
      if (c.kind == Curve::Kind::Arc) {
        if (c.center.norm() > kGeomTol || std::abs(c.radius - 1.0) > kGeomTol ||
            c.angle0 < -1e-12 || c.angle1 > kPi / 2 + 1e-12)
          throw std::invalid_argument(
              "build_symmetry_pair: spherical halves must consist of unit-circle arcs in "
              "[0, pi/2] and x-axis segments in [0, 1]");
        const double x0 = iota_arc_angle_to_x(c.angle0);
        const double x1 = iota_arc_angle_to_x(c.angle1);
        Curve seg = Curve::segment(Vec2(x0, 0), Vec2(x1, 0), c.tag);
        if (c.reversed) seg = seg.reversed_copy();
        cen.curves.push_back(seg);
      } else {
        if (std::abs(c.p0.y()) > kGeomTol || std::abs(c.p1.y()) > kGeomTol ||
            c.p0.x() < -1e-12 || c.p1.x() < -1e-12 || c.p0.x() > 1 + 1e-12 ||
            c.p1.x() > 1 + 1e-12)
          throw std::invalid_argument(
              "build_symmetry_pair: spherical halves must consist of unit-circle arcs in "
              "[0, pi/2] and x-axis segments in [0, 1]");
        const double t0 = std::min(c.p0.x(), c.p1.x());
        const double t1 = std::max(c.p0.x(), c.p1.x());
        Curve arc = Curve::arc(Vec2(0, 0), 1.0, iota_x_to_arc_angle(t0),
                               iota_x_to_arc_angle(t1), c.tag);
        // psi(t) is increasing, so the image arc runs forward exactly when the
        // segment was traversed in increasing x
        if (c.p0.x() > c.p1.x()) arc = arc.reversed_copy();
        cen.curves.push_back(arc);
      }
    }
    if (cen.signed_area() < 0) {
      std::vector<Curve> flipped;
      for (auto it = cen.curves.rbegin(); it != cen.curves.rend(); ++it)
        flipped.push_back(it->reversed_copy());
      cen.curves = std::move(flipped);
    }
    cen.symmetry_axes = {kPi / 4, kPi / 2};
    cen.validate();
  }
  if (spherical_family) axi.symmetry_axes = {kPi / 4, kPi / 2};
  return {axi, cen};
}

// ---- double cover ------------------------------------------------------------

DomainSpec build_alternating_disk() {
  const BoundaryTag D = BoundaryTag::Dirichlet, N = BoundaryTag::Neumann;
  const Vec2 O(0, 0);
  DomainSpec s;
  s.curves = {
      Curve::arc(O, 1.0, -kPi / 4, kPi / 4, N),
      Curve::arc(O, 1.0, kPi / 4, 3 * kPi / 4, D),
      Curve::arc(O, 1.0, 3 * kPi / 4, 5 * kPi / 4, N),
      Curve::arc(O, 1.0, 5 * kPi / 4, 7 * kPi / 4, D),
  };
  s.symmetry_axes = {kPi / 4, kPi / 2, 0.0};
  s.family = "alternating_disk";
  s.validate();
  return s;
}

DomainSpec build_double_cover(const DomainSpec& base) {
  base.validate();
  // base must be the unit disk with D/N quarter arcs switching at pi/4 + k pi/2
  const DomainSpec ref = build_alternating_disk();
  auto tag_at_angle = [](const DomainSpec& s, double theta) -> std::optional<BoundaryTag> {
    const Vec2 p(std::cos(theta), std::sin(theta));
    for (const auto& c : s.curves)
      if (c.distance(p) < 1e-9) return c.tag;
    return std::nullopt;
  };
  bool match_direct = true, match_swapped = true;
  for (int k = 0; k < 16; ++k) {
    const double theta = (k + 0.5) * kPi / 8;
    const auto tb = tag_at_angle(base, theta), tr = tag_at_angle(ref, theta);
    if (!tb || !tr) throw std::invalid_argument("build_double_cover: base is not the unit disk");
    if (*tb != *tr) match_direct = false;
    if (*tb != swap_tag(*tr)) match_swapped = false;
  }
  if (!match_direct && !match_swapped)
    throw std::invalid_argument(
        "build_double_cover: base tags must alternate on quarter arcs split at pi/4 + k pi/2");

  DomainSpec s = base;
  s.sheets = 2;
  s.slit = Curve::segment(Vec2(0, 0), Vec2(1, 0), BoundaryTag::Neumann);
  s.symmetry_axes = {kPi / 4, kPi / 2, 0.0};
  s.family = "double_cover";
  s.validate();
  return s;
}

// ---- lengths and simple builders ----------------------------------------------

std::pair<double, double> boundary_lengths(const DomainSpec& spec) {
  double ld = 0, ln = 0;
  for (const auto& c : spec.curves) {
    const double l = c.weighted_length(spec.weight);
    (c.tag == BoundaryTag::Dirichlet ? ld : ln) += l;
  }
  return {ld * spec.sheets, ln * spec.sheets};
}

DomainSpec build_rectangle(double x0, double y0, double x1, double y1, BoundaryTag bottom,
                           BoundaryTag right, BoundaryTag top, BoundaryTag left) {
  if (!(x1 > x0 && y1 > y0)) throw std::invalid_argument("build_rectangle: empty rectangle");
  DomainSpec s;
  s.curves = {
      Curve::segment(Vec2(x0, y0), Vec2(x1, y0), bottom),
      Curve::segment(Vec2(x1, y0), Vec2(x1, y1), right),
      Curve::segment(Vec2(x1, y1), Vec2(x0, y1), top),
      Curve::segment(Vec2(x0, y1), Vec2(x0, y0), left),
  };
  s.family = "rectangle";
  s.params = {{"x0", x0}, {"y0", y0}, {"x1", x1}, {"y1", y1}};
  s.validate();
  return s;
}

DomainSpec build_disk(BoundaryTag tag) {
  DomainSpec s;
  const Vec2 O(0, 0);
  s.curves = {
      Curve::arc(O, 1.0, 0, kPi / 2, tag),
      Curve::arc(O, 1.0, kPi / 2, kPi, tag),
      Curve::arc(O, 1.0, kPi, 3 * kPi / 2, tag),
      Curve::arc(O, 1.0, 3 * kPi / 2, 2 * kPi, tag),
  };
  s.symmetry_axes = {kPi / 4, kPi / 2, 0.0};
  s.family = "disk";
  s.validate();
  return s;
}

}  // namespace zaremba
