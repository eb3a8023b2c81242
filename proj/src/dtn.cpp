#include "zaremba/dtn.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zaremba {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::DD: return "DD";
    case TraceKind::DN: return "DN";
    case TraceKind::ND: return "ND";
    default: return "NN";
  }
}

QuarterGeometry build_quarter_geometry(double h) {
  if (!(h > 0)) throw std::invalid_argument("build_quarter_geometry: h must be positive");
  const BoundaryTag D = BoundaryTag::Dirichlet, N = BoundaryTag::Neumann;
  DomainSpec spec;
  spec.curves = {
      Curve::segment(Vec2(0, 0), Vec2(0, 1), N),          // vertical radius, piece 4
      Curve::arc(Vec2(0, 0), 1.0, kPi / 2, 3 * kPi / 4, D),
      Curve::arc(Vec2(0, 0), 1.0, 3 * kPi / 4, kPi, N),
      Curve::segment(Vec2(-1, 0), Vec2(0, 0), N),         // horizontal radius, piece 3
  };
  spec.symmetry_axes = {3 * kPi / 4};
  spec.family = "quarter_disk";
  spec.validate();

  QuarterGeometry geo;
  geo.mesh = mesh_symmetric(spec, h, /*wedge_lo=*/kPi / 2);
  const double tol = 1e-12;
  for (int i = 0; i < geo.mesh.num_vertices(); ++i) {
    const Vec2& p = geo.mesh.vertices[i];
    if (p.norm() <= tol) {
      geo.corner_origin = i;
    } else if ((p - Vec2(0, 1)).norm() <= tol) {
      geo.corner_top = i;
    } else if ((p - Vec2(-1, 0)).norm() <= tol) {
      geo.corner_left = i;
    } else if (std::abs(p.x()) <= tol && p.y() > 0 && p.y() < 1) {
      geo.piece4.push_back(i);
    } else if (std::abs(p.y()) <= tol && p.x() < 0 && p.x() > -1) {
      geo.piece3.push_back(i);
    } else if (p.norm() >= 1 - 1e-9) {
      const double ang = std::atan2(p.y(), p.x());
      // the junction vertex at 3 pi / 4 goes with the Dirichlet arc
      if (ang <= 3 * kPi / 4 + 1e-12)
        geo.piece1.push_back(i);
      else
        geo.piece2.push_back(i);
    }
  }
  if (geo.corner_origin < 0 || geo.corner_top < 0 || geo.corner_left < 0)
    throw std::runtime_error("build_quarter_geometry: corner vertices missing");
  std::sort(geo.piece3.begin(), geo.piece3.end(), [&](int a, int b) {
    return std::abs(geo.mesh.vertices[a].x()) < std::abs(geo.mesh.vertices[b].x());
  });
  std::sort(geo.piece4.begin(), geo.piece4.end(), [&](int a, int b) {
    return geo.mesh.vertices[a].y() < geo.mesh.vertices[b].y();
  });
  if (geo.piece3.size() != geo.piece4.size())
    throw std::runtime_error("build_quarter_geometry: radius trace dimensions differ");
  return geo;
}

DtnFactory::DtnFactory(QuarterGeometry geometry, double lambda_max_hint)
    : geo_(std::move(geometry)) {
  full_ = assemble_full(geo_.mesh, MetricWeight::flat());
  base_dirichlet_ = dirichlet_vertices(geo_.mesh);  // the Dirichlet arc, closed
  // the four auxiliary homogeneous problems: (D|N on piece4) x (D|N on piece3)
  for (int k = 0; k < 4; ++k) aux_[k].clear();
  ensure_window(lambda_max_hint);
}

std::vector<char> DtnFactory::flags_for(TraceKind kind) const {
  std::vector<char> f = base_dirichlet_;
  const bool d4 = kind == TraceKind::DD || kind == TraceKind::DN;  // Dirichlet data on 4
  const bool d3 = kind == TraceKind::DN || kind == TraceKind::NN;  // p = 0 on 3
  // corner conventions mirror the folded problem: the branch corner O and the
  // arc corner i are Dirichlet in every auxiliary problem (the trace spaces
  // exclude them), the corner -1 is Dirichlet exactly when piece 3 is
  f[geo_.corner_origin] = 1;
  f[geo_.corner_top] = 1;
  if (d4)
    for (int v : geo_.piece4) f[v] = 1;
  if (d3) {
    for (int v : geo_.piece3) f[v] = 1;
    f[geo_.corner_left] = 1;
  }
  return f;
}

void DtnFactory::ensure_window(double hi) {
  covered_ = std::max(covered_, hi);
  for (int k = 0; k < 4; ++k) {
    const TraceKind kind = static_cast<TraceKind>(k);
    if (!aux_[k].empty() && aux_[k].back() > hi * 1.05) continue;
    const MatrixPair pair = constrain(full_, flags_for(kind));
    int count = 24;
    while (true) {
      count = std::min(count, pair.dim());
      auto [s, b] = solve_lowest(pair, count);
      aux_[k] = s.values;
      if (s.values.back() > hi * 1.05 || count == pair.dim()) break;
      count *= 2;
    }
  }
}

const std::vector<double>& DtnFactory::aux_spectrum(TraceKind kind) const {
  return aux_[(int)kind];
}

double DtnFactory::distance_to_poles(double lambda, std::string* which) const {
  double best = std::numeric_limits<double>::max();
  for (int k = 0; k < 4; ++k) {
    for (double v : aux_[k]) {
      const double d = std::abs(lambda - v);
      if (d < best) {
        best = d;
        if (which) *which = trace_kind_name(static_cast<TraceKind>(k));
      }
    }
  }
  return best;
}

bool DtnFactory::admissible(double lambda, double rel_tol) const {
  return distance_to_poles(lambda) > rel_tol * std::max(1.0, std::abs(lambda));
}

std::vector<double> DtnFactory::poles_in(double lo, double hi) const {
  std::vector<double> out;
  for (int k = 0; k < 4; ++k)
    for (double v : aux_[k])
      if (v > lo && v < hi) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// consistent 1D P1 mass matrix along a radius: interior nodes `chain`,
// terminated by the two corner vertices
Eigen::MatrixXd radius_mass(const Mesh& m, const std::vector<int>& chain, int corner_in,
                            int corner_out) {
  const int n = (int)chain.size();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  auto len = [&](int a, int b) { return (m.vertices[a] - m.vertices[b]).norm(); };
  for (int i = 0; i <= n; ++i) {
    const int a = i == 0 ? corner_in : chain[i - 1];
    const int b = i == n ? corner_out : chain[i];
    const double l = len(a, b);
    if (i > 0) B(i - 1, i - 1) += l / 3.0;
    if (i < n) B(i, i) += l / 3.0;
    if (i > 0 && i < n) {
      B(i - 1, i) += l / 6.0;
      B(i, i - 1) += l / 6.0;
    }
  }
  return B;
}

}  // namespace

Eigen::MatrixXd DtnFactory::trace_operator(TraceKind kind, double lambda) const {
  std::string which;
  const double dist = distance_to_poles(lambda, &which);
  if (dist <= 1e-9 * std::max(1.0, std::abs(lambda)))
    throw std::runtime_error(std::string("trace_operator: lambda inadmissible, auxiliary ") +
                             which + " problem singular within " + std::to_string(dist));
  const int n = trace_dim();
  const auto flags = flags_for(kind);
  ShiftedSolver solver(full_, flags, lambda,
                       std::string("auxiliary ") + trace_kind_name(kind) + " problem");
  const bool d4 = kind == TraceKind::DD || kind == TraceKind::DN;
  const bool out_p = kind == TraceKind::DD || kind == TraceKind::ND;  // read the trace
  const int nv = geo_.mesh.num_vertices();

  Eigen::MatrixXd B3;
  if (!out_p) B3 = radius_mass(geo_.mesh, geo_.piece3, geo_.corner_origin, geo_.corner_left);
  Eigen::PartialPivLU<Eigen::MatrixXd> b3lu;
  if (!out_p) b3lu.compute(B3);

  Eigen::MatrixXd out(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd data = Eigen::VectorXd::Zero(nv);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(nv);
    if (d4) {
      data[geo_.piece4[j]] = 1.0;
    } else {
      // lumped trapezoidal load of the nodal Neumann datum
      const int prev = j == 0 ? geo_.corner_origin : geo_.piece4[j - 1];
      const int next = j == n - 1 ? geo_.corner_top : geo_.piece4[j + 1];
      const double l0 = (geo_.mesh.vertices[geo_.piece4[j]] - geo_.mesh.vertices[prev]).norm();
      const double l1 = (geo_.mesh.vertices[geo_.piece4[j]] - geo_.mesh.vertices[next]).norm();
      load[geo_.piece4[j]] = 0.5 * (l0 + l1);
    }
    const Eigen::VectorXd field = solver.solve(data, load);
    if (out_p) {
      for (int i = 0; i < n; ++i) out(i, j) = field[geo_.piece3[i]];
    } else {
      const Eigen::VectorXd r = solver.residual(field);
      Eigen::VectorXd r3(n);
      for (int i = 0; i < n; ++i) r3[i] = r[geo_.piece3[i]];
      out.col(j) = b3lu.solve(r3);
    }
  }
  return out;
}

DtnSet DtnFactory::build_set(double lambda) const {
  DtnSet set;
  set.lambda = lambda;
  set.DD = trace_operator(TraceKind::DD, lambda);
  set.DN = trace_operator(TraceKind::DN, lambda);
  set.ND = trace_operator(TraceKind::ND, lambda);
  set.NN = trace_operator(TraceKind::NN, lambda);
  const Eigen::PartialPivLU<Eigen::MatrixXd> nn(set.NN);
  const Eigen::PartialPivLU<Eigen::MatrixXd> dd(set.DD);
  set.composite = dd.solve(set.ND * nn.solve(set.DN));
  return set;
}

DetSample DtnFactory::sample(double lambda) const {
  DetSample s;
  s.lambda = lambda;
  if (!admissible(lambda)) return s;
  const DtnSet set = build_set(lambda);
  const int n = trace_dim();
  Eigen::MatrixXd A = set.composite + Eigen::MatrixXd::Identity(n, n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const auto& diag = lu.matrixLU().diagonal();
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  double log_abs = 0;
  for (int i = 0; i < n; ++i) {
    if (diag[i] == 0.0) {
      sign = 0;
      break;
    }
    if (diag[i] < 0) sign = -sign;
    log_abs += std::log(std::abs(diag[i]));
  }
  s.sign = sign;
  s.log_abs = log_abs;
  s.admissible = true;
  return s;
}

ScanResult scan_crossings(const DtnFactory& factory, double lambda_lo, double lambda_hi,
                          int grid, double pole_flag_rel) {
  if (!(lambda_hi > lambda_lo) || grid < 2)
    throw std::invalid_argument("scan_crossings: bad window");
  if (lambda_hi > factory.covered_window())
    throw std::invalid_argument(
        "scan_crossings: window exceeds the factory's auxiliary-spectrum table; "
        "rebuild with a larger lambda_max_hint");
  ScanResult res;
  for (int k = 0; k <= grid; ++k) {
    const double lam = lambda_lo + (lambda_hi - lambda_lo) * k / grid;
    res.samples.push_back(factory.sample(lam));
  }
  int n_adm = 0;
  for (const auto& s : res.samples) n_adm += s.admissible ? 1 : 0;
  if (n_adm == 0) throw std::runtime_error("scan_crossings: window is entirely inadmissible");

  const DetSample* prev = nullptr;
  for (const auto& s : res.samples) {
    if (!s.admissible) continue;
    if (prev && prev->sign != 0 && s.sign != 0 && prev->sign != s.sign) {
      const auto poles = factory.poles_in(prev->lambda, s.lambda);
      if (!poles.empty()) {
        res.flagged_gaps.push_back({prev->lambda, s.lambda});
      } else {
        // bisect the bracket
        double lo = prev->lambda, hi = s.lambda;
        const int slo = prev->sign;
        bool flagged = false;
        while (hi - lo > 1e-8 * std::max(1.0, std::abs(hi))) {
          const double mid = 0.5 * (lo + hi);
          const DetSample ms = factory.sample(mid);
          if (!ms.admissible) {
            flagged = true;
            break;
          }
          if (ms.sign == 0) {
            lo = hi = mid;
            break;
          }
          (ms.sign == slo ? lo : hi) = mid;
        }
        if (flagged) {
          res.flagged_gaps.push_back({prev->lambda, s.lambda});
        } else {
          const double star = 0.5 * (lo + hi);
          if (factory.distance_to_poles(star) <
              pole_flag_rel * std::max(1.0, std::abs(star))) {
            // a determinant flip hugging an operator singularity is an
            // artifact of the composite, not an eigenvalue detection
            res.flagged_gaps.push_back({prev->lambda, s.lambda});
            res.rejected_dips.push_back(star);
          } else {
            // genuine transversal crossings keep opposite signs on a wider
            // bracket; even-order dips recover the entry sign
            const double w = 1e-4 * std::max(1.0, std::abs(star));
            const DetSample before = factory.sample(star - w);
            const DetSample after = factory.sample(star + w);
            if (before.admissible && after.admissible && before.sign == after.sign &&
                before.sign != 0) {
              res.rejected_dips.push_back(star);
              res.flagged_gaps.push_back({star - w, star + w});
            } else {
              res.crossings.push_back(star);
            }
          }
        }
      }
    }
    prev = &s;
  }
  return res;
}

}  // namespace zaremba
