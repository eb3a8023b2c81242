#include "zaremba/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace zaremba {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

BoundaryTag tag_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryTag::Dirichlet;
  if (s == "neumann") return BoundaryTag::Neumann;
  throw ConfigError("unknown boundary tag '" + s + "'");
}

MetricWeight weight_from_string(const std::string& s) {
  if (s == "flat") return MetricWeight::flat();
  if (s == "spherical") return MetricWeight::spherical();
  throw ConfigError("unknown weight '" + s + "' (named weights: flat, spherical)");
}

}  // namespace

// ---- spec serialization --------------------------------------------------------

json spec_to_json(const DomainSpec& spec) {
  json j;
  j["family"] = spec.family;
  j["weight"] = spec.weight.name;
  j["sheets"] = spec.sheets;
  j["symmetry_axes"] = spec.symmetry_axes;
  j["params"] = json::object();
  for (const auto& [k, v] : spec.params) j["params"][k] = v;
  j["curves"] = json::array();
  for (const auto& c : spec.curves) {
    json cj;
    cj["tag"] = tag_name(c.tag);
    if (c.kind == Curve::Kind::Segment) {
      cj["kind"] = "segment";
      cj["p0"] = {c.p0.x(), c.p0.y()};
      cj["p1"] = {c.p1.x(), c.p1.y()};
    } else {
      cj["kind"] = "arc";
      cj["center"] = {c.center.x(), c.center.y()};
      cj["radius"] = c.radius;
      cj["angle0"] = c.angle0;
      cj["angle1"] = c.angle1;
      cj["reversed"] = c.reversed;
    }
    j["curves"].push_back(cj);
  }
  if (spec.slit) {
    j["slit"] = {{"p0", {spec.slit->p0.x(), spec.slit->p0.y()}},
                 {"p1", {spec.slit->p1.x(), spec.slit->p1.y()}}};
  }
  return j;
}

DomainSpec spec_from_json(const json& j) {
  DomainSpec spec;
  spec.family = j.value("family", "");
  spec.weight = weight_from_string(j.value("weight", "flat"));
  spec.sheets = j.value("sheets", 1);
  if (j.contains("symmetry_axes"))
    spec.symmetry_axes = j["symmetry_axes"].get<std::vector<double>>();
  if (j.contains("params"))
    for (const auto& [k, v] : j["params"].items()) spec.params[k] = v.get<double>();
  for (const auto& cj : j.at("curves")) {
    const BoundaryTag tag = tag_from_string(cj.at("tag").get<std::string>());
    if (cj.at("kind") == "segment") {
      spec.curves.push_back(Curve::segment(Vec2(cj.at("p0")[0], cj.at("p0")[1]),
                                           Vec2(cj.at("p1")[0], cj.at("p1")[1]), tag));
    } else {
      Curve c = Curve::arc(Vec2(cj.at("center")[0], cj.at("center")[1]),
                           cj.at("radius").get<double>(), cj.at("angle0").get<double>(),
                           cj.at("angle1").get<double>(), tag);
      c.reversed = cj.value("reversed", false);
      spec.curves.push_back(c);
    }
  }
  if (j.contains("slit"))
    spec.slit = Curve::segment(Vec2(j["slit"]["p0"][0], j["slit"]["p0"][1]),
                               Vec2(j["slit"]["p1"][0], j["slit"]["p1"][1]),
                               BoundaryTag::Neumann);
  spec.validate();
  return spec;
}

// ---- mesh persistence -------------------------------------------------------------

void save_mesh(const std::filesystem::path& path, const Mesh& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_mesh: cannot open " + path.string());
  f << "zaremba-mesh 1\n";
  f << "vertices " << m.num_vertices() << " " << (m.is_cover() ? 1 : 0) << "\n";
  for (int i = 0; i < m.num_vertices(); ++i) {
    f << fmt17(m.vertices[i].x()) << " " << fmt17(m.vertices[i].y());
    if (m.is_cover()) f << " " << m.sheet_of_vertex[i];
    f << "\n";
  }
  f << "triangles " << m.num_triangles() << "\n";
  for (const auto& t : m.triangles) f << t[0] << " " << t[1] << " " << t[2] << "\n";
  f << "boundary " << m.boundary_edges.size() << "\n";
  for (const auto& be : m.boundary_edges)
    f << be.a << " " << be.b << " " << (be.tag == BoundaryTag::Dirichlet ? "D" : "N") << " "
      << be.curve << "\n";
  f << "axes " << m.reflection_axes.size() << "\n";
  for (double a : m.reflection_axes) f << fmt17(a) << "\n";
  f << "perms " << m.symmetry_perms.size() << "\n";
  for (const auto& p : m.symmetry_perms) {
    f << p.name << " " << p.map.size() << "\n";
    for (std::size_t i = 0; i < p.map.size(); ++i)
      f << p.map[i] << (i + 1 == p.map.size() ? "\n" : " ");
  }
  f << "spec " << spec_to_json(m.spec).dump() << "\n";
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_mesh: cannot open " + path.string());
  std::string word;
  int version;
  f >> word >> version;
  if (word != "zaremba-mesh" || version != 1)
    throw std::runtime_error("load_mesh: bad header");
  Mesh m;
  int n, is_cover;
  f >> word >> n >> is_cover;
  m.vertices.resize(n);
  if (is_cover) m.sheet_of_vertex.resize(n);
  for (int i = 0; i < n; ++i) {
    f >> m.vertices[i].x() >> m.vertices[i].y();
    if (is_cover) f >> m.sheet_of_vertex[i];
  }
  int nt;
  f >> word >> nt;
  m.triangles.resize(nt);
  for (auto& t : m.triangles) f >> t[0] >> t[1] >> t[2];
  int nb;
  f >> word >> nb;
  m.boundary_edges.resize(nb);
  for (auto& be : m.boundary_edges) {
    std::string tag;
    f >> be.a >> be.b >> tag >> be.curve;
    be.tag = tag == "D" ? BoundaryTag::Dirichlet : BoundaryTag::Neumann;
  }
  int na;
  f >> word >> na;
  m.reflection_axes.resize(na);
  for (double& a : m.reflection_axes) f >> a;
  int np;
  f >> word >> np;
  m.symmetry_perms.resize(np);
  for (auto& p : m.symmetry_perms) {
    std::size_t len;
    f >> p.name >> len;
    p.map.resize(len);
    for (auto& v : p.map) f >> v;
  }
  f >> word;
  std::string rest;
  std::getline(f, rest);
  m.spec = spec_from_json(json::parse(rest));
  m.validate(/*allow_interface_edges=*/true);
  return m;
}

void export_vtk(const std::filesystem::path& path, const Mesh& m,
                const Eigen::VectorXd* point_data, const std::string& data_name) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_vtk: cannot open " + path.string());
  f << "# vtk DataFile Version 3.0\n";
  f << "zaremba unstructured grid\n";
  f << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << m.num_vertices() << " double\n";
  for (const auto& v : m.vertices) f << fmt17(v.x()) << " " << fmt17(v.y()) << " 0\n";
  f << "CELLS " << m.num_triangles() << " " << 4 * m.num_triangles() << "\n";
  for (const auto& t : m.triangles) f << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  f << "CELL_TYPES " << m.num_triangles() << "\n";
  for (int i = 0; i < m.num_triangles(); ++i) f << "5\n";
  if (point_data) {
    f << "POINT_DATA " << m.num_vertices() << "\n";
    f << "SCALARS " << data_name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < m.num_vertices(); ++i) f << fmt17((*point_data)[i]) << "\n";
  }
}

// ---- SVG figures -----------------------------------------------------------------

namespace {

struct SvgFrame {
  double x0, y0, x1, y1, scale;
  int width, height;
  double px(double x) const { return (x - x0) * scale + 20; }
  double py(double y) const { return (y1 - y) * scale + 20; }
};

SvgFrame frame_for(const std::vector<Vec2>& pts, int width = 720) {
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  SvgFrame fr;
  fr.x0 = lo.x();
  fr.y0 = lo.y();
  fr.x1 = hi.x();
  fr.y1 = hi.y();
  const double w = std::max(hi.x() - lo.x(), 1e-9), h = std::max(hi.y() - lo.y(), 1e-9);
  fr.scale = (width - 40) / std::max(w, h);
  fr.width = (int)(w * fr.scale) + 40;
  fr.height = (int)(h * fr.scale) + 40;
  return fr;
}

std::vector<Vec2> curve_polyline(const Curve& c) {
  const int n = c.kind == Curve::Kind::Arc
                    ? std::max(8, (int)std::ceil((c.angle1 - c.angle0) / 0.03))
                    : 1;
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) pts.push_back(c.at((double)i / n));
  return pts;
}

void write_curve_path(std::ofstream& f, const SvgFrame& fr, const Curve& c) {
  const auto pts = curve_polyline(c);
  const bool d = c.tag == BoundaryTag::Dirichlet;
  f << "<path class=\"" << (d ? "dirichlet" : "neumann") << "\" d=\"M";
  for (const auto& p : pts) f << " " << fr.px(p.x()) << " " << fr.py(p.y());
  f << "\" fill=\"none\" stroke=\"" << (d ? "#c62828" : "#1565c0") << "\" stroke-width=\"3\""
    << (d ? "" : " stroke-dasharray=\"9,6\"") << "/>\n";
}

void svg_open(std::ofstream& f, const SvgFrame& fr) {
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fr.width << "\" height=\""
    << fr.height << "\" viewBox=\"0 0 " << fr.width << " " << fr.height << "\">\n";
}

}  // namespace

void export_svg_domain(const std::filesystem::path& path, const DomainSpec& spec) {
  std::vector<Vec2> pts;
  for (const auto& c : spec.curves)
    for (const auto& p : curve_polyline(c)) pts.push_back(p);
  const SvgFrame fr = frame_for(pts);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_svg_domain: cannot open " + path.string());
  svg_open(f, fr);
  for (const auto& c : spec.curves) write_curve_path(f, fr, c);
  f << "</svg>\n";
}

void export_svg_mesh(const std::filesystem::path& path, const Mesh& m) {
  const SvgFrame fr = frame_for(m.vertices);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_svg_mesh: cannot open " + path.string());
  svg_open(f, fr);
  for (const auto& t : m.triangles) {
    f << "<polygon points=\"";
    for (int k = 0; k < 3; ++k)
      f << fr.px(m.vertices[t[k]].x()) << "," << fr.py(m.vertices[t[k]].y()) << " ";
    f << "\" fill=\"none\" stroke=\"#9e9e9e\" stroke-width=\"0.5\"/>\n";
  }
  for (const auto& c : m.spec.curves) write_curve_path(f, fr, c);
  f << "</svg>\n";
}

void export_svg_mode(const std::filesystem::path& path, const Mesh& m,
                     const Eigen::VectorXd& full_values) {
  const SvgFrame fr = frame_for(m.vertices);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_svg_mode: cannot open " + path.string());
  svg_open(f, fr);
  const double vmax = std::max(1e-300, full_values.cwiseAbs().maxCoeff());
  for (const auto& t : m.triangles) {
    const double v =
        (full_values[t[0]] + full_values[t[1]] + full_values[t[2]]) / (3.0 * vmax);
    // blue-white-red diverging map
    const double s = std::clamp(v, -1.0, 1.0);
    const int r = (int)(255 * (s > 0 ? 1.0 : 1.0 + s));
    const int b = (int)(255 * (s < 0 ? 1.0 : 1.0 - s));
    const int g = (int)(255 * (1.0 - std::abs(s)));
    f << "<polygon points=\"";
    for (int k = 0; k < 3; ++k)
      f << fr.px(m.vertices[t[k]].x()) << "," << fr.py(m.vertices[t[k]].y()) << " ";
    f << "\" fill=\"rgb(" << r << "," << g << "," << b << ")\" stroke=\"none\"/>\n";
  }
  for (const auto& c : m.spec.curves) write_curve_path(f, fr, c);
  f << "</svg>\n";
}

void export_svg_nutable(const std::filesystem::path& path, const NuTable& table) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_svg_nutable: cannot open " + path.string());
  const int cell = 44, margin = 40;
  const int size = margin + table.max_index * cell + 10;
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
    << "\">\n";
  double lmin = 1e300, lmax = -1e300;
  for (const auto& c : table.cells)
    if (c.error.empty() && c.nu > 0) {
      lmin = std::min(lmin, std::log10(c.nu));
      lmax = std::max(lmax, std::log10(c.nu));
    }
  for (const auto& c : table.cells) {
    const double t = c.error.empty() && c.nu > 0 && lmax > lmin
                         ? (std::log10(c.nu) - lmin) / (lmax - lmin)
                         : 0.0;
    const int shade = (int)(235 - 210 * t);
    f << "<rect x=\"" << margin + (c.k - 1) * cell << "\" y=\"" << margin + (c.n - 1) * cell
      << "\" width=\"" << cell - 2 << "\" height=\"" << cell - 2 << "\" fill=\"rgb(255,"
      << shade << "," << shade << ")\"" << (c.trivial ? " stroke=\"#1565c0\"" : "")
      << "/>\n";
    f << "<text x=\"" << margin + (c.k - 1) * cell + 3 << "\" y=\""
      << margin + (c.n - 1) * cell + 24 << "\" font-size=\"10\">"
      << (c.error.empty() ? json(c.nu).dump().substr(0, 6) : std::string("err")) << "</text>\n";
  }
  f << "</svg>\n";
}

// ---- configs ---------------------------------------------------------------------

ExperimentConfig parse_config(const json& doc) {
  check_keys(doc, {"name", "task", "domain", "mesh", "solver", "task_params", "output"},
             "config");
  ExperimentConfig cfg;
  cfg.echo = doc;
  if (!doc.contains("name") || !doc["name"].is_string())
    throw ConfigError("config: 'name' (string) is required");
  cfg.name = doc["name"];
  static const std::set<std::string> tasks = {
      "solve", "compare", "sweep", "dtn-scan", "cover-check", "heat-fit", "symmetry-pair"};
  if (!doc.contains("task") || !tasks.count(doc["task"].get<std::string>()))
    throw ConfigError("config: 'task' must be one of solve/compare/sweep/dtn-scan/"
                      "cover-check/heat-fit/symmetry-pair");
  cfg.task = doc["task"];
  if (doc.contains("domain")) {
    cfg.domain = doc["domain"];
    if (!cfg.domain.contains("family")) throw ConfigError("domain: 'family' is required");
  } else if (cfg.task != "sweep" && cfg.task != "dtn-scan") {
    throw ConfigError("config: 'domain' is required for this task");
  }
  if (doc.contains("mesh")) {
    const json& mj = doc["mesh"];
    check_keys(mj, {"h", "levels", "kind", "seed", "nx", "ny"}, "mesh");
    cfg.mesh_h = mj.value("h", cfg.mesh_h);
    if (!(cfg.mesh_h > 0 && cfg.mesh_h <= 0.5))
      throw ConfigError("mesh: h must lie in (0, 0.5]");
    cfg.mesh_levels = mj.value("levels", 1);
    if (cfg.mesh_levels < 1 || cfg.mesh_levels > 2)
      throw ConfigError("mesh: levels must be 1 or 2");
    cfg.mesh_kind = mj.value("kind", cfg.mesh_kind);
    if (cfg.mesh_kind != "symmetric" && cfg.mesh_kind != "unstructured" &&
        cfg.mesh_kind != "structured")
      throw ConfigError("mesh: kind must be symmetric/unstructured/structured");
    cfg.mesh_seed = mj.value("seed", (std::uint64_t)1);
    cfg.structured_nx = mj.value("nx", cfg.structured_nx);
    cfg.structured_ny = mj.value("ny", cfg.structured_ny);
    if (cfg.structured_nx < 1 || cfg.structured_ny < 1)
      throw ConfigError("mesh: nx, ny must be positive");
  }
  if (doc.contains("solver")) {
    const json& sj = doc["solver"];
    check_keys(sj, {"count", "tol", "cluster_tol"}, "solver");
    cfg.solver_count = sj.value("count", cfg.solver_count);
    if (cfg.solver_count < 1) throw ConfigError("solver: count must be positive");
    cfg.solver_tol = sj.value("tol", cfg.solver_tol);
    if (cfg.solver_tol < 1e-12) throw ConfigError("solver: tol must be at least 1e-12");
    cfg.cluster_tol = sj.value("cluster_tol", cfg.cluster_tol);
  }
  if (doc.contains("task_params")) cfg.task_params = doc["task_params"];
  if (doc.contains("output")) cfg.output = doc["output"];
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc);
}

DomainSpec build_domain(const json& domain) {
  const std::string family = domain.at("family");
  if (family == "half_disk") {
    check_keys(domain, {"family", "variant", "weight"}, "domain");
    const int variant = domain.value("variant", 1);
    if (variant != 1 && variant != 2) throw ConfigError("half_disk: variant must be 1 or 2");
    return build_half_disk(variant, weight_from_string(domain.value("weight", "flat")));
  }
  if (family == "disk") {
    check_keys(domain, {"family", "tag"}, "domain");
    return build_disk(tag_from_string(domain.value("tag", "dirichlet")));
  }
  if (family == "alternating_disk") {
    check_keys(domain, {"family"}, "domain");
    return build_alternating_disk();
  }
  if (family == "double_cover") {
    check_keys(domain, {"family"}, "domain");
    return build_double_cover(build_alternating_disk());
  }
  if (family == "disk_partition") {
    check_keys(domain, {"family", "k", "n", "swapped"}, "domain");
    const int k = domain.at("k"), n = domain.at("n");
    if (k < 1 || n < 1 || k > 12 || n > 12)
      throw ConfigError("disk_partition: k, n must lie in 1..12");
    auto [a, b] = build_disk_partition(k * kPi / 24, n * kPi / 24);
    return domain.value("swapped", false) ? b : a;
  }
  if (family == "sectorial") {
    check_keys(domain, {"family", "example", "swapped"}, "domain");
    const std::string ex = domain.value("example", "half_disk");
    SectorialBlock b;
    b.alpha = kPi / 4;
    b.z1 = Vec2(1, 0);
    if (ex == "half_disk") {
      b.z2 = Vec2(std::cos(kPi / 4), std::sin(kPi / 4));
      b.gamma = {Curve::arc(Vec2(0, 0), 1.0, 0.0, kPi / 4, BoundaryTag::Neumann)};
      b.piece_part = {2};
    } else if (ex == "triangle") {
      b.z2 = Vec2(0.5, 0.5);
      b.gamma = {Curve::segment(b.z1, b.z2, BoundaryTag::Neumann)};
      b.piece_part = {2};
    } else if (ex == "rectangle") {
      b.z2 = Vec2(1, 1);
      b.gamma = {Curve::segment(b.z1, b.z2, BoundaryTag::Neumann)};
      b.piece_part = {1};
    } else {
      throw ConfigError("sectorial: example must be half_disk/triangle/rectangle");
    }
    return build_sectorial_domain(b, domain.value("swapped", false));
  }
  if (family == "rectangle") {
    check_keys(domain, {"family", "x0", "y0", "x1", "y1", "tags"}, "domain");
    const auto& tj = domain.at("tags");
    if (!tj.is_array() || tj.size() != 4)
      throw ConfigError("rectangle: tags must list [bottom, right, top, left]");
    return build_rectangle(domain.value("x0", 0.0), domain.value("y0", 0.0),
                           domain.value("x1", 1.0), domain.value("y1", 1.0),
                           tag_from_string(tj[0]), tag_from_string(tj[1]),
                           tag_from_string(tj[2]), tag_from_string(tj[3]));
  }
  throw ConfigError("unknown domain family '" + family + "'");
}

std::pair<DomainSpec, DomainSpec> build_domain_pair(const json& domain) {
  const std::string family = domain.at("family");
  if (family == "quarter_sphere_pair") {
    check_keys(domain, {"family", "variant"}, "domain");
    const int variant = domain.value("variant", 1);
    HalfInput half;
    half.axis_point = Vec2(0, 0);
    half.axis_dir = Vec2(0, 1);
    half.weight = MetricWeight::spherical();
    const BoundaryTag arc_tag =
        variant == 1 ? BoundaryTag::Dirichlet : BoundaryTag::Neumann;
    const BoundaryTag seg_tag = swap_tag(arc_tag);
    half.chain = {Curve::segment(Vec2(0, 0), Vec2(1, 0), seg_tag),
                  Curve::arc(Vec2(0, 0), 1.0, 0.0, kPi / 2, arc_tag)};
    return build_symmetry_pair(half);
  }
  if (family == "square_pair") {
    check_keys(domain, {"family", "right", "top", "left"}, "domain");
    HalfInput half;
    half.axis_point = Vec2(0, 0);
    half.axis_dir = Vec2(1, 0);
    half.chain = {
        Curve::segment(Vec2(1, 0), Vec2(1, 1),
                       tag_from_string(domain.value("right", "neumann"))),
        Curve::segment(Vec2(1, 1), Vec2(0, 1), tag_from_string(domain.value("top", "neumann"))),
        Curve::segment(Vec2(0, 1), Vec2(0, 0),
                       tag_from_string(domain.value("left", "neumann"))),
    };
    return build_symmetry_pair(half);
  }
  if (family == "disk_partition") {
    check_keys(domain, {"family", "k", "n"}, "domain");
    const int k = domain.at("k"), n = domain.at("n");
    if (k < 1 || n < 1 || k > 12 || n > 12)
      throw ConfigError("disk_partition: k, n must lie in 1..12");
    return build_disk_partition(k * kPi / 24, n * kPi / 24);
  }
  if (family == "half_disk") {
    check_keys(domain, {"family", "weight", "variant"}, "domain");
    const auto w = weight_from_string(domain.value("weight", "flat"));
    return {build_half_disk(1, w), build_half_disk(2, w)};
  }
  if (family == "sectorial") {
    json d1 = domain;
    d1["swapped"] = false;
    json d2 = domain;
    d2["swapped"] = true;
    return {build_domain(d1), build_domain(d2)};
  }
  throw ConfigError("domain family '" + family + "' does not define a problem pair");
}

std::vector<std::string> experiment_catalog() {
  return {
      "theorem1_halfdisk",    "theorem1_continuum",  "theorem2_triangle",
      "theorem2_rectangle",   "figure6_quartersphere", "quartersphere_conj2",
      "figure12_symmetry_pair", "symmetry_pair_equality", "disk_sweep",
      "dtn_scan",             "cover_check",         "heat_balance",
  };
}

// ---- runner ------------------------------------------------------------------------

namespace {

struct Timings {
  json j = json::object();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  void mark(const std::string& name) {
    const auto t1 = std::chrono::steady_clock::now();
    j[name] = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    t0 = t1;
  }
};

Mesh make_mesh(const ExperimentConfig& cfg, const DomainSpec& spec) {
  if (cfg.mesh_kind == "symmetric") {
    if (spec.sheets == 2) return build_cover_mesh(spec, cfg.mesh_h);
    if (spec.symmetry_axes.empty())
      throw ConfigError("mesh: kind 'symmetric' needs a domain with symmetry axes");
    return mesh_symmetric(spec, cfg.mesh_h);
  }
  if (cfg.mesh_kind == "structured")
    return mesh_structured_rectangle(spec, cfg.structured_nx, cfg.structured_ny);
  return mesh_unstructured(spec, cfg.mesh_h, cfg.mesh_seed);
}

json spectrum_to_json(const Spectrum& s) {
  json j;
  j["values"] = s.values;
  j["residuals"] = s.residuals;
  json clusters = json::array();
  for (const auto& [v, m] : cluster_multiplicities(s))
    clusters.push_back({{"value", v}, {"multiplicity", m}});
  j["clusters"] = clusters;
  return j;
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
  std::ofstream f(path);
  f << "index,value,residual,cluster\n";
  const auto clusters = cluster_multiplicities(s);
  std::size_t ci = 0, consumed = 0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (ci < clusters.size() && consumed == (std::size_t)clusters[ci].second) {
      ++ci;
      consumed = 0;
    }
    ++consumed;
    f << i << "," << fmt17(s.values[i]) << "," << fmt17(s.residuals[i]) << "," << ci << "\n";
  }
}

std::vector<char> swapped_dirichlet(const Mesh& mesh) {
  std::vector<char> d(mesh.num_vertices(), 0);
  for (const auto& be : mesh.boundary_edges)
    if (be.tag == BoundaryTag::Neumann) d[be.a] = d[be.b] = 1;
  return d;
}

// spectrum pair + optional transplantation on one shared symmetric mesh
json run_compare_exact(const ExperimentConfig& cfg, const DomainSpec& spec,
                       const std::filesystem::path& dir, Timings& tm) {
  const Mesh mesh = make_mesh(cfg, spec);
  save_mesh(dir / "mesh.txt", mesh);
  tm.mark("mesh");
  const FullSystem full = assemble_full(mesh, spec.weight);
  const auto p1 = constrain(full, dirichlet_vertices(mesh));
  const auto p2 = constrain(full, swapped_dirichlet(mesh));
  EigOptions opts;
  opts.tol = cfg.solver_tol;
  opts.cluster_tol = cfg.cluster_tol;
  auto [s1, b1] = solve_lowest(p1, cfg.solver_count, opts);
  auto [s2, b2] = solve_lowest(p2, cfg.solver_count, opts);
  tm.mark("solve");
  auto [nu, diffs] = compare_spectra(s1, s2, cfg.solver_count);
  json res;
  res["problem_I"] = spectrum_to_json(s1);
  res["problem_II"] = spectrum_to_json(s2);
  res["nu"] = nu;
  res["diffs"] = diffs;
  write_spectrum_csv(dir / "spectrum_I.csv", s1);
  write_spectrum_csv(dir / "spectrum_II.csv", s2);
  if (!mesh.reflection_axes.empty()) {
    const auto T = build_transplant(mesh, true);
    const auto rep = verify_transplantation(p1, p2, s1, b1, T,
                                            cfg.task_params.value("transplant_tol", 1e-9));
    json modes = json::array();
    for (const auto& r : rep.modes)
      modes.push_back({{"mode", r.mode},
                       {"lambda", r.lambda},
                       {"residual", r.residual},
                       {"constraint_violation", r.constraint_violation},
                       {"norm_defect", r.norm_defect}});
    res["transplantation"] = {{"pass", rep.pass},
                              {"tol", rep.tol},
                              {"geometric_defect", T.geometric_defect},
                              {"modes", modes}};
    tm.mark("transplant");
  }
  return res;
}

// independent unsymmetric meshes for the two problems, Richardson-extrapolated
json run_compare_continuum(const ExperimentConfig& cfg, const DomainSpec& spec,
                           const std::filesystem::path& dir, Timings& tm) {
  EigOptions opts;
  opts.tol = cfg.solver_tol;
  opts.cluster_tol = cfg.cluster_tol;
  json res;
  std::vector<std::vector<double>> extrapolated(2);
  for (int prob = 0; prob < 2; ++prob) {
    const Mesh coarse = mesh_unstructured(spec, cfg.mesh_h, cfg.mesh_seed + prob);
    std::vector<std::array<int, 2>> parents;
    const Mesh fine = refine_uniform(coarse, &parents);
    save_mesh(dir / ("mesh_" + std::to_string(prob) + "_h.txt"), coarse);
    save_mesh(dir / ("mesh_" + std::to_string(prob) + "_h2.txt"), fine);
    const FullSystem fc = assemble_full(coarse, spec.weight);
    const FullSystem ff = assemble_full(fine, spec.weight);
    const auto dc = prob == 0 ? dirichlet_vertices(coarse) : swapped_dirichlet(coarse);
    const auto df = prob == 0 ? dirichlet_vertices(fine) : swapped_dirichlet(fine);
    const auto pc = constrain(fc, dc);
    const auto pf = constrain(ff, df);
    auto [sc, bc] = solve_lowest(pc, cfg.solver_count, opts);
    auto [sf, bf] = solve_lowest(pf, cfg.solver_count, opts);
    const auto rich = richardson(sc, bc, pc, sf, bf, pf, parents);
    extrapolated[prob] = rich.values;
    const std::string key = prob == 0 ? "problem_I" : "problem_II";
    res[key] = {{"coarse", sc.values},
                {"fine", sf.values},
                {"extrapolated", rich.values},
                {"error_estimates", rich.error_estimates},
                {"overlaps", rich.overlaps},
                {"aligned", rich.aligned}};
  }
  tm.mark("solve");
  json diffs = json::array();
  double worst_rel = 0;
  for (int i = 0; i < cfg.solver_count; ++i) {
    const double d = extrapolated[0][i] - extrapolated[1][i];
    const double rel = std::abs(d) / std::max(1e-12, std::abs(extrapolated[0][i]));
    worst_rel = std::max(worst_rel, rel);
    diffs.push_back({{"mode", i},
                     {"problem_I", extrapolated[0][i]},
                     {"problem_II", extrapolated[1][i]},
                     {"rel_diff", rel}});
  }
  res["comparison"] = diffs;
  res["worst_rel_diff"] = worst_rel;
  return res;
}

json run_solve(const ExperimentConfig& cfg, const std::filesystem::path& dir, Timings& tm) {
  const DomainSpec spec = build_domain(cfg.domain);
  const Mesh mesh = make_mesh(cfg, spec);
  save_mesh(dir / "mesh.txt", mesh);
  tm.mark("mesh");
  EigOptions opts;
  opts.tol = cfg.solver_tol;
  opts.cluster_tol = cfg.cluster_tol;
  json res;
  res["domain"] = spec_to_json(spec);
  const auto p1 = assemble(mesh, spec.weight);
  auto [s1, b1] = solve_lowest(p1, cfg.solver_count, opts);
  res["spectrum"] = spectrum_to_json(s1);
  write_spectrum_csv(dir / "spectrum.csv", s1);
  if (cfg.mesh_levels == 2) {
    std::vector<std::array<int, 2>> parents;
    const Mesh fine = refine_uniform(mesh, &parents);
    save_mesh(dir / "mesh_h2.txt", fine);
    const auto p2 = assemble(fine, spec.weight);
    auto [s2, b2] = solve_lowest(p2, cfg.solver_count, opts);
    const auto rich = richardson(s1, b1, p1, s2, b2, p2, parents);
    res["spectrum_fine"] = spectrum_to_json(s2);
    res["extrapolated"] = rich.values;
    res["error_estimates"] = rich.error_estimates;
    res["aligned"] = rich.aligned;
  }
  tm.mark("solve");
  return res;
}

json run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir, Timings& tm,
               int threads) {
  const int eigencount = cfg.task_params.value("eigencount", 3);
  const NuTable table = sweep_disk(cfg.mesh_h, eigencount, cfg.mesh_seed, threads);
  tm.mark("sweep");
  json cells = json::array();
  for (const auto& c : table.cells) {
    json cj = {{"k", c.k}, {"n", c.n}, {"nu", c.nu}, {"trivial", c.trivial}};
    cj["diffs"] = c.diffs;
    if (!c.error.empty()) cj["error"] = c.error;
    cells.push_back(cj);
  }
  json res;
  res["cells"] = cells;
  res["eigencount"] = table.eigencount;
  res["h"] = table.h;
  res["max_trivial_nu"] = table.max_trivial();
  res["min_nontrivial_nu"] = table.min_nontrivial();
  // the argmin over nontrivial cells
  int bk = 0, bn = 0;
  double best = std::numeric_limits<double>::max();
  for (const auto& c : table.cells)
    if (!c.trivial && c.error.empty() && c.nu < best) {
      best = c.nu;
      bk = c.k;
      bn = c.n;
    }
  res["argmin_nontrivial"] = {bk, bn};
  std::ofstream csv(dir / "nutable.csv");
  csv << "k,n,nu,trivial\n";
  for (const auto& c : table.cells)
    csv << c.k << "," << c.n << "," << fmt17(c.nu) << "," << (c.trivial ? 1 : 0) << "\n";
  export_svg_nutable(dir / "nutable.svg", table);
  return res;
}

json run_dtn_scan(const ExperimentConfig& cfg, const std::filesystem::path& dir, Timings& tm) {
  const int n_modes = cfg.task_params.value("modes", 5);
  const int grid = cfg.task_params.value("grid", 160);
  QuarterGeometry geo = build_quarter_geometry(cfg.mesh_h);
  save_mesh(dir / "quarter_mesh.txt", geo.mesh);

  // direct eigenvalues of the folded problem: reflect the quarter into the
  // half-disk and retag as problem I
  Mesh half = mesh_by_reflection(geo.mesh, {kPi / 2});
  retag_mesh(half, build_half_disk(1, MetricWeight::flat()));
  const auto pair = assemble(half, MetricWeight::flat());
  EigOptions opts;
  opts.tol = cfg.solver_tol;
  auto [direct, basis] = solve_lowest(pair, n_modes, opts);
  tm.mark("direct");

  const double lo = cfg.task_params.value("window_lo", 0.5 * direct.values.front());
  const double hi = cfg.task_params.value("window_hi", 1.05 * direct.values.back());
  DtnFactory factory(std::move(geo), hi * 1.2);
  const ScanResult scan = scan_crossings(factory, lo, hi, grid);
  tm.mark("scan");

  std::ofstream csv(dir / "scan.csv");
  csv << "lambda,sign,log_abs_det,admissible\n";
  for (const auto& s : scan.samples)
    csv << fmt17(s.lambda) << "," << s.sign << "," << fmt17(s.log_abs) << ","
        << (s.admissible ? 1 : 0) << "\n";

  json res;
  res["direct_eigenvalues"] = direct.values;
  res["crossings"] = scan.crossings;
  json gaps = json::array();
  for (const auto& [a, b] : scan.flagged_gaps) gaps.push_back({a, b});
  res["flagged_gaps"] = gaps;
  json match = json::array();
  double worst = 0;
  for (double lam : direct.values) {
    double best = std::numeric_limits<double>::max();
    double at = 0;
    for (double c : scan.crossings)
      if (std::abs(c - lam) < best) {
        best = std::abs(c - lam);
        at = c;
      }
    const double rel = best / lam;
    worst = std::max(worst, rel);
    match.push_back({{"direct", lam}, {"crossing", at}, {"rel_err", rel}});
  }
  res["matching"] = match;
  res["worst_rel_err"] = worst;
  res["extra_crossings"] = (int)scan.crossings.size() - (int)direct.values.size();
  return res;
}

json run_cover_check(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                     Timings& tm) {
  const int clusters_wanted = cfg.task_params.value("clusters", 8);
  const DomainSpec cover = build_double_cover(build_alternating_disk());
  const Mesh cm = build_cover_mesh(cover, cfg.mesh_h);
  save_mesh(dir / "cover_mesh.txt", cm);
  const FullSystem full = assemble_full(cm, cover.weight);
  const auto dirichlet = dirichlet_vertices(cm);
  const auto* T = cm.find_perm("sheet_swap");
  if (!T) throw std::runtime_error("cover mesh lacks the sheet swap permutation");
  EigOptions opts;
  opts.tol = cfg.solver_tol;
  opts.cluster_tol = cfg.cluster_tol;
  const int count_odd = 2 * clusters_wanted + 6;
  const Spectrum odd = cover_subspace_spectrum(full, dirichlet, *T, count_odd, true, opts);
  const Spectrum even =
      cover_subspace_spectrum(full, dirichlet, *T, clusters_wanted + 2, false, opts);
  tm.mark("cover");

  // sigma_I on the half-disk at the same resolution
  const DomainSpec hd = build_half_disk(1, MetricWeight::flat());
  const Mesh hm = mesh_symmetric(hd, cfg.mesh_h);
  const auto hp = assemble(hm, hd.weight);
  auto [sI, bI] = solve_lowest(hp, clusters_wanted + 4, opts);
  tm.mark("direct");

  const auto odd_clusters = cluster_multiplicities(odd);
  const auto i_clusters = cluster_multiplicities(sI);
  json rows = json::array();
  double worst = 0;
  bool mult_ok = true;
  for (int c = 0; c < clusters_wanted; ++c) {
    if (c >= (int)odd_clusters.size() || c >= (int)i_clusters.size()) {
      mult_ok = false;
      break;
    }
    const double rel = std::abs(odd_clusters[c].first - i_clusters[c].first) /
                       std::max(1e-12, i_clusters[c].first);
    worst = std::max(worst, rel);
    if (odd_clusters[c].second != 2 * i_clusters[c].second) mult_ok = false;
    rows.push_back({{"cluster", c},
                    {"sigma_minus", odd_clusters[c].first},
                    {"sigma_minus_mult", odd_clusters[c].second},
                    {"sigma_I", i_clusters[c].first},
                    {"sigma_I_mult", i_clusters[c].second},
                    {"rel_diff", rel}});
  }
  json res;
  res["clusters"] = rows;
  res["worst_rel_diff"] = worst;
  res["multiplicities_doubled"] = mult_ok;
  res["even_first"] = even.values.front();
  res["odd_first"] = odd.values.front();
  res["even_differs"] =
      std::abs(even.values.front() - odd.values.front()) /
          std::max(1.0, odd.values.front()) >
      1e-2;
  return res;
}

json run_heat_fit(const ExperimentConfig& cfg, const std::filesystem::path& dir, Timings& tm) {
  const DomainSpec spec = build_domain(cfg.domain);
  const int modes = cfg.task_params.value("modes", 200);
  const double t_hi = cfg.task_params.value("t_hi", 0.5);
  ExperimentConfig solve_cfg = cfg;
  solve_cfg.solver_count = modes;
  const Mesh coarse = make_mesh(solve_cfg, spec);
  std::vector<std::array<int, 2>> parents;
  const Mesh fine = refine_uniform(coarse, &parents);
  save_mesh(dir / "mesh.txt", coarse);
  EigOptions opts;
  opts.tol = std::max(cfg.solver_tol, 1e-10);
  const auto pc = assemble(coarse, spec.weight);
  const auto pf = assemble(fine, spec.weight);
  auto [sc, bc] = solve_lowest(pc, modes, opts);
  auto [sf, bf] = solve_lowest(pf, modes, opts);
  const auto rich = richardson(sc, bc, pc, sf, bf, pf, parents);
  tm.mark("solve");

  Spectrum extrap;
  extrap.values = rich.values;
  extrap.residuals.assign(rich.values.size(), 0.0);
  // Richardson-extrapolated discrete area (1^T M 1 at both levels)
  const FullSystem fc = assemble_full(coarse, spec.weight);
  const FullSystem ff = assemble_full(fine, spec.weight);
  const double area_c =
      Eigen::VectorXd::Ones(coarse.num_vertices()).dot(fc.M * Eigen::VectorXd::Ones(coarse.num_vertices()));
  const double area_f =
      Eigen::VectorXd::Ones(fine.num_vertices()).dot(ff.M * Eigen::VectorXd::Ones(fine.num_vertices()));
  const double area = (4 * area_f - area_c) / 3.0;
  const HeatFit fit = heat_fit(extrap, area, t_hi);
  tm.mark("fit");

  const auto [ld, ln] = boundary_lengths(spec);
  json res;
  res["area"] = area;
  res["modes"] = fit.modes;
  res["window"] = {fit.t_lo, fit.t_hi};
  res["c"] = fit.c;
  res["implied_imbalance"] = fit.implied_imbalance;
  res["expected_imbalance"] = ln - ld;
  res["fit_residual"] = fit.residual;
  res["L_D"] = ld;
  res["L_N"] = ln;
  return res;
}

json run_symmetry_pair(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                       Timings& tm) {
  auto [axi, cen] = build_domain_pair(cfg.domain);
  EigOptions opts;
  opts.tol = cfg.solver_tol;
  auto first_eig = [&](const DomainSpec& spec, const std::string& label) {
    ExperimentConfig c2 = cfg;
    if (spec.symmetry_axes.empty()) c2.mesh_kind = "unstructured";
    const Mesh coarse = make_mesh(c2, spec);
    std::vector<std::array<int, 2>> parents;
    const Mesh fine = refine_uniform(coarse, &parents);
    save_mesh(dir / ("mesh_" + label + ".txt"), coarse);
    const auto pc = assemble(coarse, spec.weight);
    const auto pf = assemble(fine, spec.weight);
    auto [sc, bc] = solve_lowest(pc, 1, opts);
    auto [sf, bf] = solve_lowest(pf, 1, opts);
    const auto rich = richardson(sc, bc, pc, sf, bf, pf, parents);
    return std::pair<double, double>(rich.values[0], rich.error_estimates[0]);
  };
  const auto [lam_a, err_a] = first_eig(axi, "axisymmetric");
  const auto [lam_c, err_c] = first_eig(cen, "central");
  tm.mark("solve");
  json res;
  res["axisymmetric"] = {{"lambda1", lam_a}, {"error_estimate", err_a},
                         {"domain", spec_to_json(axi)}};
  res["central"] = {{"lambda1", lam_c}, {"error_estimate", err_c},
                    {"domain", spec_to_json(cen)}};
  res["margin"] = lam_c - lam_a;
  res["margin_exceeds_errors"] = (lam_c - lam_a) > (err_a + err_c);
  res["equal_within_errors"] = std::abs(lam_c - lam_a) <= (err_a + err_c + 1e-12);
  if (cfg.task_params.value("with_conjecture2", false)) {
    const auto [lam_q, err_q] = first_eig(build_half_disk(1, MetricWeight::spherical()), "Q");
    res["Q"] = {{"lambda1", lam_q}, {"error_estimate", err_q}};
    res["conjecture2_margin"] = lam_q - lam_a;
  }
  tm.mark("extras");
  return res;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         int threads) {
  // build the domain first so config-level errors precede any file output
  if (cfg.task == "compare" || cfg.task == "solve" || cfg.task == "heat-fit")
    (void)build_domain(cfg.domain);
  if (cfg.task == "symmetry-pair") (void)build_domain_pair(cfg.domain);

  const std::filesystem::path dir =
      (cfg.output.empty() ? out_dir : std::filesystem::path(cfg.output)) / cfg.name;
  std::filesystem::create_directories(dir);

  Timings tm;
  json results;
  if (cfg.task == "solve") {
    results = run_solve(cfg, dir, tm);
  } else if (cfg.task == "compare") {
    const std::string mode = cfg.task_params.value("mode", "exact");
    const DomainSpec spec = build_domain(cfg.domain);
    if (const auto imbalance = length_balance_violation(spec)) {
      results["skipped"] = "not isospectral by Proposition 2";
      results["length_imbalance"] = *imbalance;
    } else if (mode == "continuum") {
      results = run_compare_continuum(cfg, spec, dir, tm);
    } else {
      results = run_compare_exact(cfg, spec, dir, tm);
    }
  } else if (cfg.task == "sweep") {
    results = run_sweep(cfg, dir, tm, threads);
  } else if (cfg.task == "dtn-scan") {
    results = run_dtn_scan(cfg, dir, tm);
  } else if (cfg.task == "cover-check") {
    results = run_cover_check(cfg, dir, tm);
  } else if (cfg.task == "heat-fit") {
    results = run_heat_fit(cfg, dir, tm);
  } else if (cfg.task == "symmetry-pair") {
    results = run_symmetry_pair(cfg, dir, tm);
  } else {
    throw ConfigError("unknown task " + cfg.task);
  }

  json bundle;
  bundle["tool_version"] = kToolVersion;
  bundle["config"] = cfg.echo;
  bundle["results"] = results;
  bundle["timings_ms"] = tm.j;

  RunResult rr;
  rr.bundle = bundle;
  rr.bundle_path = dir / "bundle.json";
  std::ofstream f(rr.bundle_path);
  f << bundle.dump(2) << "\n";
  return rr;
}

}  // namespace zaremba
