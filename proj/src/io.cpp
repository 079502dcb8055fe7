// Config, surface and report files (JSON), OBJ meshes, Pfaffian scans.
#include "willmore/io.hpp"

#include <cstdio>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace willmore {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorKind::Io, "schema: " + msg); }

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Io, std::string("malformed JSON: ") + e.what());
  }
}

json cjson(cd z) { return json::array({z.real(), z.imag()}); }

cd cparse(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  schema(what + " must be a number or [re, im]");
}

double dparse(const json& j, const std::string& what) {
  if (!j.is_number()) schema(what + " must be a number");
  return j.get<double>();
}

json vec3json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3parse(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) schema(what + " must be [x, y, z]");
  return {dparse(j[0], what), dparse(j[1], what), dparse(j[2], what)};
}

json cvecjson(const VecC& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(cjson(v(i)));
  return a;
}

VecC cvecparse(const json& j, const std::string& what) {
  if (!j.is_array()) schema(what + " must be an array");
  VecC v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = cparse(j[i], what);
  return v;
}

json ends_json(const EndConfiguration& c) {
  json a = json::array({"inf"});
  for (cd p : c.finite) a.push_back(cjson(p));
  return a;
}

EndConfiguration ends_parse(const json& j) {
  if (!j.is_array() || j.empty()) schema("ends must be a non-empty array");
  if (!(j[0].is_string() && j[0].get<std::string>() == "inf")) schema("ends must start with \"inf\"");
  EndConfiguration c;
  for (std::size_t i = 1; i < j.size(); ++i) {
    if (j[i].is_string()) schema("only the first end may be \"inf\"");
    c.finite.push_back(cparse(j[i], "end position"));
  }
  return c;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) schema(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) schema("unknown key \"" + it.key() + "\" in " + where);
}

void check_version(const json& j) {
  if (!j.contains("schema_version")) schema("missing schema_version");
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
    schema("unsupported schema_version");
}

json tol_json(const Tolerances& t) {
  return {{"rank", t.rank}, {"quadrature", t.quadrature}, {"solver", t.solver}, {"assembly", t.assembly}};
}

Tolerances tol_parse(const json& j) {
  check_keys(j, {"rank", "quadrature", "solver", "assembly"}, "tolerances");
  Tolerances t;
  if (j.contains("rank")) t.rank = dparse(j["rank"], "tolerances.rank");
  if (j.contains("quadrature")) t.quadrature = dparse(j["quadrature"], "tolerances.quadrature");
  if (j.contains("solver")) t.solver = dparse(j["solver"], "tolerances.solver");
  if (j.contains("assembly")) t.assembly = dparse(j["assembly"], "tolerances.assembly");
  for (double v : {t.rank, t.quadrature, t.solver, t.assembly})
    if (!(v > 0.0)) schema("tolerances must be positive");
  return t;
}

Eigen::Matrix3d quarter_turn() {
  Eigen::Matrix3d S;
  S << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  return S;
}

}  // namespace

std::string content_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- config and solve

RunConfig parse_config(const std::string& text) {
  json j = parse_json(text);
  check_keys(j, {"schema_version", "ends", "normalize", "coefficients", "base", "tolerances", "output"}, "config");
  check_version(j);
  RunConfig c;
  if (!j.contains("ends")) schema("missing ends");
  c.ends = ends_parse(j["ends"]);
  if (j.contains("normalize")) {
    if (!j["normalize"].is_boolean()) schema("normalize must be a boolean");
    c.normalize = j["normalize"].get<bool>();
  }
  if (j.contains("coefficients")) {
    const json& co = j["coefficients"];
    check_keys(co, {"mode", "a", "b"}, "coefficients");
    if (!co.contains("mode") || !co["mode"].is_string()) schema("coefficients.mode must be a string");
    c.mode = co["mode"].get<std::string>();
    if (c.mode == "explicit" || c.mode == "kernel") {
      if (!co.contains("a") || !co.contains("b")) schema("coefficients." + c.mode + " needs a and b");
      c.a = cvecparse(co["a"], "coefficients.a");
      c.b = cvecparse(co["b"], "coefficients.b");
    } else if (c.mode != "search-symmetric") {
      schema("coefficients.mode must be explicit, kernel or search-symmetric");
    }
  }
  if (j.contains("base")) c.base = vec3parse(j["base"], "base");
  if (j.contains("tolerances")) c.tol = tol_parse(j["tolerances"]);
  return c;
}

SurfaceRecord surface_from_vectors(const EndConfiguration& cfg, const VecC& a, const VecC& b, const Vec3& base,
                                   const Tolerances& tol) {
  cfg.validate();
  MatC M = build_end_matrix(cfg);
  KernelBasis kb = kernel_basis(M, tol.rank);
  if (kb.dimension == 0) fail("trivial kernel");
  WeierstrassSurface ws = assemble_weierstrass(cfg, a, b, tol.assembly);
  SurfaceRecord r;
  r.ends = cfg;
  r.ahat = a;
  r.bhat = b;
  r.base = base;
  r.method = "explicit";
  r.tol = tol;
  r.kernel_dimension = kb.dimension;
  if (cfg.m() % 2 == 0) r.pfaffian = pfaffian(M);
  r.kernel_residual = ws.kernel_residual;
  r.max_planar_condition = ws.max_planar_condition;
  r.max_residue = ws.max_residue;
  r.coprime_measure = ws.coprime_measure;
  r.min_end_value = ws.min_end_value;
  return r;
}

SurfaceRecord symmetric_surface(const EndConfiguration& cfg, const Tolerances& tol) {
  cfg.validate();
  if (cfg.m() != 4) fail("symmetric search supports m = 4 only");
  KernelBasis kb = kernel_basis(build_end_matrix(cfg), tol.rank);
  if (kb.dimension == 0) fail("trivial kernel");
  KernelPair kp = tetrahedral_member(cfg, kb);
  MinimalImmersion im0(assemble_weierstrass(cfg, kp.ahat, kp.bhat, tol.assembly));
  Eigen::Matrix3d S = quarter_turn();
  std::vector<int> cyc = end_cycle_from_normals(normal_span(im0, tol.rank).normals, S);
  if (cyc.empty()) fail("no quarter-turn cycle of end normals");
  std::optional<SurfaceRecord> best;
  for (bool conj : {true, false}) {
    auto s = end_cycle_chart_map(cfg, cyc, conj);
    if (!s) continue;
    EquivariantMember em = equivariant_member(cfg, kp, S, *s);
    SurfaceRecord r = surface_from_vectors(cfg, em.pair.ahat, em.pair.bhat, em.base, tol);
    MinimalImmersion im = build_immersion(r);
    SymmetryData sd{S, *s, cyc, symmetry_residual(im, S, *s, cyc)};
    r.symmetry = sd;
    r.method = "search-symmetric";
    if (!best || sd.residual.immersion < best->symmetry->residual.immersion) best = r;
  }
  if (!best) fail("no chart map realizes the end cycle");
  return *best;
}

SurfaceRecord solve_surface(const RunConfig& c) {
  EndConfiguration cfg = c.ends;
  cfg.validate();
  if (c.normalize) cfg = cfg.normalized();
  if (c.mode == "search-symmetric") return symmetric_surface(cfg, c.tol);
  if (c.mode == "kernel") {
    KernelBasis kb = kernel_basis(build_end_matrix(cfg), c.tol.rank);
    if (kb.dimension == 0) fail("trivial kernel");
    if (c.a.size() != kb.dimension || c.b.size() != kb.dimension)
      fail("kernel coordinates must have length " + std::to_string(kb.dimension));
    VecC a = VecC::Zero(cfg.m()), b = VecC::Zero(cfg.m());
    for (int k = 0; k < kb.dimension; ++k) {
      a += c.a(k) * kb.vectors[k];
      b += c.b(k) * kb.vectors[k];
    }
    SurfaceRecord r = surface_from_vectors(cfg, a, b, c.base, c.tol);
    r.method = "kernel";
    return r;
  }
  return surface_from_vectors(cfg, c.a, c.b, c.base, c.tol);
}

MinimalImmersion build_immersion(const SurfaceRecord& s) {
  return MinimalImmersion(assemble_weierstrass(s.ends, s.ahat, s.bhat, s.tol.assembly), s.base);
}

std::string surface_to_json(const SurfaceRecord& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["ends"] = ends_json(s.ends);
  j["a"] = cvecjson(s.ahat);
  j["b"] = cvecjson(s.bhat);
  j["base"] = vec3json(s.base);
  j["method"] = s.method;
  j["tolerances"] = tol_json(s.tol);
  json d;
  d["kernel_dimension"] = s.kernel_dimension;
  if (s.pfaffian) d["pfaffian"] = cjson(*s.pfaffian);
  d["kernel_residual"] = s.kernel_residual;
  d["max_planar_condition"] = s.max_planar_condition;
  d["max_residue"] = s.max_residue;
  d["coprime_measure"] = s.coprime_measure;
  d["min_end_value"] = s.min_end_value;
  j["validation"] = d;
  if (s.symmetry) {
    const SymmetryData& y = *s.symmetry;
    json S = json::array();
    for (int r = 0; r < 3; ++r) S.push_back(json::array({y.S(r, 0), y.S(r, 1), y.S(r, 2)}));
    j["symmetry"] = {{"S", S},
                     {"map", {{"m11", cjson(y.map.m11)}, {"m12", cjson(y.map.m12)}, {"m21", cjson(y.map.m21)},
                              {"m22", cjson(y.map.m22)}, {"conjugate", y.map.conjugate}}},
                     {"cycle", y.cycle},
                     {"residual", {{"immersion", y.residual.immersion}, {"normals", y.residual.normals}}}};
  }
  return j.dump(2) + "\n";
}

SurfaceRecord surface_from_json(const std::string& text) {
  json j = parse_json(text);
  check_keys(j, {"schema_version", "tool_version", "ends", "a", "b", "base", "method", "tolerances", "validation",
                 "symmetry"},
             "surface");
  check_version(j);
  for (const char* k : {"ends", "a", "b"})
    if (!j.contains(k)) schema(std::string("missing ") + k);
  Tolerances tol = j.contains("tolerances") ? tol_parse(j["tolerances"]) : Tolerances{};
  Vec3 base = j.contains("base") ? vec3parse(j["base"], "base") : Vec3::Zero();
  SurfaceRecord r = surface_from_vectors(ends_parse(j["ends"]), cvecparse(j["a"], "a"), cvecparse(j["b"], "b"),
                                         base, tol);
  if (j.contains("method")) r.method = j["method"].get<std::string>();
  if (j.contains("symmetry")) {
    const json& y = j["symmetry"];
    SymmetryData sd;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) sd.S(a, b) = dparse(y.at("S").at(a).at(b), "symmetry.S");
    const json& mp = y.at("map");
    sd.map = {cparse(mp.at("m11"), "map"), cparse(mp.at("m12"), "map"), cparse(mp.at("m21"), "map"),
              cparse(mp.at("m22"), "map"), mp.at("conjugate").get<bool>()};
    sd.cycle = y.at("cycle").get<std::vector<int>>();
    sd.residual = symmetry_residual(build_immersion(r), sd.S, sd.map, sd.cycle);
    r.symmetry = sd;
  }
  return r;
}

// ---------------------------------------------------------------- variation fields

VariationField parse_field(const std::string& text) {
  json j = parse_json(text);
  check_keys(j, {"schema_version", "v", "log_weights", "poles", "constant", "jacobi", "translation", "local"},
             "field");
  check_version(j);
  VariationField f;
  if (j.contains("v")) f.v = dparse(j["v"], "v");
  if (j.contains("log_weights"))
    for (const auto& x : j["log_weights"]) f.log_weights.push_back(dparse(x, "log_weights"));
  if (j.contains("poles"))
    for (const auto& x : j["poles"]) f.poles.push_back(cparse(x, "poles"));
  if (j.contains("constant")) f.constant = dparse(j["constant"], "constant");
  if (j.contains("jacobi")) f.jacobi = vec3parse(j["jacobi"], "jacobi");
  if (j.contains("translation")) f.translation = vec3parse(j["translation"], "translation");
  if (j.contains("local")) {
    for (const auto& t : j["local"]) {
      check_keys(t, {"end", "v", "pole", "log_weight", "poly", "quad", "r1", "r2"}, "local term");
      LocalTerm lt;
      if (!t.contains("end") || !t["end"].is_number_integer()) schema("local term needs an integer end");
      lt.end = t["end"].get<int>();
      if (t.contains("v")) lt.v = dparse(t["v"], "local.v");
      if (t.contains("pole")) lt.pole = cparse(t["pole"], "local.pole");
      if (t.contains("log_weight")) lt.log_weight = dparse(t["log_weight"], "local.log_weight");
      if (t.contains("poly"))
        for (const auto& x : t["poly"]) lt.poly.push_back(cparse(x, "local.poly"));
      if (t.contains("quad")) lt.quad = dparse(t["quad"], "local.quad");
      if (t.contains("r1")) lt.r1 = dparse(t["r1"], "local.r1");
      if (t.contains("r2")) lt.r2 = dparse(t["r2"], "local.r2");
      f.local.push_back(lt);
    }
  }
  return f;
}

std::string field_to_json(const VariationField& f) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["v"] = f.v;
  j["log_weights"] = f.log_weights;
  json p = json::array();
  for (cd c : f.poles) p.push_back(cjson(c));
  j["poles"] = p;
  j["constant"] = f.constant;
  j["jacobi"] = vec3json(f.jacobi);
  j["translation"] = vec3json(f.translation);
  json loc = json::array();
  for (const LocalTerm& t : f.local) {
    json poly = json::array();
    for (cd c : t.poly) poly.push_back(cjson(c));
    loc.push_back({{"end", t.end}, {"v", t.v}, {"pole", cjson(t.pole)}, {"log_weight", t.log_weight},
                   {"poly", poly}, {"quad", t.quad}, {"r1", t.r1}, {"r2", t.r2}});
  }
  j["local"] = loc;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- analysis

namespace {

struct Check {
  std::string name;
  double value, tolerance;
  bool pass;
};

json check_json(const Check& c) {
  return {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}};
}

std::vector<double> eps_ladder(const MinimalImmersion& im, int end) {
  double e0 = max_chart_radius(im, end);
  std::vector<double> eps;
  for (int k = 3; k <= 8; ++k) eps.push_back(e0 * std::pow(2.0, -k));
  return eps;
}

std::vector<Check> verification(const SurfaceRecord& s, const MinimalImmersion& im, const IndexReport& ir,
                                const InvariantReport& inv, const QuadratureScheme& qs) {
  std::vector<Check> out;
  const int m = im.m();
  const Tolerances& t = s.tol;
  out.push_back({"planar_end_conditions", s.max_planar_condition, t.assembly, s.max_planar_condition <= t.assembly});
  out.push_back({"residues", s.max_residue, t.assembly, s.max_residue <= t.assembly});
  out.push_back({"coprimality", s.coprime_measure, t.assembly, s.coprime_measure > t.assembly});

  double gb = 4.0 * kPi * (m - 1);
  double gbr = std::abs(inv.total_curvature + gb) / gb;
  out.push_back({"gauss_bonnet", gbr, t.quadrature, gbr <= t.quadrature});
  double wr = std::abs(inv.willmore - 4.0 * kPi * m) / (4.0 * kPi * m);
  out.push_back({"willmore_energy", wr, t.quadrature, wr <= t.quadrature});
  bool idx = ir.index == m - ir.d && ir.N == m - ir.d && ir.d >= 2 && ir.d <= 3;
  out.push_back({"index_identity", static_cast<double>(ir.index), 0.0, idx});

  // Ramification divisor: total order 2m - 4, every end ramified.
  auto R = ramification_divisor(im);
  int total = 0;
  for (const auto& r : R) total += r.order;
  out.push_back({"ramification_count", static_cast<double>(total), 0.0, total == 2 * m - 4});
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    double best = 1e300;
    for (const auto& r : R) {
      if (i == 0) {
        if (r.at_infinity) best = 0.0;
      } else if (!r.at_infinity) {
        cd p = s.ends.finite[i - 1];
        best = std::min(best, std::abs(r.point - p) / std::max(1.0, std::abs(p)));
      }
    }
    worst = std::max(worst, best);
  }
  out.push_back({"ramification_at_ends", worst, 1e-8, worst <= 1e-8});

  // Integration by parts at the end at infinity and at the first finite end.
  double ibp = 0.0;
  for (int e : {0, 1}) {
    LocalTerm u{e}, v{e};
    u.pole = cd(-0.3, 0.8);
    u.log_weight = 0.6;
    u.poly = {cd(0.2, 0.0), cd(0.1, 0.3), cd(0.5, 0.2)};
    u.quad = 0.4;
    v.pole = cd(0.5, 0.1);
    v.log_weight = -0.9;
    v.poly = {cd(-0.4, 0.0), cd(0.6, -0.2), cd(0.1, 0.7)};
    v.quad = -0.3;
    IbpResult r = ibp_residual(im, u, v, qs);
    ibp = std::max(ibp, r.residual / std::max(r.scale, 1e-300));
  }
  out.push_back({"integration_by_parts", ibp, 1e-6, ibp <= 1e-6});

  double area_exp = 1e300, expansion_exp = 1e300;
  for (int e = 0; e < m; ++e) {
    area_exp = std::min(area_exp, area_term_residual(im, e, eps_ladder(im, e)).exponent);
    LocalTerm f{e};
    f.v = 1.0;
    f.log_weight = 1.0;
    expansion_exp = std::min(expansion_exp, end_expansion_residual(im, f, eps_ladder(im, e)).exponent);
  }
  out.push_back({"area_term_decay_exponent", area_exp, 0.9, area_exp >= 0.9});
  out.push_back({"end_expansion_decay_exponent", expansion_exp, 0.9, expansion_exp >= 0.9});

  VariationField tr;
  tr.translation = Vec3(0.3, -0.5, 0.8);
  SecondVariationResult sv = second_variation(im, qs, tr, SecondVariationMode::Boundary);
  double scale = 2.0 * tr.translation.squaredNorm() * inv.cx2;
  double trr = std::abs(sv.value) / scale;
  out.push_back({"translation_invariance", trr, 1e-2, trr <= 1e-2});

  VariationField sf;
  sf.v = 1.0;
  sf.log_weights.assign(m - 1, 0.0);
  if (m > 1) sf.log_weights[0] = 1.0;
  SobolevProxy sp = sobolev_proxy(im, qs, sf);
  out.push_back({"sobolev_proxy_growth", sp.growth, 0.05, sp.growth <= 0.05});

  if (s.symmetry) {
    const auto& y = *s.symmetry;
    out.push_back({"symmetry_immersion", y.residual.immersion, 1e-8, y.residual.immersion <= 1e-8});
    out.push_back({"symmetry_normals", y.residual.normals, 1e-8, y.residual.normals <= 1e-8});
    double tet = 0.0;
    for (int i = 0; i < m; ++i)
      for (int k = i + 1; k < m; ++k) tet = std::max(tet, std::abs(ir.normals[i].dot(ir.normals[k]) + 1.0 / 3.0));
    out.push_back({"regular_tetrahedron", tet, 1e-6, tet <= 1e-6});
  }
  return out;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

}  // namespace

AnalysisOutput analyze_surface(const SurfaceRecord& s, const AnalyzeOptions& opt) {
  MinimalImmersion im = build_immersion(s);
  const int m = im.m();
  json rep;
  rep["schema_version"] = kSchemaVersion;
  rep["provenance"] = {{"tool_version", kToolVersion}, {"surface_hash", content_hash(surface_to_json(s))}};
  rep["surface"] = {{"m", m}, {"ends", ends_json(s.ends)}, {"method", s.method}};
  std::ostringstream sum;
  sum << "m            " << m << "\n";

  bool need_index = opt.index || opt.verify || opt.jacobi_alpha.has_value();
  bool need_energy = opt.energy || opt.verify || opt.jacobi_alpha.has_value();
  IndexReport ir;
  if (need_index) {
    ir = index_report(im, opt.quad, false, s.tol.rank);
    json normals = json::array();
    for (const Vec3& n : ir.normals) normals.push_back(vec3json(n));
    LogJacobiKernel lk = log_jacobi_kernel(ir.normals, s.tol.rank);
    json basis = json::array();
    for (const auto& b : lk.basis) basis.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    rep["index"] = {{"normals", normals},
                    {"singular_values", std::vector<double>(ir.singular_values.data(),
                                                            ir.singular_values.data() + ir.singular_values.size())},
                    {"d", ir.d},
                    {"index", ir.index},
                    {"N", ir.N},
                    {"log_jacobi_basis", basis},
                    {"rank_tol", s.tol.rank}};
    sum << "d            " << ir.d << "\nindex        " << ir.index << "\nN            " << ir.N << "\n";
  }
  InvariantReport inv;
  if (need_energy) {
    inv = geometric_invariants(im, opt.quad);
    rep["energy"] = {{"total_curvature", inv.total_curvature},
                     {"total_curvature_err", inv.total_curvature_err},
                     {"willmore", inv.willmore},
                     {"willmore_err", inv.willmore_err},
                     {"W_over_4pi", inv.willmore / (4.0 * kPi)},
                     {"cx2", inv.cx2},
                     {"cx2_err", inv.cx2_err}};
    sum << "W/4pi        " << fmt("%.10f", inv.willmore / (4.0 * kPi)) << "\n";
    sum << "int K / pi   " << fmt("%.10f", inv.total_curvature / kPi) << "\n";
    sum << "c_X^2        " << fmt("%.10g", inv.cx2) << "\n";
  }
  if (opt.field) {
    json sv;
    if (opt.field->closed_form()) {
      auto b = second_variation(im, opt.quad, *opt.field, SecondVariationMode::Bulk);
      sv["bulk"] = {{"value", b.value}, {"error", b.error}};
      sum << "Q bulk       " << fmt("%.10g", b.value) << "\n";
    }
    auto c = second_variation(im, opt.quad, *opt.field, SecondVariationMode::Boundary);
    sv["boundary"] = {{"value", c.value}, {"error", c.error}, {"rate", std::isfinite(c.rate) ? json(c.rate) : json()},
                      {"eps", c.eps}, {"raw", c.raw}};
    sum << "Q boundary   " << fmt("%.10g", c.value) << "\n";
    rep["second_variation"] = sv;
  }
  if (opt.jacobi_alpha) {
    LogJacobiOptions lo = opt.log_jacobi;
    lo.tolerance = s.tol.solver;
    LogJacobiSolution js = solve_log_jacobi(im, *opt.jacobi_alpha, lo);
    json poles = json::array();
    for (cd c : js.pole_coeffs) poles.push_back(cjson(c));
    double sb = js.beta.sum();
    OptimalDirection od = optimal_direction(sb, inv.cx2);
    rep["jacobi"] = {
        {"alpha", std::vector<double>(js.alpha.data(), js.alpha.data() + js.alpha.size())},
        {"beta", std::vector<double>(js.beta.data(), js.beta.data() + js.beta.size())},
        {"pole_coeffs", poles},
        {"residual", js.residual},
        {"tolerance", lo.tolerance},
        {"relaxed", js.relaxed},
        {"kernel_dimension", js.kernel_dimension},
        {"spectrum_tail", std::vector<double>(js.spectrum_tail.data(), js.spectrum_tail.data() + js.spectrum_tail.size())},
        {"degree", lo.degree},
        {"equations", js.equations},
        {"unknowns", js.unknowns},
        {"optimal_direction", {{"beta_sum", sb}, {"v", od.v}, {"value", od.value}}}};
    sum << "LJ residual  " << fmt("%.3e", js.residual) << (js.relaxed ? " (relaxed)" : "") << "\n";
    sum << "Q optimal    " << fmt("%.10g", od.value) << "\n";
  }
  AnalysisOutput out;
  if (opt.verify) {
    json checks = json::array();
    for (const Check& c : verification(s, im, ir, inv, opt.quad)) {
      checks.push_back(check_json(c));
      out.all_passed = out.all_passed && c.pass;
      sum << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << fmt("%.3e", c.value) << " (tol "
          << fmt("%.1e", c.tolerance) << ")\n";
    }
    rep["verify"] = checks;
  }
  out.report_json = rep.dump(2) + "\n";
  out.summary = sum.str();
  return out;
}

// ---------------------------------------------------------------- meshes

namespace {

cd from_sphere(const Vec3& x) {
  // Inverse of stereo_P; the north pole is z = infinity.
  return cd(x.x(), x.y()) / (1.0 - x.z());
}

}  // namespace

Mesh export_mesh(const MinimalImmersion& im, bool inverted, int grid) {
  if (grid < 16) fail("grid must be at least 16");
  const int m = im.m();
  std::vector<Vec3> E;
  for (int i = 0; i < m; ++i) E.push_back(i == 0 ? stereo_P_inf() : stereo_P(im.weierstrass().cfg.finite[i - 1]));
  double sep = kPi;
  for (int i = 0; i < m; ++i)
    for (int k = i + 1; k < m; ++k) sep = std::min(sep, std::acos(std::clamp(E[i].dot(E[k]), -1.0, 1.0)));
  const double R = 0.45 * sep;  // warp disks are disjoint
  const double cut = 0.02 * R;  // removed around the ends for X

  // Latitude-longitude sphere: poles, N - 1 rings of 2N vertices.
  const int N = grid, C = 2 * N;
  std::vector<Vec3> P;
  P.push_back(Vec3(0, 0, 1));
  for (int i = 1; i < N; ++i)
    for (int j = 0; j < C; ++j) {
      double th = kPi * i / N, ph = 2.0 * kPi * j / C;
      P.push_back(Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)));
    }
  P.push_back(Vec3(0, 0, -1));
  std::vector<std::array<int, 3>> F;
  auto ring = [&](int i, int j) { return 1 + (i - 1) * C + ((j % C) + C) % C; };
  const int south = static_cast<int>(P.size()) - 1;
  for (int j = 0; j < C; ++j) F.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i < N - 1; ++i)
    for (int j = 0; j < C; ++j) {
      F.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      F.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  for (int j = 0; j < C; ++j) F.push_back({ring(N - 1, j), south, ring(N - 1, j + 1)});

  // Pull vertices toward the ends: angle delta -> R (delta / R)^2 along the great circle.
  std::vector<int> at_end(P.size(), -1);
  std::vector<double> end_angle(P.size(), kPi);
  for (std::size_t k = 0; k < P.size(); ++k) {
    for (int i = 0; i < m; ++i) {
      double d = std::acos(std::clamp(P[k].dot(E[i]), -1.0, 1.0));
      if (d >= R) continue;
      double dn = R * (d / R) * (d / R);
      if (d < 1e-14) {
        P[k] = E[i];
      } else {
        Vec3 t = (P[k] - std::cos(d) * E[i]).normalized();
        P[k] = std::cos(dn) * E[i] + std::sin(dn) * t;
      }
      at_end[k] = dn < 1e-14 ? i : -1;
      end_angle[k] = dn;
    }
  }
  const InvertedSurface inv(im);
  std::vector<Vec3> V(P.size());
  std::vector<bool> keep(P.size(), true);
  for (std::size_t k = 0; k < P.size(); ++k) {
    if (inverted) {
      V[k] = at_end[k] >= 0 ? Vec3::Zero() : inv.psi(from_sphere(P[k]));
    } else if (end_angle[k] < cut) {
      keep[k] = false;
    } else {
      V[k] = immersion_point(im, from_sphere(P[k]));
    }
  }
  Mesh out;
  std::vector<int> remap(P.size(), -1);
  for (const auto& f : F) {
    if (!keep[f[0]] || !keep[f[1]] || !keep[f[2]]) continue;
    double area = 0.5 * (V[f[1]] - V[f[0]]).cross(V[f[2]] - V[f[0]]).norm();
    if (!(area >= 1e-12)) continue;
    std::array<int, 3> g;
    for (int c = 0; c < 3; ++c) {
      if (remap[f[c]] < 0) {
        remap[f[c]] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(V[f[c]]);
      }
      g[c] = remap[f[c]];
    }
    out.faces.push_back(g);
  }
  return out;
}

std::string mesh_to_obj(const Mesh& m) {
  std::string s;
  char buf[128];
  for (const Vec3& v : m.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    s += buf;
  }
  for (const auto& f : m.faces) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    s += buf;
  }
  return s;
}

Mesh mesh_from_obj(const std::string& text) {
  Mesh m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) {
      double x, y, z;
      if (std::sscanf(line.c_str() + 2, "%lf %lf %lf", &x, &y, &z) != 3) throw Error(ErrorKind::Io, "bad vertex line");
      m.vertices.emplace_back(x, y, z);
    } else if (line.rfind("f ", 0) == 0) {
      int a, b, c;
      if (std::sscanf(line.c_str() + 2, "%d %d %d", &a, &b, &c) != 3) throw Error(ErrorKind::Io, "bad face line");
      m.faces.push_back({a - 1, b - 1, c - 1});
    }
  }
  return m;
}

// ---------------------------------------------------------------- scan

std::string pfaffian_scan_csv(int m, double re0, double re1, double im0, double im1, int n, double rank_tol) {
  if (m < 4 || m % 2 != 0) fail("scan needs an even m >= 4");
  if (n < 1) fail("grid size must be positive");
  std::string s = "re,im,abs_pfaffian,kernel_dimension\n";
  char buf[160];
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double re = n == 1 ? re0 : re0 + (re1 - re0) * i / (n - 1);
      double imv = n == 1 ? im0 : im0 + (im1 - im0) * k / (n - 1);
      EndConfiguration cfg{{0.0, 1.0, cd(re, imv)}};
      for (int e = 4; e < m; ++e) cfg.finite.push_back(static_cast<double>(e - 2));
      try {
        cfg.validate();
        MatC M = build_end_matrix(cfg);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", re, imv, std::abs(pfaffian(M)),
                      kernel_basis(M, rank_tol).dimension);
      } catch (const Error&) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,nan,-1\n", re, imv);
      }
      s += buf;
    }
  return s;
}

}  // namespace willmore
