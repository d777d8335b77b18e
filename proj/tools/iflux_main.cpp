// Command-line front end: every library module as a subcommand with
// reproducible file I/O. Exit codes: 0 success, 2 validation failure (e.g. a
// failed integer-flux report), 1 runtime error, 64 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iflux/iflux.hpp"

using namespace iflux;

namespace {

constexpr int kSchemaVersion = 1;

Vec3 parse_vec3(const std::string& s) {
  Vec3 v;
  char c1, c2;
  std::istringstream is(s);
  if (!(is >> v.x >> c1 >> v.y >> c2 >> v.z) || c1 != ',' || c2 != ',')
    throw CLI::ValidationError("expected x,y,z: " + s);
  return v;
}

Json vec3_json(const Vec3& v) {
  return Json(Json::Array{Json(v.x), Json(v.y), Json(v.z)});
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << j.str();
  } else {
    std::ofstream os(out_path);
    if (!os) throw Error("cannot open output file: " + out_path);
    os << j.str();
  }
}

// --- shared field construction ----------------------------------------------

struct FieldFlags {
  std::string builtin = "monopole";
  std::string field_file;
  std::string center = "0,0,0";
  std::string dipole_a = "0.7,0.5,0.5";
  std::string dipole_b = "0.3,0.5,0.5";
  std::string value = "1,0,0";
  double rho_t = -1.0;
  double scale = 1.0;
  std::string domain_box;  // "lox,loy,loz:hix,hiy,hiz"

  void attach(CLI::App* cmd, bool with_file = true) {
    cmd->add_option("--builtin", builtin,
                    "builtin field: monopole|dipole|constant|zero")->capture_default_str();
    if (with_file)
      cmd->add_option("--field", field_file, "FLD1 field file (overrides --builtin)");
    cmd->add_option("--center", center, "monopole center / scan center x,y,z")
        ->capture_default_str();
    cmd->add_option("--a", dipole_a, "dipole sink pole x,y,z")->capture_default_str();
    cmd->add_option("--b", dipole_b, "dipole source pole x,y,z")->capture_default_str();
    cmd->add_option("--rho-t", rho_t, "dipole transverse radius (default: half-length)");
    cmd->add_option("--value", value, "constant field value x,y,z")->capture_default_str();
    cmd->add_option("--scale", scale, "scalar multiplier applied to the field")
        ->capture_default_str();
    cmd->add_option("--domain-box", domain_box, "override domain box lox,loy,loz:hix,hiy,hiz");
  }

  std::optional<Box3> domain() const {
    if (domain_box.empty()) return std::nullopt;
    const auto colon = domain_box.find(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("--domain-box expects lo:hi with comma-separated triples");
    Box3 b;
    b.lo = parse_vec3(domain_box.substr(0, colon));
    b.hi = parse_vec3(domain_box.substr(colon + 1));
    return b;
  }

  FieldSource build() const {
    FieldSource base = [&]() {
      if (!field_file.empty()) return FieldSource::grid(read_fld(field_file));
      const auto box = domain();
      if (builtin == "monopole") {
        const Vec3 c = parse_vec3(center);
        return box ? FieldSource::monopole(c, *box) : FieldSource::monopole(c);
      }
      if (builtin == "dipole") {
        DipoleSpec d;
        d.a = parse_vec3(dipole_a);
        d.b = parse_vec3(dipole_b);
        d.rho_t = rho_t;
        return box ? FieldSource::dipole(d, *box) : FieldSource::dipole(d);
      }
      if (builtin == "constant")
        return FieldSource::constant(parse_vec3(value), box.value_or(Box3{}));
      if (builtin == "zero")
        return FieldSource::constant({0, 0, 0}, box.value_or(Box3{}));
      throw CLI::ValidationError("unknown builtin: " + builtin);
    }();
    return scale == 1.0 ? base : scale * base;
  }

  Json config_json() const {
    Json c = Json::object();
    if (!field_file.empty())
      c.set("field", field_file);
    else
      c.set("builtin", builtin);
    c.set("center", center).set("scale", scale);
    if (builtin == "dipole") {
      c.set("a", dipole_a).set("b", dipole_b);
      c.set("rho_t", rho_t);
    }
    return c;
  }
};

// --- subcommands -------------------------------------------------------------

int run_flux(const FieldFlags& ff, double radius, int order, const std::string& format,
             const std::string& out) {
  const FieldSource field = ff.build();
  const Vec3 center = parse_vec3(ff.center);
  const SphereQuadrature rule = sphere_quadrature(order);
  const double flux = sphere_flux(field, center, radius, rule);
  const double estimate = flux_error_estimate(field, center, radius, order);
  if (format == "json") {
    Json j = Json::object();
    Json cfg = ff.config_json();
    cfg.set("radius", radius).set("order", static_cast<long long>(order));
    j.set("schema_version", kSchemaVersion).set("config", std::move(cfg));
    j.set("flux", flux).set("error_estimate", estimate);
    emit(j, out);
  } else {
    std::cout << fmt_g17(flux) << "\n";
  }
  return 0;
}

int run_scan(const FieldFlags& ff, double rmin, double rmax, int samples, double p, int order,
             const std::string& out) {
  const FieldSource field = ff.build();
  const Vec3 center = parse_vec3(ff.center);
  auto rule = std::make_shared<SphereQuadrature>(sphere_quadrature(order));
  const SliceScan scan = radial_scan(field, center, rmin, rmax, samples, p, rule);
  if (out.empty() || out == "-")
    write_scan_csv(std::cout, scan);
  else
    write_scan_csv(out, scan);
  return 0;
}

int run_report(const FieldFlags& ff, const std::string& spheres_file, int random_count,
               std::uint64_t seed, double tau, int order, const std::string& out) {
  const FieldSource field = ff.build();
  std::vector<SphereSpec> spheres;
  if (!spheres_file.empty()) {
    std::ifstream is(spheres_file);
    if (!is) throw Error("cannot open spheres file: " + spheres_file);
    nlohmann::json doc = nlohmann::json::parse(is);
    for (const auto& e : doc) {
      SphereSpec s;
      s.center = {e.at("center").at(0), e.at("center").at(1), e.at("center").at(2)};
      s.radius = e.at("radius");
      spheres.push_back(s);
    }
  } else {
    // random admissible spheres inside the field domain
    Rng rng(seed);
    const Box3 box = field.domain();
    const Vec3 ext = box.extent();
    const double max_r = 0.45 * std::min({ext.x, ext.y, ext.z});
    int guard = 0;
    while (static_cast<int>(spheres.size()) < random_count && guard++ < 100000) {
      SphereSpec s;
      s.radius = rng.uniform(0.2 * max_r, max_r);
      s.center = {rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y),
                  rng.uniform(box.lo.z, box.hi.z)};
      if (!box.contains_ball(s.center, s.radius)) continue;
      // keep singular loci comfortably off the sphere surface
      bool ok = true;
      for (const auto& locus : field.singularities())
        if (locus.sphere_surface_distance(s.center, s.radius) < 0.1 * s.radius) ok = false;
      if (ok) spheres.push_back(s);
    }
  }
  const SphereQuadrature rule = sphere_quadrature(order);
  const double tau_eff = tau > 0.0 ? tau : default_tau(field, spheres, order);
  const FluxReport report = integer_flux_report(field, spheres, tau_eff, rule);

  Json j = Json::object();
  Json cfg = ff.config_json();
  cfg.set("order", static_cast<long long>(order)).set("tau", tau_eff);
  cfg.set("seed", static_cast<long long>(seed));
  j.set("schema_version", kSchemaVersion).set("config", std::move(cfg));
  Json rows = Json::array();
  for (const auto& rec : report.records) {
    Json r = Json::object();
    r.set("center", vec3_json(rec.center)).set("radius", rec.radius);
    r.set("flux", rec.flux).set("nearest", rec.nearest).set("deviation", rec.deviation);
    r.set("valid", rec.valid);
    rows.push(std::move(r));
  }
  j.set("spheres", std::move(rows));
  j.set("verdict", report.pass ? "pass" : "fail");
  emit(j, out);
  return report.pass ? 0 : 2;
}

int run_monopole(const std::string& center_s, int grid_n, const std::string& out_fld, double p,
                 double shell_min, double shell_max, const std::string& out) {
  const Vec3 center = parse_vec3(center_s);
  const FieldSource mono = FieldSource::monopole(center);
  Json j = Json::object();
  Json cfg = Json::object();
  cfg.set("center", center_s).set("grid", static_cast<long long>(grid_n));
  j.set("schema_version", kSchemaVersion);
  if (!out_fld.empty()) {
    write_fld(out_fld, rasterize(mono, grid_n));
    j.set("field_file", out_fld);
  }
  if (p > 0.0) {
    cfg.set("p", p).set("shell_min", shell_min).set("shell_max", shell_max);
    const double norm = lp_norm(mono, p, ShellRegion{center, shell_min, shell_max}, 16);
    j.set("lp_norm", norm);
    j.set("lp_energy", std::pow(norm, p));
  }
  j.set("config", std::move(cfg));
  emit(j, out);
  return 0;
}

int run_dipole(const FieldFlags& ff, const std::vector<double>& p_list, int grid_n,
               const std::string& out_fld, const std::string& out) {
  DipoleSpec d;
  d.a = parse_vec3(ff.dipole_a);
  d.b = parse_vec3(ff.dipole_b);
  d.rho_t = ff.rho_t;
  d.validate();
  const auto box = ff.domain();
  const FieldSource field = box ? FieldSource::dipole(d, *box) : FieldSource::dipole(d);

  Json j = Json::object();
  Json cfg = Json::object();
  cfg.set("a", ff.dipole_a).set("b", ff.dipole_b).set("rho_t", d.transverse_radius());
  j.set("schema_version", kSchemaVersion).set("config", std::move(cfg));
  j.set("half_length", d.half_length());

  // divergence contract against a small dictionary of polynomial potentials
  double worst = 0.0;
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 lin{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::array<double, 6> quad{};
    for (auto& q : quad) q = rng.uniform(-1, 1);
    auto c = FieldSource::PolyCoeffs{};
    for (auto& row : c) row.fill(0.0);
    c[0][0] = lin.x;
    c[0][1] = 2 * quad[0];
    c[0][2] = quad[3];
    c[0][3] = quad[4];
    c[1][0] = lin.y;
    c[1][2] = 2 * quad[1];
    c[1][1] = quad[3];
    c[1][3] = quad[5];
    c[2][0] = lin.z;
    c[2][3] = 2 * quad[2];
    c[2][1] = quad[4];
    c[2][2] = quad[5];
    const FieldSource grad = FieldSource::polynomial(c, field.domain());
    auto pot = [&](const Vec3& x) {
      return lin.x * x.x + lin.y * x.y + lin.z * x.z + quad[0] * x.x * x.x + quad[1] * x.y * x.y +
             quad[2] * x.z * x.z + quad[3] * x.x * x.y + quad[4] * x.x * x.z + quad[5] * x.y * x.z;
    };
    worst = std::max(worst, std::abs(weak_pairing(field, grad) - (pot(d.a) - pot(d.b))));
  }
  j.set("pairing_max_error", worst);

  Json energies = Json::object();
  for (double p : p_list) energies.set(fmt_g17(p), dipole_lp_energy(d, p));
  j.set("lp_energies", std::move(energies));
  if (!out_fld.empty()) {
    write_fld(out_fld, rasterize(field, grid_n));
    j.set("field_file", out_fld);
  }
  emit(j, out);
  return 0;
}

int run_counterexample(int k, const std::string& family, const std::string& measure_file,
                       const std::vector<double>& p_list, const std::string& report_path) {
  CounterexampleField cf;
  if (family == "lattice") {
    cf = counterexample_lattice(k);
  } else if (family == "dyadic") {
    VectorMeasure m = VectorMeasure::uniform({1, 0, 0});
    if (!measure_file.empty()) {
      std::ifstream is(measure_file);
      if (!is) throw Error("cannot open measure file: " + measure_file);
      nlohmann::json doc = nlohmann::json::parse(is);
      m = VectorMeasure{};
      for (int axis = 0; axis < 3; ++axis) {
        const std::string key = axis == 0 ? "x" : (axis == 1 ? "y" : "z");
        if (!doc.contains(key)) continue;
        const auto& comp = doc.at(key);
        if (comp.contains("uniform")) {
          ScalarGrid g;
          g.spec.dims = {2, 2, 2};
          g.samples.assign(8, comp.at("uniform").get<double>());
          m.comp[axis].densities.push_back(std::move(g));
        }
        if (comp.contains("atoms"))
          for (const auto& a : comp.at("atoms"))
            m.comp[axis].atoms.push_back(
                {{a.at("point").at(0), a.at("point").at(1), a.at("point").at(2)},
                 a.at("weight").get<double>()});
      }
    }
    cf = counterexample_density(k, m);
  } else {
    throw CLI::ValidationError("unknown family: " + family);
  }

  Json j = Json::object();
  Json cfg = Json::object();
  cfg.set("k", static_cast<long long>(k)).set("family", family);
  j.set("schema_version", kSchemaVersion).set("config", std::move(cfg));
  j.set("k", static_cast<long long>(k));
  j.set("segment_count", static_cast<long long>(cf.current.segments.size()));
  if (cf.exact_mass)
    j.set("mass_Ik", cf.exact_mass->to_string());
  else
    j.set("mass_Ik", fmt_g17(cf.current.mass()));
  j.set("div_mass", cf.current.boundary_mass());
  j.set("l1_norm", dipole_sum_lp_energy(cf.dipoles, 1.0));
  Json lp = Json::object();
  for (double p : p_list)
    if (p > 1.0) lp.set(fmt_g17(p), dipole_sum_lp_energy(cf.dipoles, p));
  j.set("lp_norms", std::move(lp));

  // convergence diagnostics against the diffuse limit
  const Box3 unit{{0, 0, 0}, {1, 1, 1}};
  Json pairings = Json::array();
  {
    const FieldSource e1 = FieldSource::constant({1, 0, 0}, unit);
    auto c = FieldSource::PolyCoeffs{};
    for (auto& row : c) row.fill(0.0);
    c[0][1] = 1.0;  // (x, 0, 0)
    const FieldSource linear = FieldSource::polynomial(c, unit);
    auto cq = FieldSource::PolyCoeffs{};
    for (auto& row : cq) row.fill(0.0);
    cq[0][4] = 1.0;  // (x^2, 0, 0)
    const FieldSource quadratic = FieldSource::polynomial(cq, unit);
    const char* names[3] = {"constant_e1", "linear_x", "quadratic_x2"};
    const FieldSource* tests[3] = {&e1, &linear, &quadratic};
    const double targets[3] = {1.0, 0.5, 1.0 / 3.0};
    for (int t = 0; t < 3; ++t) {
      Json row = Json::object();
      row.set("test", names[t]);
      row.set("value", weak_pairing(cf.field, *tests[t]));
      row.set("target", targets[t]);
      pairings.push(std::move(row));
    }
  }
  j.set("pairings", std::move(pairings));
  emit(j, report_path);
  return 0;
}

TorusScalar torus_input(const std::string& source, int n) {
  if (source.rfind("random:", 0) == 0) {
    Rng rng(std::stoull(source.substr(7)));
    TorusScalar f = TorusScalar::zeros(n);
    for (int kx = -4; kx <= 4; ++kx)
      for (int ky = 0; ky <= 4; ++ky) {
        if ((kx == 0 && ky == 0) || (ky == 0 && kx < 0)) continue;
        const double amp = rng.uniform(-1, 1), phase = rng.uniform(0.0, 2.0 * kPi);
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i)
            f.at(i, j) += amp * std::cos(2.0 * kPi * (kx * static_cast<double>(i) / n +
                                                      ky * static_cast<double>(j) / n) + phase);
      }
    return f;
  }
  std::ifstream is(source);
  if (!is) throw Error("cannot open grid CSV: " + source);
  TorusScalar f = TorusScalar::zeros(n);
  std::string line;
  for (int j = 0; j < n; ++j) {
    if (!std::getline(is, line))
      throw FormatError("grid CSV: expected " + std::to_string(n) + " rows");
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i < n; ++i) {
      if (!std::getline(ls, cell, ',')) throw FormatError("grid CSV: short row");
      f.at(i, j) = std::stod(cell);
    }
  }
  return f;
}

int run_metric(const std::string& domain_s, int resolution, double p, const std::string& h1_s,
               const std::string& h2_s, const FieldFlags& ff, double r1, double r2, int order,
               const std::string& out) {
  Json j = Json::object();
  Json cfg = Json::object();
  cfg.set("domain", domain_s).set("resolution", static_cast<long long>(resolution)).set("p", p);
  MetricBoundDetail detail;
  if (domain_s == "square") {
    const DomainSpec dom{DomainSpec::Kind::SquarePeriodic, resolution};
    const TorusScalar h1 = torus_input(h1_s, resolution);
    const TorusScalar h2 = torus_input(h2_s, resolution);
    cfg.set("h1", h1_s).set("h2", h2_s);
    detail = metric_upper_bound_detail(h1, h2, p, dom);
  } else if (domain_s == "sphere") {
    const FieldSource field = ff.build();
    const Vec3 center = parse_vec3(ff.center);
    auto rule = std::make_shared<SphereQuadrature>(sphere_quadrature(order));
    const SphereForm h1 = slice_pullback(field, center, r1, rule);
    const SphereForm h2 = slice_pullback(field, center, r2, rule);
    cfg.set("r1", r1).set("r2", r2).set("order", static_cast<long long>(order));
    const DomainSpec dom{DomainSpec::Kind::Sphere, std::min(resolution, order - 1)};
    detail = metric_upper_bound_detail(h1, h2, p, dom);
  } else {
    throw CLI::ValidationError("unknown domain: " + domain_s);
  }
  j.set("schema_version", kSchemaVersion).set("config", std::move(cfg));
  j.set("domain", domain_s).set("resolution", static_cast<long long>(resolution)).set("p", p);
  j.set("upper_bound", detail.upper_bound);
  j.set("flux_h1", detail.flux_h1).set("flux_h2", detail.flux_h2);
  j.set("integer_gap", detail.integer_gap);
  emit(j, out);
  return 0;
}

int run_maximal(const std::string& scan_csv, const FieldFlags& ff, double rmin, double rmax,
                int samples, double p, int order, double lo, double hi, const std::string& out) {
  Json j = Json::object();
  Json cfg = Json::object();
  cfg.set("p", p);
  ChainReport chain;
  WeakBoundReport weak;
  bool have_slices = false;
  if (!scan_csv.empty()) {
    const ScanTable t = read_scan_csv(scan_csv);
    cfg.set("scan", scan_csv);
    EnergyProfile prof;
    prof.radii = t.radii;
    prof.f = t.energy;
    prof.valid = t.valid;
    prof.p = p;
    const double use_lo = lo > 0 ? lo : prof.radii.front();
    const double use_hi = hi > 0 ? hi : prof.radii.back();
    const MaximalProfile mp = uncentered_maximal(prof, use_lo, use_hi);
    weak = weak_bound_check(prof, mp, p, {});
    chain.worst_slack_ii = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < t.radii.size(); ++i) {
      if (!t.valid[i] || !t.valid[i + 1]) continue;
      if (std::llround(t.flux[i]) != std::llround(t.flux[i + 1]))
        chain.flux_mismatch_radii.emplace_back(t.radii[i], t.radii[i + 1]);
    }
    for (std::size_t l = 0; l < t.radii.size(); ++l)
      for (std::size_t r = l + 1; r < t.radii.size(); ++r) {
        bool ok = mp.in_interval[l] && mp.in_interval[r];
        for (std::size_t m = l; ok && m <= r; ++m) ok = mp.in_interval[m];
        if (!ok) continue;
        double integral = 0.0;
        for (std::size_t m = l; m < r; ++m)
          integral += 0.5 * (t.energy[m] + t.energy[m + 1]) * (t.radii[m + 1] - t.radii[m]);
        const double delta = t.radii[r] - t.radii[l];
        const double mid = std::pow(delta, 1.0 - 1.0 / p) * std::pow(integral, 1.0 / p);
        chain.worst_slack_ii = std::min(chain.worst_slack_ii, delta * mp.N[l] - mid);
        ++chain.pairs_checked;
      }
  } else {
    const FieldSource field = ff.build();
    const Vec3 center = parse_vec3(ff.center);
    auto rule = std::make_shared<SphereQuadrature>(sphere_quadrature(order));
    const SliceScan scan = radial_scan(field, center, rmin, rmax, samples, p, rule);
    cfg.set("rmin", rmin).set("rmax", rmax).set("samples", static_cast<long long>(samples));
    cfg.set("order", static_cast<long long>(order));
    const double use_lo = lo > 0 ? lo : rmin;
    const double use_hi = hi > 0 ? hi : rmax;
    chain = lipschitz_chain_check(scan, use_lo, use_hi);
    const EnergyProfile prof = slice_energy(scan);
    const MaximalProfile mp = uncentered_maximal(prof, use_lo, use_hi);
    weak = weak_bound_check(prof, mp, p, {});
    have_slices = true;
  }
  j.set("schema_version", kSchemaVersion).set("config", std::move(cfg));
  if (have_slices)
    j.set("worst_slack_i", chain.worst_slack_i);
  else
    j.set("worst_slack_i", nullptr);
  j.set("worst_slack_ii", chain.worst_slack_ii);
  j.set("weak_bound_ratio", weak.ratio);
  j.set("weak_bound_pass", weak.pass);
  if (have_slices) j.set("worst_metric_slack", chain.worst_metric_slack);
  Json mism = Json::array();
  for (const auto& pr : chain.flux_mismatch_radii) {
    Json pair = Json::array();
    pair.push(pr.first);
    pair.push(pr.second);
    mism.push(std::move(pair));
  }
  j.set("flux_mismatch_radii", std::move(mism));
  emit(j, out);
  return 0;
}

int run_minimize(const std::string& atoms_file, double p, int grid_n, int iters, double tol,
                 const std::string& out_fld, const std::string& trace_path,
                 const std::string& out) {
  ChargeSpec spec;
  spec.grid.dims = {grid_n, grid_n, grid_n};
  const double h = 1.0 / (grid_n - 1);
  spec.grid.spacing = {h, h, h};
  {
    std::ifstream is(atoms_file);
    if (!is) throw Error("cannot open atoms file: " + atoms_file);
    nlohmann::json doc = nlohmann::json::parse(is);
    for (const auto& a : doc) {
      ChargeSpec::Charge c;
      c.point = {a.at("point").at(0), a.at("point").at(1), a.at("point").at(2)};
      c.degree = a.at("charge").get<long long>();
      spec.atoms.push_back(c);
    }
  }
  SolverOptions opts;
  opts.max_iters = iters;
  opts.tol = tol;
  const MinimizeResult res = minimize_charged(spec, p, opts);
  if (!out_fld.empty()) write_fld(out_fld, res.field);
  if (!trace_path.empty()) {
    std::ofstream ts(trace_path);
    if (!ts) throw Error("cannot open trace file: " + trace_path);
    ts << "iter,objective,div_residual\n";
    for (const auto& row : res.trace.rows)
      ts << row.iter << ',' << fmt_g17(row.objective) << ',' << fmt_g17(row.div_residual) << '\n';
  }
  Json j = Json::object();
  Json cfg = Json::object();
  cfg.set("atoms", atoms_file).set("p", p).set("grid", static_cast<long long>(grid_n));
  cfg.set("iters", static_cast<long long>(iters)).set("tol", tol);
  j.set("schema_version", kSchemaVersion).set("config", std::move(cfg));
  j.set("objective", res.trace.final_objective);
  j.set("div_residual", res.trace.final_residual);
  j.set("iterations", static_cast<long long>(res.trace.iterations));
  j.set("smoothing", res.trace.smoothing_used);
  if (!out_fld.empty()) j.set("field_file", out_fld);
  if (!trace_path.empty()) j.set("trace_file", trace_path);
  emit(j, out);
  return 0;
}

int run_growth(const std::vector<double>& p_list, int k_max, const std::string& family_s,
               const std::string& format, const std::string& out) {
  std::vector<int> ks;
  for (int k = 1; k <= k_max; ++k) ks.push_back(k);
  const CounterexampleFamily family = family_s == "lattice" ? CounterexampleFamily::Lattice
                                                            : CounterexampleFamily::DyadicUniform;
  const GrowthTable table = growth_diagnostic(p_list, ks, family);
  if (format == "csv") {
    std::ostringstream os;
    os << "p,k,energy,norm\n";
    for (const auto& row : table.rows)
      os << fmt_g17(row.p) << ',' << row.k << ',' << fmt_g17(row.energy) << ','
         << fmt_g17(row.norm) << '\n';
    if (out.empty() || out == "-") {
      std::cout << os.str();
    } else {
      std::ofstream f(out);
      if (!f) throw Error("cannot open output file: " + out);
      f << os.str();
    }
    return 0;
  }
  Json j = Json::object();
  Json cfg = Json::object();
  cfg.set("k_max", static_cast<long long>(k_max)).set("family", family_s);
  j.set("schema_version", kSchemaVersion).set("config", std::move(cfg));
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r = Json::object();
    r.set("p", row.p).set("k", static_cast<long long>(row.k));
    r.set("energy", row.energy).set("norm", row.norm);
    rows.push(std::move(r));
  }
  j.set("rows", std::move(rows));
  Json flags = Json::object();
  for (const auto& [p, verdict] : table.flags) flags.set(fmt_g17(p), verdict);
  j.set("flags", std::move(flags));
  emit(j, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"integer-flux vector field toolkit"};
  app.require_subcommand(1);

  std::string format = "plain", out;
  std::string mono_center = "0,0,0";
  double radius = 0.25, rmin = 0.1, rmax = 0.9, p = 1.2, tau = 0.0;
  int order = 16, samples = 16, grid_n = 9, k = 2, k_max = 4, iters = 20000, random_count = 20;
  double tol = 1e-8, shell_min = 0.1, shell_max = 1.0, r1 = 0.3, r2 = 0.6, lo = 0.0, hi = 0.0;
  std::uint64_t seed = 1;
  std::string spheres_file, measure_file, scan_csv, atoms_file, out_fld, trace_path;
  std::string family = "lattice", growth_family = "dyadic";
  std::string domain_s = "square", h1_s = "random:1", h2_s = "random:2";
  std::vector<double> p_list;
  int resolution = 64;

  FieldFlags ff_flux, ff_scan, ff_report, ff_dipole, ff_metric, ff_maximal;

  CLI::App* c_flux = app.add_subcommand("flux", "flux of a field through one sphere");
  ff_flux.attach(c_flux);
  c_flux->add_option("--radius", radius)->capture_default_str();
  c_flux->add_option("--order", order)->capture_default_str();
  c_flux->add_option("--format", format, "plain|json")->capture_default_str();
  c_flux->add_option("--out", out);

  CLI::App* c_scan = app.add_subcommand("scan", "radial slice scan to CSV");
  ff_scan.attach(c_scan);
  c_scan->add_option("--rmin", rmin)->capture_default_str();
  c_scan->add_option("--rmax", rmax)->capture_default_str();
  c_scan->add_option("--samples", samples)->capture_default_str();
  c_scan->add_option("--p", p)->capture_default_str();
  c_scan->add_option("--order", order)->capture_default_str();
  c_scan->add_option("--out", out);

  CLI::App* c_report = app.add_subcommand("report", "integer-flux membership report");
  ff_report.attach(c_report);
  c_report->add_option("--spheres", spheres_file, "JSON file with [{center:[..], radius}]");
  c_report->add_option("--random", random_count, "number of random admissible spheres")
      ->capture_default_str();
  c_report->add_option("--seed", seed)->capture_default_str();
  c_report->add_option("--tau", tau, "tolerance; 0 uses the quadrature estimate")
      ->capture_default_str();
  c_report->add_option("--order", order)->capture_default_str();
  c_report->add_option("--out", out);

  CLI::App* c_mono = app.add_subcommand("monopole", "emit the unit monopole");
  c_mono->add_option("--center", mono_center)->capture_default_str();
  c_mono->add_option("--grid", grid_n)->capture_default_str();
  c_mono->add_option("--out-field", out_fld, "write FLD1 raster");
  c_mono->add_option("--p", p, "report the shell L^p norm at this exponent");
  c_mono->add_option("--shell-min", shell_min)->capture_default_str();
  c_mono->add_option("--shell-max", shell_max)->capture_default_str();
  c_mono->add_option("--out", out);

  CLI::App* c_dip = app.add_subcommand("dipole", "emit the explicit dipole construction");
  ff_dipole.attach(c_dip, false);
  c_dip->add_option("--p", p_list, "L^p exponents for energies");
  c_dip->add_option("--grid", grid_n)->capture_default_str();
  c_dip->add_option("--out-field", out_fld, "write FLD1 raster");
  c_dip->add_option("--out", out);

  CLI::App* c_cex = app.add_subcommand("counterexample", "segment lattice and dipole family");
  c_cex->add_option("--k", k)->capture_default_str();
  c_cex->add_option("--family", family, "lattice|dyadic")->capture_default_str();
  c_cex->add_option("--measure", measure_file, "measure JSON (dyadic family)");
  c_cex->add_option("--p", p_list, "extra L^p exponents");
  c_cex->add_option("--report", out, "output JSON path");

  CLI::App* c_metric = app.add_subcommand("metric", "relaxed slice-distance upper bound");
  c_metric->add_option("--metric-domain", domain_s, "square|sphere")->capture_default_str();
  c_metric->add_option("--resolution", resolution)->capture_default_str();
  c_metric->add_option("--p", p)->capture_default_str();
  c_metric->add_option("--h1", h1_s, "CSV grid or random:SEED (square)")->capture_default_str();
  c_metric->add_option("--h2", h2_s)->capture_default_str();
  ff_metric.attach(c_metric);
  c_metric->add_option("--r1", r1, "first slice radius (sphere)")->capture_default_str();
  c_metric->add_option("--r2", r2, "second slice radius (sphere)")->capture_default_str();
  c_metric->add_option("--order", order)->capture_default_str();
  c_metric->add_option("--out", out);

  CLI::App* c_max = app.add_subcommand("maximal", "maximal-function estimates for a scan");
  c_max->add_option("--scan", scan_csv, "scan CSV (energy-only checks)");
  ff_maximal.attach(c_max);
  c_max->add_option("--rmin", rmin)->capture_default_str();
  c_max->add_option("--rmax", rmax)->capture_default_str();
  c_max->add_option("--samples", samples)->capture_default_str();
  c_max->add_option("--p", p)->capture_default_str();
  c_max->add_option("--order", order)->capture_default_str();
  c_max->add_option("--interval-lo", lo)->capture_default_str();
  c_max->add_option("--interval-hi", hi)->capture_default_str();
  c_max->add_option("--out", out);

  CLI::App* c_min = app.add_subcommand("minimize", "L^p minimization with point charges");
  c_min->add_option("--atoms", atoms_file, "JSON [{point:[..], charge:n}]")->required();
  c_min->add_option("--p", p)->capture_default_str();
  c_min->add_option("--grid", grid_n)->capture_default_str();
  c_min->add_option("--iters", iters)->capture_default_str();
  c_min->add_option("--tol", tol)->capture_default_str();
  c_min->add_option("--out-field", out_fld, "write the minimizer as FLD1");
  c_min->add_option("--trace", trace_path, "write iter,objective,div_residual CSV");
  c_min->add_option("--out", out);

  CLI::App* c_growth = app.add_subcommand("growth", "L^p growth of the counterexample family");
  c_growth->add_option("--p", p_list, "exponents (repeatable)");
  c_growth->add_option("--k-max", k_max)->capture_default_str();
  c_growth->add_option("--family", growth_family, "dyadic|lattice")->capture_default_str();
  c_growth->add_option("--format", format, "json|csv")->capture_default_str();
  c_growth->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cout, std::cerr);
    return 64;
  }

  try {
    if (*c_flux) return run_flux(ff_flux, radius, order, format, out);
    if (*c_scan) return run_scan(ff_scan, rmin, rmax, samples, p, order, out);
    if (*c_report)
      return run_report(ff_report, spheres_file, random_count, seed, tau, order, out);
    if (*c_mono) {
      const double pp = c_mono->count("--p") ? p : 0.0;
      return run_monopole(mono_center, grid_n, out_fld, pp, shell_min, shell_max, out);
    }
    if (*c_dip) {
      if (p_list.empty()) p_list = {1.0, 1.2};
      return run_dipole(ff_dipole, p_list, grid_n, out_fld, out);
    }
    if (*c_cex) {
      if (p_list.empty()) p_list = {1.2};
      return run_counterexample(k, family, measure_file, p_list, out);
    }
    if (*c_metric)
      return run_metric(domain_s, resolution, p, h1_s, h2_s, ff_metric, r1, r2, order, out);
    if (*c_max)
      return run_maximal(scan_csv, ff_maximal, rmin, rmax, samples, p, order, lo, hi, out);
    if (*c_min) return run_minimize(atoms_file, p, grid_n, iters, tol, out_fld, trace_path, out);
    if (*c_growth) {
      if (p_list.empty()) p_list = {1.0, 1.2, 1.4};
      const std::string fmt = c_growth->count("--format") ? format : "json";
      return run_growth(p_list, k_max, growth_family, fmt, out);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 64;
}
