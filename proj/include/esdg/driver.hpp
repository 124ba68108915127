#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "esdg/cases.hpp"
#include "esdg/diag.hpp"
#include "esdg/error.hpp"
#include "esdg/mesh.hpp"
#include "esdg/mesh_io.hpp"
#include "esdg/timeint.hpp"

namespace esdg {

inline constexpr int kMaxRunDegree = 8;

struct RunConfig {
  std::string case_id = "vortex";
  int order = 3;
  std::string mesh;        // empty: case default
  double t_end = -1.0;     // <= 0: case default
  double cfl = -1.0;       // <= 0: 0.5 / (2N + 1)
  double oe_scale = kOeDefaultScale;
  double threshold = kOeDefaultThreshold;
  std::string oe_mode = "auto";
  std::string flux = "llf";
  std::string out = "out";
  int snapshot_every = 0;  // 0: initial and final only
  int max_steps = 0;       // 0: run to t_end
  unsigned long seed = 0;
  std::map<int, std::string> bc_overrides;

  /// Ordered key = value echo used as the header of every output file.
  std::vector<std::pair<std::string, std::string>> entries() const {
    std::vector<std::pair<std::string, std::string>> e{
        {"case", case_id},
        {"order", std::to_string(order)},
        {"mesh", mesh},
        {"t-end", format_double(t_end)},
        {"cfl", format_double(cfl)},
        {"oe-scale", format_double(oe_scale)},
        {"indicator-threshold", format_double(threshold)},
        {"oe-mode", oe_mode},
        {"flux", flux},
        {"out", out},
        {"snapshot-every", std::to_string(snapshot_every)},
        {"max-steps", std::to_string(max_steps)},
        {"seed", std::to_string(seed)},
    };
    for (const auto& [tag, kind] : bc_overrides) e.push_back({"bc." + std::to_string(tag), kind});
    return e;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

inline long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace detail

/// Sets one configuration key (flag name without dashes, or bc.<tag>).
inline void apply_config_entry(RunConfig& cfg, const std::string& raw_key,
                               const std::string& raw_value) {
  std::string key = detail::trim(raw_key);
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  const std::string v = detail::trim(raw_value);
  if (key == "case") {
    parse_case_id(v);
    cfg.case_id = v;
  } else if (key == "order") {
    const long n = detail::to_long(key, v);
    if (n < kMinDegree || n > kMaxRunDegree) {
      throw ConfigError("order: must be in [1, 8], got " + v);
    }
    cfg.order = static_cast<int>(n);
  } else if (key == "mesh") {
    cfg.mesh = v;
  } else if (key == "t-end") {
    cfg.t_end = detail::to_double(key, v);
    if (!(cfg.t_end > 0.0)) throw ConfigError("t-end: must be positive");
  } else if (key == "cfl") {
    cfg.cfl = detail::to_double(key, v);
    if (!(cfg.cfl > 0.0)) throw ConfigError("cfl: must be positive");
  } else if (key == "oe-scale") {
    cfg.oe_scale = detail::to_double(key, v);
    if (!(cfg.oe_scale > 0.0 && cfg.oe_scale <= 1.0)) {
      throw ConfigError("oe-scale: must be in (0, 1]");
    }
  } else if (key == "indicator-threshold") {
    cfg.threshold = detail::to_double(key, v);
    if (!(cfg.threshold >= 0.0)) throw ConfigError("indicator-threshold: must be >= 0");
  } else if (key == "oe-mode") {
    if (v != "auto" && v != "cartesian" && v != "curvilinear" && v != "off") {
      throw ConfigError("oe-mode: expected auto|cartesian|curvilinear|off, got '" + v + "'");
    }
    cfg.oe_mode = v;
  } else if (key == "flux") {
    if (v != "llf" && v != "ec") throw ConfigError("flux: expected llf|ec, got '" + v + "'");
    cfg.flux = v;
  } else if (key == "out") {
    if (v.empty()) throw ConfigError("out: empty output directory");
    cfg.out = v;
  } else if (key == "snapshot-every") {
    const long n = detail::to_long(key, v);
    if (n < 0) throw ConfigError("snapshot-every: must be >= 0");
    cfg.snapshot_every = static_cast<int>(n);
  } else if (key == "max-steps") {
    const long n = detail::to_long(key, v);
    if (n < 0) throw ConfigError("max-steps: must be >= 0");
    cfg.max_steps = static_cast<int>(n);
  } else if (key == "seed") {
    const long n = detail::to_long(key, v);
    if (n < 0) throw ConfigError("seed: must be >= 0");
    cfg.seed = static_cast<unsigned long>(n);
  } else if (key.rfind("bc.", 0) == 0) {
    const long tag = detail::to_long(key, key.substr(3));
    cfg.bc_overrides[static_cast<int>(tag)] = v;
  } else {
    throw ConfigError("unknown configuration key '" + raw_key + "'");
  }
}

/// Flat `key = value` file; '#' starts a comment.
inline void apply_config_stream(RunConfig& cfg, std::istream& is) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(lineno, "expected 'key = value'");
    }
    try {
      apply_config_entry(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& err) {
      throw ParseError(lineno, err.what());
    }
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path + "'");
  apply_config_stream(cfg, is);
}

/// Boundary kind from its textual form: slip-wall | outflow | inflow:rho,u,v,p.
inline BoundaryKind parse_boundary_kind(const std::string& text) {
  if (text == "slip-wall" || text == "wall") return SlipWall{};
  if (text == "outflow") return Outflow{};
  if (text.rfind("inflow:", 0) == 0) {
    const auto parts = detail::split(text.substr(7), ',');
    if (parts.size() != 4) throw ConfigError("bc: inflow needs rho,u,v,p");
    Primitive w{detail::to_double("bc", parts[0]), detail::to_double("bc", parts[1]),
                detail::to_double("bc", parts[2]), detail::to_double("bc", parts[3])};
    const State s = to_conservative(w);
    if (!is_admissible(s)) throw ConfigError("bc: inflow state is not admissible");
    return Inflow{s};
  }
  throw ConfigError("bc: unknown boundary kind '" + text + "'");
}

inline std::string default_mesh_spec(CaseId id) {
  switch (id) {
    case CaseId::kVortex: return "sinusoidal:20:1.5";
    case CaseId::kRiemann12:
    case CaseId::kRiemann13: return "cartesian:160";
    case CaseId::kDmr: return "cartesian:240x60";
    case CaseId::kFreestream: return "sinusoidal:10:1.5";
    default: return "";
  }
}

/// Builds the mesh described by `spec` on the case domain.
inline Mesh build_mesh_from_spec(const std::string& spec, const CaseSpec& cs, int degree) {
  const auto parts = detail::split(spec, ':');
  if (parts.empty()) throw ConfigError("mesh: empty mesh spec");
  const std::string& kind = parts[0];
  if (kind == "cartesian" && parts.size() == 2) {
    int nx = 0, ny = 0;
    if (const auto x = parts[1].find('x'); x != std::string::npos) {
      nx = static_cast<int>(detail::to_long("mesh", parts[1].substr(0, x)));
      ny = static_cast<int>(detail::to_long("mesh", parts[1].substr(x + 1)));
    } else {
      nx = ny = static_cast<int>(detail::to_long("mesh", parts[1]));
    }
    if (nx < 1 || ny < 1) throw ConfigError("mesh: element counts must be positive");
    return build_cartesian(nx, ny, cs.domain, degree, cs.periodic, cs.periodic);
  }
  if (kind == "sinusoidal" && (parts.size() == 2 || parts.size() == 3)) {
    if (cs.domain.x1 - cs.domain.x0 != cs.domain.y1 - cs.domain.y0 ||
        cs.domain.x0 != cs.domain.y0) {
      throw ConfigError("mesh: sinusoidal meshes need a square case domain");
    }
    const int m = static_cast<int>(detail::to_long("mesh", parts[1]));
    SinusoidalWarp warp;
    if (parts.size() == 3) warp.alpha = detail::to_double("mesh", parts[2]);
    return build_sinusoidal(m, cs.domain.x0, cs.domain.x1, degree, warp, cs.periodic);
  }
  if (kind == "file" && parts.size() >= 2) {
    const std::string path = spec.substr(5);
    Mesh mesh = load_mesh(path);
    if (mesh.degree != degree) {
      throw ConfigError("mesh: file has N=" + std::to_string(mesh.degree) +
                        " but order is " + std::to_string(degree));
    }
    return mesh;
  }
  throw ConfigError("mesh: unrecognized mesh spec '" + spec + "'");
}

/// Nominal element size of a structured mesh spec (domain width / elements).
inline double nominal_h(const Mesh& mesh) {
  double h = 0.0;
  for (const auto& g : mesh.elements) h = std::max(h, std::sqrt(g.area));
  return h;
}

inline FluxChoice parse_flux(const std::string& s) {
  return s == "ec" ? FluxChoice::kEc : FluxChoice::kLlf;
}

inline OeMode resolve_oe_mode(const std::string& s, const Mesh& mesh) {
  if (s == "off") return OeMode::kOff;
  if (s == "cartesian") {
    if (!mesh.is_axis_aligned_affine()) {
      throw ConfigError("oe-mode: cartesian requires an axis-aligned affine mesh");
    }
    return OeMode::kCartesian;
  }
  if (s == "curvilinear") return OeMode::kCurvilinear;
  return mesh.is_axis_aligned_affine() ? OeMode::kCartesian : OeMode::kCurvilinear;
}

/// Case, mesh, boundary conditions, integrator and solution of one run.
class Simulation {
 public:
  explicit Simulation(const RunConfig& cfg)
      : cfg_(cfg),
        case_(make_case(parse_case_id(cfg.case_id))),
        mesh_(build_mesh_from_spec(
            cfg.mesh.empty() ? default_mesh_spec(case_.id) : cfg.mesh, case_, cfg.order)) {
    if (cfg.mesh.empty() && case_.id == CaseId::kCustomMesh) {
      throw ConfigError("mesh: the custom-mesh case needs --mesh file:<path>");
    }
    resolve_boundaries();
    t_end_ = cfg.t_end > 0.0 ? cfg.t_end : case_.default_t_end;
    StepConfig sc;
    sc.cfl = cfg.cfl;
    sc.oe_scale = cfg.oe_scale;
    sc.threshold = cfg.threshold;
    sc.oe_mode = resolve_oe_mode(cfg.oe_mode, mesh_);
    integrator_ = std::make_unique<Integrator>(
        mesh_, case_.bcs, SpatialConfig{parse_flux(cfg.flux), VolumeForm::kEntropyStable}, sc);
    u_ = sample_field(mesh_, case_.initial, 0.0);
    for (const State& s : u_.nodal) require_admissible(s, "initial condition");
  }

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const RunConfig& config() const { return cfg_; }
  const CaseSpec& case_spec() const { return case_; }
  const Mesh& mesh() const { return mesh_; }
  const FieldState& field() const { return u_; }
  FieldState& field() { return u_; }
  Integrator& integrator() { return *integrator_; }
  double t_end() const { return t_end_; }
  int steps() const { return steps_; }

  bool done() const {
    return u_.t >= t_end_ * (1.0 - 1e-14) || (cfg_.max_steps > 0 && steps_ >= cfg_.max_steps);
  }

  StepReport advance() {
    double dt = integrator_->stable_dt(u_);
    if (u_.t + dt >= t_end_) dt = t_end_ - u_.t;
    StepReport r = integrator_->step(u_, dt);
    if (u_.t + 1e-14 * t_end_ >= t_end_) u_.t = t_end_;
    ++steps_;
    return r;
  }

  std::optional<Vec4> error_vs_exact() const {
    if (!case_.exact) return std::nullopt;
    const auto& exact = *case_.exact;
    const double t = u_.t;
    return l2_error(u_, [&](double x, double y) { return exact(x, y, t); }, mesh_);
  }

 private:
  void resolve_boundaries() {
    std::vector<int> tags;
    for (const Face& f : mesh_.faces) {
      if (f.is_boundary()) tags.push_back(f.tag);
    }
    for (const auto& [tag, text] : cfg_.bc_overrides) case_.bcs.set(tag, parse_boundary_kind(text));
    for (int tag : tags) {
      if (case_.bcs.has(tag)) continue;
      if (case_.id == CaseId::kCustomMesh) {
        case_.bcs.set(tag, SlipWall{});
      } else if (case_.id == CaseId::kFreestream) {
        case_.bcs.set(tag, Inflow{to_conservative(freestream_primitive())});
      } else {
        throw ConfigError("bc." + std::to_string(tag) + ": no boundary condition for tag");
      }
    }
  }

  RunConfig cfg_;
  CaseSpec case_;
  Mesh mesh_;
  double t_end_ = 0.0;
  std::unique_ptr<Integrator> integrator_;
  FieldState u_;
  int steps_ = 0;
};

// ---------------------------------------------------------------------------
// Output

inline void write_config_header(std::ostream& os, const RunConfig& cfg) {
  for (const auto& [k, v] : cfg.entries()) os << "# " << k << " = " << v << '\n';
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("out: cannot write '" + path.string() + "'");
  os << std::setprecision(17);
  return os;
}

inline const char* const kSnapshotFields[] = {"rho", "mom_x", "mom_y", "energy", "p"};

inline void write_snapshot(const std::filesystem::path& dir, const std::string& label,
                           const Simulation& sim, const std::vector<double>& indicators,
                           double threshold) {
  const Mesh& mesh = sim.mesh();
  const FieldState& u = sim.field();
  const int np = mesh.degree + 1;
  for (int fi = 0; fi < 5; ++fi) {
    auto os = open_output(dir / ("snapshot_" + label + "_" + kSnapshotFields[fi] + ".csv"));
    write_config_header(os, sim.config());
    os << "# t = " << format_double(u.t) << '\n';
    os << "elem,i,j,x,y,value\n";
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& g = mesh.elements[e];
      for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
          const int idx = node_index(i, j, mesh.degree);
          const State& s = u.at(e, idx);
          const double value = fi < 4 ? s[fi] : pressure(s);
          os << e << ',' << i << ',' << j << ',' << format_double(g.x[idx]) << ','
             << format_double(g.y[idx]) << ',' << format_double(value) << '\n';
        }
      }
    }
  }
  auto os = open_output(dir / ("indicator_" + label + ".csv"));
  write_config_header(os, sim.config());
  os << "# t = " << format_double(u.t) << '\n';
  os << "elem,I,flagged\n";
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double ind = e < static_cast<int>(indicators.size()) ? indicators[e] : 0.0;
    os << e << ',' << format_double(ind) << ',' << (ind > threshold ? 1 : 0) << '\n';
  }
}

struct RunResult {
  int exit_code = 0;
  int steps = 0;
  double t = 0.0;
  double oe_seconds = 0.0;
  double max_flagged_fraction = 0.0;
  double final_flagged_fraction = 0.0;
  double min_rho = 0.0;
  double min_p = 0.0;
  double max_rho = 0.0;
  std::optional<Vec4> errors;
  std::string message;
};

inline std::vector<double> current_indicators(Simulation& sim) {
  const auto& oe = sim.integrator().oe();
  if (oe.mode() != OeMode::kOff) return oe.indicators(sim.field());
  const OscillationEliminator probe(sim.mesh(), resolve_oe_mode("auto", sim.mesh()));
  return probe.indicators(sim.field());
}

/// Executes a configured run and writes snapshots, time series and errors
/// under cfg.out. Exit codes: 0 success, 1 configuration error, 2 loss of
/// admissibility (the last admissible state is written as snapshot "lastgood").
inline RunResult run(const RunConfig& cfg, std::ostream& log = std::cerr) {
  RunResult result;
  std::unique_ptr<Simulation> sim;
  std::filesystem::path dir(cfg.out);
  try {
    sim = std::make_unique<Simulation>(cfg);
    std::filesystem::create_directories(dir);
  } catch (const std::runtime_error& err) {
    result.exit_code = 1;
    result.message = err.what();
    log << "error: " << err.what() << '\n';
    return result;
  }

  const double threshold = cfg.threshold;
  auto series = open_output(dir / "timeseries.csv");
  write_config_header(series, cfg);
  series << "step,t,dt,I_eta,mass,mom_x,mom_y,energy,min_rho,min_p,flagged_fraction\n";
  auto write_row = [&](int step, double dt, double entropy, double ff) {
    const Vec4 tot = conservation_totals(sim->field(), sim->mesh());
    const FieldExtrema ext = field_extrema(sim->field());
    series << step << ',' << format_double(sim->field().t) << ',' << format_double(dt) << ','
           << format_double(entropy) << ',' << format_double(tot[0]) << ','
           << format_double(tot[1]) << ',' << format_double(tot[2]) << ','
           << format_double(tot[3]) << ',' << format_double(ext.min_rho) << ','
           << format_double(ext.min_p) << ',' << format_double(ff) << '\n';
  };
  write_row(0, 0.0, total_entropy(sim->field(), sim->mesh()), 0.0);
  write_snapshot(dir, "00000000", *sim, current_indicators(*sim), threshold);

  FieldState last_good = sim->field();
  result.min_rho = field_extrema(sim->field()).min_rho;
  result.min_p = field_extrema(sim->field()).min_p;
  result.max_rho = field_extrema(sim->field()).max_rho;
  try {
    while (!sim->done()) {
      last_good = sim->field();
      const StepReport r = sim->advance();
      const FieldExtrema ext = field_extrema(sim->field());
      if (!ext.finite) throw AdmissibilityError("non-finite state at step " + std::to_string(sim->steps()));
      result.min_rho = std::min(result.min_rho, ext.min_rho);
      result.min_p = std::min(result.min_p, ext.min_p);
      result.max_rho = std::max(result.max_rho, ext.max_rho);
      result.max_flagged_fraction = std::max(result.max_flagged_fraction, r.flagged_fraction);
      result.final_flagged_fraction = r.flagged_fraction;
      write_row(sim->steps(), r.dt, r.entropy, r.flagged_fraction);
      if (cfg.snapshot_every > 0 && sim->steps() % cfg.snapshot_every == 0 && !sim->done()) {
        char label[16];
        std::snprintf(label, sizeof label, "%08d", sim->steps());
        write_snapshot(dir, label, *sim, sim->integrator().oe().last_indicators(), threshold);
      }
    }
  } catch (const AdmissibilityError& err) {
    result.exit_code = 2;
    result.message = err.what();
    log << "error: " << err.what() << '\n';
    sim->field() = last_good;
    write_snapshot(dir, "lastgood", *sim, current_indicators(*sim), threshold);
    result.steps = sim->steps();
    result.t = last_good.t;
    result.oe_seconds = sim->integrator().total_oe_seconds();
    return result;
  }
  write_snapshot(dir, "final", *sim, current_indicators(*sim), threshold);
  result.steps = sim->steps();
  result.t = sim->field().t;
  result.oe_seconds = sim->integrator().total_oe_seconds();
  result.errors = sim->error_vs_exact();
  if (result.errors) {
    auto os = open_output(dir / "errors.csv");
    write_config_header(os, cfg);
    os << "t,err_rho,err_mx,err_my,err_E\n" << format_double(result.t);
    for (double e : *result.errors) os << ',' << format_double(e);
    os << '\n';
  }
  return result;
}

struct ConvergenceRow {
  double h = 0.0;
  Vec4 errors{};
  std::optional<Vec4> orders;
};

/// Mesh spec with its element count replaced by m (cartesian:M, sinusoidal:M[:a]).
inline std::string with_resolution(const std::string& spec, int m) {
  auto parts = detail::split(spec, ':');
  if (parts.size() < 2 || (parts[0] != "cartesian" && parts[0] != "sinusoidal")) {
    throw ConfigError("mesh: convergence studies need a cartesian or sinusoidal mesh spec");
  }
  parts[1] = std::to_string(m);
  std::string out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) out += ":" + parts[i];
  return out;
}

/// Runs cfg at each resolution and tabulates L2 errors and observed orders.
inline std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg,
                                                     const std::vector<int>& resolutions) {
  std::vector<ConvergenceRow> rows;
  for (int m : resolutions) {
    RunConfig c = cfg;
    const CaseSpec cs = make_case(parse_case_id(cfg.case_id));
    c.mesh = with_resolution(cfg.mesh.empty() ? default_mesh_spec(cs.id) : cfg.mesh, m);
    Simulation sim(c);
    if (!sim.case_spec().exact) {
      throw ConfigError("case: convergence studies need a case with an exact solution");
    }
    while (!sim.done()) sim.advance();
    ConvergenceRow row;
    row.h = (cs.domain.x1 - cs.domain.x0) / m;
    row.errors = *sim.error_vs_exact();
    rows.push_back(row);
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    Vec4 o;
    for (int c = 0; c < 4; ++c) {
      o[c] = observed_orders({rows[i - 1].errors[c], rows[i].errors[c]},
                             {rows[i - 1].h, rows[i].h})[0];
    }
    rows[i].orders = o;
  }
  return rows;
}

inline void write_convergence_csv(std::ostream& os, const RunConfig& cfg,
                                  const std::vector<ConvergenceRow>& rows) {
  write_config_header(os, cfg);
  os << "h,err_rho,err_mx,err_my,err_E,order_rho,order_mx,order_my,order_E\n";
  for (const auto& r : rows) {
    os << format_double(r.h);
    for (double e : r.errors) os << ',' << format_double(e);
    for (int c = 0; c < 4; ++c) os << ',' << (r.orders ? format_double((*r.orders)[c]) : "");
    os << '\n';
  }
}

}  // namespace esdg
