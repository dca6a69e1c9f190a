#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include <obsplit/errors.hpp>
#include <obsplit/relative_force.hpp>

#include "validation.hpp"

namespace obsplit::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + (dir / name).string() + "'");
  return f;
}

bool is_schwarzschild(const Scenario& s) { return s.spacetime.name == "schwarzschild"; }

// Chart coordinates to output units (metres for lengths, radians for angles).
Vec4 chart_out(const Scenario& s, const Vec4& k) {
  Vec4 o = k;
  const int lengths = is_schwarzschild(s) ? 2 : 4;
  for (int i = 0; i < lengths; ++i) o[i] *= s.units.length_m;
  return o;
}

Vec4 chart_in(const Scenario& s, const Vec4& k) {
  Vec4 o = k;
  const int lengths = is_schwarzschild(s) ? 2 : 4;
  for (int i = 0; i < lengths; ++i) o[i] /= s.units.length_m;
  return o;
}

void add_stats(CommandResult& r, const World& w) {
  if (w.observer) r.stats += w.observer->stats();
  if (w.frames) r.stats += w.frames->stats();
}

std::string join_row(std::initializer_list<std::string> cells) {
  std::string line;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) line += ',';
    first = false;
    line += c;
  }
  return line;
}

std::string vec_cells(const Vec3& v, double scale = 1.0) {
  return fmt(v[0] * scale) + "," + fmt(v[1] * scale) + "," + fmt(v[2] * scale);
}

std::string vec_cells(const Vec4& v) {
  return fmt(v[0]) + "," + fmt(v[1]) + "," + fmt(v[2]) + "," + fmt(v[3]);
}

std::vector<Vec4> read_targets(const Scenario& s) {
  std::string text;
  std::string origin;
  const std::string inline_prefix = "inline:";
  if (s.invert.targets_file.empty()) throw Error(ErrorKind::Config, "invert: no targets_file or targets_m given");
  if (s.invert.targets_file.rfind(inline_prefix, 0) == 0) {
    text = s.invert.targets_file.substr(inline_prefix.size());
    origin = s.source + ":invert.targets_m";
  } else {
    fs::path p = s.invert.targets_file;
    if (p.is_relative()) p = s.base_dir / p;
    std::ifstream in(p);
    if (!in) throw Error(ErrorKind::Io, "cannot read targets file '" + p.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    origin = p.string();
  }
  std::vector<Vec4> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double d = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) numeric = false;
      vals.push_back(d);
    }
    if (!numeric) {
      if (!header_seen && out.empty()) {
        header_seen = true;
        continue;
      }
      throw Error(ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": non-numeric target row");
    }
    if (vals.size() != 4)
      throw Error(ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": a target needs 4 coordinates");
    out.push_back(chart_in(s, Vec4(vals[0], vals[1], vals[2], vals[3])));
  }
  return out;
}

Worldline build_worldline(const Scenario& s, const World& w, std::vector<std::shared_ptr<const void>>& keep) {
  const WorldlineSpec& ws = s.worldline;
  if (ws.kind == "comoving") return worldline_comoving(w.frames, ws.x, s.tol);
  const Event start(w.chart->id(), ws.position);
  if (!w.chart->contains(ws.position)) throw Error(ErrorKind::Config, "worldline position lies outside the chart");
  if (ws.kind == "inertial") {
    auto curve = std::make_shared<const ObserverCurve>(
        make_inertial_observer(w.chart, start, ws.direction, ws.s_min, ws.s_max, s.tol));
    keep.push_back(curve);
    return worldline_from_observer(curve);
  }
  const double s_end = ws.s_max;
  auto geo = std::make_shared<const DenseSolution>(
      integrate_geodesic(*w.chart, GeodesicIVP{start, ws.direction}, s_end, s.tol));
  keep.push_back(geo);
  return worldline_from_geodesic(geo);
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Io:
    case ErrorKind::InvalidInput:
    case ErrorKind::Domain:
    case ErrorKind::NotInGroup:
    case ErrorKind::Signature:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CommandResult cmd_trace_cone(const Scenario& s, const fs::path& out) {
  CommandResult r;
  const World w = build_world(s);
  add_stats(r, w);
  const TraceConeSpec& tc = s.trace_cone;
  if (!w.frames->contains(tc.tau)) throw Error(ErrorKind::Config, "trace_cone.tau_s lies outside the frame range");
  const Frame4 frame = w.frames->frame(tc.tau);
  const Chart& chart = *w.chart;

  struct Ray {
    Vec3 x;
    Vec4 kappa = Vec4::Constant(kNaN);
    bool reached = false;
    double residual = kNaN;
    OdeStats stats;
  };
  std::vector<Ray> rays;
  for (double radius : tc.radii)
    for (int i = 0; i < tc.n_theta; ++i)
      for (int j = 0; j < tc.n_phi; ++j) {
        const double th = std::numbers::pi * (i + 0.5) / tc.n_theta;
        const double ph = 2.0 * std::numbers::pi * j / tc.n_phi;
        const Vec3 dir(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        rays.push_back(Ray{radius * dir, Vec4::Constant(kNaN), false, kNaN, OdeStats{}});
      }
  parallel_for(rays.size(), s.threads, [&](std::size_t k) {
    Ray& ray = rays[k];
    try {
      const DenseSolution sol =
          integrate_geodesic(chart, GeodesicIVP{frame.base, cone_vector(frame.columns, ray.x)}, 1.0, s.tol);
      ray.stats = sol.stats();
      if (!sol.reached_end()) return;
      ray.reached = true;
      ray.kappa = sol.end_position();
      const Vec4 v = sol.end_velocity();
      const Mat4 g = chart.metric_at(ray.kappa).g;
      double scale = 0.0;
      for (int m = 0; m < 4; ++m) scale += std::abs(g(m, m)) * v[m] * v[m];
      ray.residual = std::abs(v.dot(g * v)) / scale;
    } catch (const Error&) {
      ray.reached = false;
    }
  });

  auto f = open_out(out, "trace_cone.csv");
  f << "tau_s,x1_m,x2_m,x3_m,kappa0,kappa1,kappa2,kappa3,reach_flag,lightlike_residual\n";
  int unreached = 0;
  for (const Ray& ray : rays) {
    r.stats += ray.stats;
    unreached += ray.reached ? 0 : 1;
    f << join_row({fmt(tc.tau * s.units.time_s), vec_cells(ray.x, s.units.length_m),
                   vec_cells(ray.reached ? chart_out(s, ray.kappa) : ray.kappa), ray.reached ? "1" : "0",
                   fmt(ray.residual)})
      << '\n';
  }
  r.outputs.push_back("trace_cone.csv");
  r.diagnostics.emplace_back("rays", std::to_string(rays.size()));
  r.diagnostics.emplace_back("unreached_rays", std::to_string(unreached));
  return r;
}

CommandResult cmd_invert(const Scenario& s, const fs::path& out) {
  CommandResult r;
  const std::vector<Vec4> targets = read_targets(s);
  const World w = build_world(s);
  add_stats(r, w);
  auto f = open_out(out, "invert.csv");
  f << "target,kappa0,kappa1,kappa2,kappa3,tau_s,x1_m,x2_m,x3_m,residual,condition,regular\n";
  int unresolved = 0, origin = 0, rows = 0, starts = 0, converged = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const InversionResult inv = invert_observer_map(*w.frames, Event(w.chart->id(), targets[t]), s.search, s.tol);
    starts += inv.starts;
    converged += inv.converged;
    if (inv.origin_excluded) ++origin;
    if (inv.preimages.empty()) ++unresolved;
    for (const Preimage& p : inv.preimages) {
      f << join_row({std::to_string(t), vec_cells(chart_out(s, targets[t])), fmt(p.tau * s.units.time_s),
                     vec_cells(p.x, s.units.length_m), fmt(p.residual), fmt(p.condition), p.regular ? "1" : "0"})
        << '\n';
      ++rows;
    }
  }
  r.outputs.push_back("invert.csv");
  r.diagnostics.emplace_back("targets", std::to_string(targets.size()));
  r.diagnostics.emplace_back("rows", std::to_string(rows));
  r.diagnostics.emplace_back("unresolved_targets", std::to_string(unresolved));
  r.diagnostics.emplace_back("origin_excluded_targets", std::to_string(origin));
  r.diagnostics.emplace_back("newton_starts", std::to_string(starts));
  r.diagnostics.emplace_back("newton_converged", std::to_string(converged));
  return r;
}

CommandResult cmd_observe(const Scenario& s, const fs::path& out) {
  CommandResult r;
  const World w = build_world(s);
  add_stats(r, w);
  std::vector<std::shared_ptr<const void>> keep;
  const Worldline wl = build_worldline(s, w, keep);
  ObserveOptions oo;
  oo.search = s.search;
  oo.h = s.worldline.h;
  const ObserveReport rep = observe_curve(*w.frames, wl, s.worldline.s_samples, oo, s.tol);

  const double L = s.units.length_m, T = s.units.time_s;
  auto f = open_out(out, "observe.csv");
  f << "s_s,tau_s,x1_m,x2_m,x3_m,tau_dot,tau_ddot_per_s,v1_m_per_s,v2_m_per_s,v3_m_per_s,"
       "dv1_m_per_s2,dv2_m_per_s2,dv3_m_per_s2,ambiguous,not_an_observer,time_inconsistent\n";
  int flagged = 0;
  for (const auto& smp : rep.samples) {
    f << join_row({fmt(smp.s * T), fmt(smp.tau * T), vec_cells(smp.x, L), fmt(smp.tau_dot), fmt(smp.tau_ddot / T),
                   vec_cells(smp.v, L / T), vec_cells(smp.dv_dtau, L / (T * T)), smp.ambiguous ? "1" : "0",
                   smp.not_an_observer ? "1" : "0", smp.time_inconsistent ? "1" : "0"})
      << '\n';
    if (smp.ambiguous || smp.not_an_observer || smp.time_inconsistent) ++flagged;
  }
  if (rep.branch_lost) f << "# branch_lost: " << rep.diagnostics << '\n';
  r.outputs.push_back("observe.csv");
  r.diagnostics.emplace_back("requested_samples", std::to_string(s.worldline.s_samples.size()));
  r.diagnostics.emplace_back("samples", std::to_string(rep.samples.size()));
  r.diagnostics.emplace_back("flagged_samples", std::to_string(flagged));
  r.diagnostics.emplace_back("branch_lost", rep.branch_lost ? "true" : "false");
  return r;
}

CommandResult cmd_newton_limit(const Scenario& s, const fs::path& out) {
  CommandResult r;
  const LimitReport rep = newtonian_limit_report(s.newton.limit, s.newton.c_list);
  const double L = s.units.length_m, T = s.units.time_s;
  const double force = L / (T * T);

  bool pass = true;
  std::vector<std::string> failures;
  const LimitPreset p = s.newton.limit.preset;
  if (p == LimitPreset::SrInertial) {
    for (const auto& row : rep.rows)
      if (!(row.kinematic_residual <= 1e-6 * row.kinematic_scale)) failures.push_back("kinematic residual");
    if (!(rep.pseudo_force_residual_slope >= 2.5 && rep.pseudo_force_residual_slope <= 3.5))
      failures.push_back("pseudo-force residual slope");
  } else if (p == LimitPreset::Comoving) {
    for (const auto& row : rep.rows)
      if (!(std::max({row.max_tau_dot_dev, row.tau_dot_series_residual, row.pseudo_force, row.kinematic_residual}) <=
            1e-10))
        failures.push_back("comoving residual");
  } else if (p == LimitPreset::JetFighter) {
    if (!rep.jet_first_order_ok) failures.push_back("jet-fighter bound");
  }
  pass = failures.empty();

  auto txt = open_out(out, "newton_limit.txt");
  txt << "scenario: " << rep.scenario << '\n'
      << "gated: " << (rep.gated ? "true" : "false") << '\n'
      << "pass: " << (pass ? "true" : "false") << '\n'
      << "tau_dot_residual_slope: " << fmt(rep.tau_dot_residual_slope) << '\n'
      << "pseudo_force_slope: " << fmt(rep.pseudo_force_slope) << '\n'
      << "pseudo_force_residual_slope: " << fmt(rep.pseudo_force_residual_slope) << '\n'
      << "jet_first_order: " << fmt(rep.jet_first_order) << '\n'
      << "jet_first_order_ok: " << (rep.jet_first_order_ok ? "true" : "false") << '\n'
      << "rows: " << rep.rows.size() << '\n';
  txt << "failures:" << (failures.empty() ? " []" : "") << '\n';
  for (const auto& fl : failures) txt << "  - " << fl << '\n';
  txt << "notes:" << (rep.notes.empty() ? " []" : "") << '\n';
  for (const auto& n : rep.notes) txt << "  - " << n << '\n';

  auto csv = open_out(out, "newton_limit.csv");
  csv << "c_m_per_s,max_tau_dot_dev,tau_dot_series_residual,pseudo_force_N,pseudo_force_series_residual_N,"
         "kinematic_residual_N,kinematic_scale_N,actual_force_N,samples\n";
  for (const auto& row : rep.rows)
    csv << join_row({fmt(row.c * L / T), fmt(row.max_tau_dot_dev), fmt(row.tau_dot_series_residual),
                     fmt(row.pseudo_force * force), fmt(row.pseudo_force_series_residual * force),
                     fmt(row.kinematic_residual * force), fmt(row.kinematic_scale * force),
                     fmt(row.actual_force * force), std::to_string(row.samples)})
        << '\n';
  r.outputs = {"newton_limit.txt", "newton_limit.csv"};
  r.diagnostics.emplace_back("preset", rep.scenario);
  r.diagnostics.emplace_back("gated", rep.gated ? "true" : "false");
  r.diagnostics.emplace_back("pass", pass ? "true" : "false");
  if (rep.gated && !pass) r.exit_code = kExitValidation;
  return r;
}

CommandResult cmd_validate(const Scenario& s, const fs::path& out, std::ostream& log) {
  CommandResult r;
  const std::vector<Check> checks = run_validation(s, s.seed);
  auto f = open_out(out, "validate.csv");
  f << "check,residual,tolerance,status,detail\n";
  int failed = 0;
  for (const Check& c : checks) {
    const char* status = c.skipped ? "SKIP" : (c.pass ? "PASS" : "FAIL");
    if (!c.pass) ++failed;
    f << join_row({c.name, fmt(c.residual), fmt(c.tolerance), status, c.detail}) << '\n';
    char brief[64];
    std::snprintf(brief, sizeof brief, " residual=%.3g tol=%.3g", c.residual, c.tolerance);
    log << status << ' ' << c.name << brief;
    if (!c.detail.empty()) log << " (" << c.detail << ')';
    log << '\n';
  }
  r.outputs.push_back("validate.csv");
  r.diagnostics.emplace_back("checks", std::to_string(checks.size()));
  r.diagnostics.emplace_back("failed_checks", std::to_string(failed));
  if (failed > 0) r.exit_code = kExitValidation;
  return r;
}

void write_manifest(const Scenario& s, const CommandResult& r, const ManifestInfo& info, const fs::path& out) {
  auto f = open_out(out, "manifest.txt");
  f << "tool: obsplit\n"
    << "version: " << kVersion << '\n'
    << "command: " << info.command << '\n'
    << "scenario: " << s.source << '\n'
    << "scenario_name: " << s.name << '\n'
    << "scenario_hash: " << s.hash << '\n'
    << "threads: " << info.threads << '\n'
    << "seed: " << info.seed << '\n'
    << "exit_code: " << info.exit_code << '\n'
    << "wall_clock_s: " << fmt(info.wall_clock_s) << '\n';
  f << "outputs:" << (r.outputs.empty() ? " []" : "") << '\n';
  for (const auto& o : r.outputs) f << "  - " << o << '\n';
  f << "integrator:\n"
    << "  accepted_steps: " << r.stats.accepted << '\n'
    << "  rejected_steps: " << r.stats.rejected << '\n'
    << "  rhs_evals: " << r.stats.rhs_evals << '\n'
    << "  max_error_estimate: " << fmt(r.stats.max_error_estimate) << '\n';
  f << "diagnostics:" << (r.diagnostics.empty() ? " {}" : "") << '\n';
  for (const auto& [k, v] : r.diagnostics) f << "  " << k << ": " << v << '\n';
  if (!info.error.empty()) f << "error: \"" << info.error << "\"\n";
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Observer splittings of spacetime: light-cone tracing, inversion, relative motion"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  int threads = 0;
  long long seed = -1;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"trace-cone", "Static observer map on an angular x radius grid"},
      {"invert", "Preimages of target events under the kinematic observer map"},
      {"observe", "Relative motion of a worldline seen by the observer"},
      {"newton-limit", "Newtonian-limit sweep over c"},
      {"validate", "Invariant suite on the scenario"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", scenario_path, "Scenario file or builtin:<name>")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--tol-override", overrides, "Tolerance override KEY=VAL (repeatable)");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Seed for random invariant sampling")->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  Scenario s;
  try {
    s = load_scenario(scenario_path, overrides);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  if (threads > 0) {
    s.threads = threads;
    s.search.threads = threads;
    s.newton.limit.threads = threads;
  }
  if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
  const fs::path dir = out_dir.empty() ? s.output_dir : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory '" << dir.string() << "': " << ec.message() << '\n';
    return kExitConfig;
  }

  ManifestInfo info;
  info.command = command;
  info.threads = s.threads;
  info.seed = s.seed;
  const auto t0 = std::chrono::steady_clock::now();
  CommandResult result;
  try {
    if (command == "trace-cone") result = cmd_trace_cone(s, dir);
    else if (command == "invert") result = cmd_invert(s, dir);
    else if (command == "observe") result = cmd_observe(s, dir);
    else if (command == "newton-limit") result = cmd_newton_limit(s, dir);
    else result = cmd_validate(s, dir, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    result.exit_code = exit_code_for(e.kind());
    info.error = e.what();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    result.exit_code = kExitNumerical;
    info.error = e.what();
  }
  info.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  info.exit_code = result.exit_code;
  try {
    write_manifest(s, result, info, dir);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  out << command << ": exit " << result.exit_code << ", outputs in " << dir.string() << '\n';
  return result.exit_code;
}

}  // namespace obsplit::cli
