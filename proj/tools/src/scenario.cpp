#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <obsplit/errors.hpp>

namespace obsplit::cli {

namespace {

const std::map<std::string, std::string>& builtins() {
  static const std::map<std::string, std::string> table{
      {"minkowski", R"(name: minkowski-standard
spacetime:
  name: minkowski
  c_m_per_s: 1
observer:
  kind: inertial
  position: {ct_m: 0, x_m: [0, 0, 0]}
  velocity_m_per_s: [0, 0, 0]
frame:
  kind: fw
  tau_min_s: -10
  tau_max_s: 10
trace_cone:
  tau_s: 0
  radii_m: [1, 2]
  n_theta: 4
  n_phi: 8
invert:
  targets_m: [[5, 3, 4, 0]]
validate:
  samples: 10
  max_radius_m: 5
)"},
      {"schwarzschild", R"(name: schwarzschild-static
spacetime:
  name: schwarzschild
  c_m_per_s: 1
  radius_m: 1
observer:
  kind: static
  position: {ct_m: 0, r_m: 10, theta_rad: 1.5707963267948966, phi_rad: 0}
frame:
  kind: fw
  tau_min_s: -10
  tau_max_s: 10
search:
  box_min_m: [-6, -6, -6]
  box_max_m: [6, 6, 6]
  n_x: 5
trace_cone:
  tau_s: 0
  radii_m: [1, 2]
  n_theta: 4
  n_phi: 8
validate:
  samples: 10
  max_radius_m: 4
)"},
      {"corrupted-frame", R"(name: corrupted-frame
spacetime:
  name: minkowski
  c_m_per_s: 1
observer:
  kind: inertial
  position: {ct_m: 0, x_m: [0, 0, 0]}
frame:
  kind: fw
  initial:
    - [1, 0, 0, 0]
    - [0, 1, 0.2, 0]
    - [0, 0, 1, 0]
    - [0, 0, 0, 1]
validate:
  samples: 4
)"},
  };
  return table;
}

[[noreturn]] void fail_at(const std::string& origin, const YAML::Node& n, const std::string& msg) {
  std::ostringstream os;
  os << origin;
  if (n.IsDefined() && !n.Mark().is_null()) os << ':' << n.Mark().line + 1 << ':' << n.Mark().column + 1;
  os << ": " << msg;
  throw Error(ErrorKind::Config, os.str());
}

// Typed access to a mapping that rejects unknown keys.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, const std::string& origin,
          std::set<std::string> allowed)
      : node_(node), path_(std::move(path)), origin_(origin) {
    if (!node_.IsDefined() || node_.IsNull()) return;
    if (!node_.IsMap()) fail_at(origin_, node_, "'" + path_ + "' must be a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail_at(origin_, kv.first, "unknown key '" + key + "' in '" + path_ + "'");
    }
  }

  bool defined() const { return present(); }
  bool has(const char* key) const { return present() && node_[key].IsDefined() && !node_[key].IsNull(); }
  YAML::Node raw(const char* key) const { return present() ? node_[key] : YAML::Node(); }
  const std::string& origin() const { return origin_; }

  double num(const char* key, double def) const {
    if (!has(key)) return def;
    return scalar<double>(node_[key], key);
  }
  int integer(const char* key, int def) const {
    if (!has(key)) return def;
    return scalar<int>(node_[key], key);
  }
  std::string str(const char* key, const std::string& def) const {
    if (!has(key)) return def;
    return scalar<std::string>(node_[key], key);
  }
  std::vector<double> list(const char* key, std::vector<double> def) const {
    if (!has(key)) return def;
    const YAML::Node n = node_[key];
    if (!n.IsSequence()) fail_at(origin_, n, "'" + path_ + "." + key + "' must be a list");
    std::vector<double> out;
    for (const auto& e : n) out.push_back(scalar<double>(e, key));
    return out;
  }
  Vec3 vec3(const char* key, const Vec3& def) const {
    if (!has(key)) return def;
    const auto v = list(key, {});
    if (v.size() != 3) fail_at(origin_, node_[key], "'" + path_ + "." + key + "' needs 3 entries");
    return {v[0], v[1], v[2]};
  }
  Section sub(const char* key, std::set<std::string> allowed) const {
    return Section(raw(key), path_ + "." + key, origin_, std::move(allowed));
  }
  [[noreturn]] void fail(const char* key, const std::string& msg) const {
    fail_at(origin_, has(key) ? node_[key] : node_, msg);
  }

 private:
  bool present() const { return node_.IsDefined() && node_.IsMap(); }

  template <class T>
  T scalar(const YAML::Node& n, const char* key) const {
    if (!n.IsScalar()) fail_at(origin_, n, "'" + path_ + "." + key + "' must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail_at(origin_, n, "'" + path_ + "." + key + "' has an invalid value '" + n.Scalar() + "'");
    }
  }

  YAML::Node node_;
  std::string path_;
  std::string origin_;
};

void canonical(const YAML::Node& n, std::ostringstream& os) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      std::map<std::string, YAML::Node> sorted;
      for (const auto& kv : n) sorted.emplace(kv.first.as<std::string>(), kv.second);
      os << '{';
      bool first = true;
      for (const auto& [k, v] : sorted) {
        if (!first) os << ',';
        first = false;
        os << k << ':';
        canonical(v, os);
      }
      os << '}';
      break;
    }
    case YAML::NodeType::Sequence: {
      os << '[';
      for (std::size_t i = 0; i < n.size(); ++i) {
        if (i) os << ',';
        canonical(n[i], os);
      }
      os << ']';
      break;
    }
    case YAML::NodeType::Scalar: {
      // numbers are normalized so that 1, 1.0 and 1e0 hash alike
      double d = 0.0;
      if (YAML::convert<double>::decode(n, d) && std::isfinite(d)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        os << buf;
      } else {
        os << std::quoted(n.Scalar());
      }
      break;
    }
    default:
      os << "~";
  }
}

const std::set<std::string> kToleranceKeys{"rel_tol", "abs_tol", "fd_step_m", "inv_tol",
                                            "merge_tol", "cond_max", "max_iter"};

Vec4 parse_position(const Section& s, const SpacetimeSpec& st, const Units& u) {
  if (!s.defined()) return Vec4::Zero();
  if (st.name == "schwarzschild") {
    for (const char* k : {"r_m", "theta_rad", "phi_rad"})
      if (!s.has(k)) s.fail(k, std::string("Schwarzschild position needs '") + k + "'");
    return {u.length(s.num("ct_m", 0.0)), u.length(s.num("r_m", 0.0)), s.num("theta_rad", 0.0),
            s.num("phi_rad", 0.0)};
  }
  const Vec3 x = s.vec3("x_m", Vec3::Zero());
  return {u.length(s.num("ct_m", 0.0)), u.length(x[0]), u.length(x[1]), u.length(x[2])};
}

const std::set<std::string> kPositionKeys{"ct_m", "x_m", "r_m", "theta_rad", "phi_rad"};

// d kappa^a / dt in internal units.
Vec3 parse_velocity(const Section& s, const SpacetimeSpec& st, const Units& u) {
  if (st.name == "schwarzschild") {
    const Section v = s.sub("coordinate_velocity", {"dr_dt_m_per_s", "dtheta_dt_rad_per_s", "dphi_dt_rad_per_s"});
    return {u.speed(v.num("dr_dt_m_per_s", 0.0)), u.rate(v.num("dtheta_dt_rad_per_s", 0.0)),
            u.rate(v.num("dphi_dt_rad_per_s", 0.0))};
  }
  const Vec3 v = s.vec3("velocity_m_per_s", Vec3::Zero());
  return {u.speed(v[0]), u.speed(v[1]), u.speed(v[2])};
}

std::vector<double> scaled(std::vector<double> v, double (Units::*f)(double) const, const Units& u) {
  for (double& x : v) x = (u.*f)(x);
  return v;
}

std::vector<double> parse_samples(const Section& s, const Units& u, const char* list_key, const char* grid_key) {
  if (s.has(list_key)) return scaled(s.list(list_key, {}), &Units::time, u);
  if (s.has(grid_key)) {
    const Section g = s.sub(grid_key, {"min_s", "max_s", "n"});
    const int n = g.integer("n", 5);
    if (n < 1) g.fail("n", "sample count must be >= 1");
    const double a = u.time(g.num("min_s", 0.0));
    const double b = u.time(g.num("max_s", 1.0));
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return out;
  }
  return {0.0, 1.0, 2.0};
}

}  // namespace

std::vector<std::string> builtin_scenarios() {
  std::vector<std::string> out;
  for (const auto& [k, v] : builtins()) out.push_back(k);
  return out;
}

std::optional<std::string> builtin_scenario_text(const std::string& name) {
  const auto it = builtins().find(name);
  if (it == builtins().end()) return std::nullopt;
  return it->second;
}

std::string sha256_hex(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& tol_overrides) {
  const std::string prefix = "builtin:";
  if (path.rfind(prefix, 0) == 0) {
    const auto text = builtin_scenario_text(path.substr(prefix.size()));
    if (!text) throw Error(ErrorKind::Config, "unknown built-in scenario '" + path + "'");
    return parse_scenario(*text, path, std::filesystem::current_path(), tol_overrides);
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read scenario '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path, std::filesystem::path(path).parent_path(), tol_overrides);
}

Scenario parse_scenario(const std::string& text, const std::string& origin,
                        const std::filesystem::path& base_dir,
                        const std::vector<std::string>& tol_overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::Config, origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                                       std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) fail_at(origin, root, "scenario must be a mapping");

  for (const auto& ov : tol_overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Config, "--tol-override expects KEY=VAL, got '" + ov + "'");
    const std::string key = ov.substr(0, eq);
    const std::string val = ov.substr(eq + 1);
    if (!kToleranceKeys.count(key)) throw Error(ErrorKind::Config, "--tol-override: unknown tolerance '" + key + "'");
    double d = 0.0;
    if (!YAML::convert<double>::decode(YAML::Node(val), d))
      throw Error(ErrorKind::Config, "--tol-override: '" + val + "' is not a number");
    root["tolerances"][key] = val;
  }

  Scenario s;
  s.source = origin;
  s.base_dir = base_dir;
  std::ostringstream canon;
  canonical(root, canon);
  s.canonical = canon.str();
  s.hash = sha256_hex(s.canonical);

  const Section top(root, "scenario", origin,
                    {"name", "units", "spacetime", "observer", "frame", "tolerances", "search", "trace_cone",
                     "invert", "observe", "newton_limit", "validate", "output", "threads", "seed"});
  s.name = top.str("name", "unnamed");
  s.threads = top.integer("threads", 1);
  if (s.threads < 1) top.fail("threads", "threads must be >= 1");
  s.seed = static_cast<std::uint64_t>(top.num("seed", 12345.0));

  const Section units = top.sub("units", {"length_m", "time_s"});
  s.units.length_m = units.num("length_m", 1.0);
  s.units.time_s = units.num("time_s", 1.0);
  if (!(s.units.length_m > 0.0) || !(s.units.time_s > 0.0)) units.fail("length_m", "units must be > 0");
  const Units& u = s.units;

  const Section st = top.sub("spacetime", {"name", "c_m_per_s", "radius_m", "gm_m3_per_s2"});
  s.spacetime.name = st.str("name", "minkowski");
  s.spacetime.c = u.speed(st.num("c_m_per_s", u.length_m / u.time_s));
  if (!(s.spacetime.c > 0.0)) st.fail("c_m_per_s", "c must be > 0");
  if (s.spacetime.name == "schwarzschild") {
    if (st.has("radius_m"))
      s.spacetime.radius = u.length(st.num("radius_m", 0.0));
    else if (st.has("gm_m3_per_s2"))
      s.spacetime.radius = 2.0 * u.gm(st.num("gm_m3_per_s2", 0.0)) / (s.spacetime.c * s.spacetime.c);
    else
      st.fail("name", "Schwarzschild needs radius_m or gm_m3_per_s2");
    if (!(s.spacetime.radius > 0.0)) st.fail("radius_m", "Schwarzschild radius must be > 0");
  } else if (s.spacetime.name != "minkowski") {
    st.fail("name", "unknown spacetime '" + s.spacetime.name + "' (minkowski, schwarzschild)");
  }

  const Section ob = top.sub("observer", {"kind", "position", "velocity_m_per_s", "coordinate_velocity",
                                          "a_m_per_s2", "program_a_m_per_s2", "tau_min_s", "tau_max_s"});
  s.observer.kind = ob.str("kind", s.spacetime.name == "schwarzschild" ? "static" : "inertial");
  s.observer.position = parse_position(ob.sub("position", kPositionKeys), s.spacetime, u);
  if (s.spacetime.name == "schwarzschild" && !ob.has("position")) ob.fail("position", "observer needs a position");
  s.observer.velocity = parse_velocity(ob, s.spacetime, u);
  s.observer.accel = u.accel(ob.num("a_m_per_s2", 0.0));
  const Vec3 pa = ob.vec3("program_a_m_per_s2", Vec3::Zero());
  s.observer.program_accel = {u.accel(pa[0]), u.accel(pa[1]), u.accel(pa[2])};
  s.observer.tau_min = u.time(ob.num("tau_min_s", -10.0));
  s.observer.tau_max = u.time(ob.num("tau_max_s", 10.0));
  static const std::set<std::string> kinds{"inertial", "accelerated", "static", "program"};
  if (!kinds.count(s.observer.kind)) ob.fail("kind", "unknown observer kind '" + s.observer.kind + "'");
  if (s.observer.kind == "accelerated" && s.spacetime.name != "minkowski")
    ob.fail("kind", "accelerated observers need the Minkowski spacetime");
  if (s.observer.kind == "accelerated" && !(s.observer.accel > 0.0)) ob.fail("a_m_per_s2", "a_m_per_s2 must be > 0");

  const Section fr = top.sub("frame", {"kind", "omega_rad_per_s", "axis", "initial", "tau_min_s", "tau_max_s"});
  s.frame.kind = fr.str("kind", "fw");
  if (s.frame.kind != "fw" && s.frame.kind != "rotating") fr.fail("kind", "frame kind must be fw or rotating");
  s.frame.omega = u.rate(fr.num("omega_rad_per_s", 0.0));
  s.frame.axis = fr.integer("axis", 3);
  if (s.frame.axis < 1 || s.frame.axis > 3) fr.fail("axis", "axis must be 1, 2 or 3");
  s.frame.tau_min = u.time(fr.num("tau_min_s", -10.0));
  s.frame.tau_max = u.time(fr.num("tau_max_s", 10.0));
  if (!(s.frame.tau_min <= 0.0 && s.frame.tau_max >= 0.0)) fr.fail("tau_min_s", "frame range must contain 0");
  if (fr.has("initial")) {
    const YAML::Node m = fr.raw("initial");
    if (!m.IsSequence() || m.size() != 4) fr.fail("initial", "frame.initial must be 4 rows of 4 numbers");
    Mat4 x;
    for (int i = 0; i < 4; ++i) {
      const YAML::Node row = m[static_cast<std::size_t>(i)];
      if (!row.IsSequence() || row.size() != 4) fail_at(origin, row, "frame.initial rows need 4 numbers");
      for (int j = 0; j < 4; ++j) {
        try {
          x(i, j) = row[static_cast<std::size_t>(j)].as<double>();
        } catch (const YAML::Exception&) {
          fail_at(origin, row, "frame.initial entries must be numbers");
        }
      }
    }
    s.frame.initial = x;
  }

  const Section tl = top.sub("tolerances", kToleranceKeys);
  s.tol.rel_tol = tl.num("rel_tol", s.tol.rel_tol);
  s.tol.abs_tol = tl.num("abs_tol", s.tol.abs_tol);
  s.tol.fd_step = u.length(tl.num("fd_step_m", s.tol.fd_step * u.length_m));
  s.search.inv_tol = tl.num("inv_tol", s.search.inv_tol);
  s.search.merge_tol = tl.num("merge_tol", s.search.merge_tol);
  s.search.cond_max = tl.num("cond_max", s.search.cond_max);
  s.search.max_iter = tl.integer("max_iter", s.search.max_iter);
  for (const char* k : {"rel_tol", "abs_tol", "fd_step_m", "inv_tol", "merge_tol", "cond_max"})
    if (tl.has(k) && !(tl.num(k, 0.0) > 0.0)) tl.fail(k, std::string("tolerance '") + k + "' must be > 0");
  if (s.search.max_iter < 1) tl.fail("max_iter", "max_iter must be >= 1");

  const Section se = top.sub("search", {"tau_min_s", "tau_max_s", "box_min_m", "box_max_m", "n_x", "n_tau"});
  s.search.tau_min = u.time(se.num("tau_min_s", u.time_s * s.search.tau_min));
  s.search.tau_max = u.time(se.num("tau_max_s", u.time_s * s.search.tau_max));
  const Vec3 bmin = se.vec3("box_min_m", s.search.box_min * u.length_m);
  const Vec3 bmax = se.vec3("box_max_m", s.search.box_max * u.length_m);
  s.search.box_min = bmin / u.length_m;
  s.search.box_max = bmax / u.length_m;
  s.search.n_x = se.integer("n_x", s.search.n_x);
  s.search.n_tau = se.integer("n_tau", s.search.n_tau);
  if (s.search.n_x < 1 || s.search.n_tau < 1) se.fail("n_x", "grid sizes must be >= 1");
  if (!(s.search.box_min.array() < s.search.box_max.array()).all()) se.fail("box_min_m", "empty search box");
  s.search.threads = s.threads;

  const Section tc = top.sub("trace_cone", {"tau_s", "radii_m", "n_theta", "n_phi"});
  s.trace_cone.tau = u.time(tc.num("tau_s", 0.0));
  s.trace_cone.radii = scaled(tc.list("radii_m", {1.0, 2.0}), &Units::length, u);
  s.trace_cone.n_theta = tc.integer("n_theta", 4);
  s.trace_cone.n_phi = tc.integer("n_phi", 8);
  if (s.trace_cone.n_theta < 1 || s.trace_cone.n_phi < 1) tc.fail("n_theta", "angular grid sizes must be >= 1");
  for (double r : s.trace_cone.radii)
    if (!(r > 0.0)) tc.fail("radii_m", "radii must be > 0");

  const Section iv = top.sub("invert", {"targets_file", "targets_m"});
  s.invert.targets_file = iv.str("targets_file", "");
  if (iv.has("targets_m")) {
    // materialized into the same representation as a targets file
    const YAML::Node t = iv.raw("targets_m");
    if (!t.IsSequence()) iv.fail("targets_m", "targets_m must be a list of 4-vectors");
    std::ostringstream csv;
    csv << "kappa0,kappa1,kappa2,kappa3\n";
    for (const auto& row : t) {
      if (!row.IsSequence() || row.size() != 4) fail_at(origin, row, "targets need 4 coordinates");
      for (std::size_t j = 0; j < 4; ++j) csv << (j ? "," : "") << row[j].Scalar();
      csv << '\n';
    }
    s.invert.targets_file = "inline:" + csv.str();
  }

  const Section obs = top.sub("observe", {"worldline", "s_samples_s", "s_grid", "h_s"});
  const Section wl = obs.sub("worldline", {"kind", "position", "velocity_m_per_s", "coordinate_velocity",
                                           "direction", "x_m", "s_min", "s_max"});
  s.worldline.kind = wl.str("kind", "inertial");
  if (s.worldline.kind != "inertial" && s.worldline.kind != "comoving" && s.worldline.kind != "lightlike")
    wl.fail("kind", "worldline kind must be inertial, comoving or lightlike");
  s.worldline.position = parse_position(wl.sub("position", kPositionKeys), s.spacetime, u);
  const Vec3 wv = parse_velocity(wl, s.spacetime, u);
  s.worldline.direction = {s.spacetime.c, wv[0], wv[1], wv[2]};
  if (wl.has("direction")) {
    const auto d = wl.list("direction", {});
    if (d.size() != 4) wl.fail("direction", "direction needs 4 components");
    s.worldline.direction = {d[0], d[1], d[2], d[3]};
  }
  const Vec3 wx = wl.vec3("x_m", Vec3(1.0, 0.0, 0.0) * u.length_m);
  s.worldline.x = wx / u.length_m;
  s.worldline.s_min = wl.num("s_min", -10.0);
  s.worldline.s_max = wl.num("s_max", 10.0);
  s.worldline.s_samples = parse_samples(obs, u, "s_samples_s", "s_grid");
  s.worldline.h = u.time(obs.num("h_s", 1e-3 * u.time_s));
  if (!(s.worldline.h > 0.0)) obs.fail("h_s", "h_s must be > 0");

  const Section nl = top.sub("newton_limit",
                             {"preset", "c_list_m_per_s", "y0_m", "w_m_per_s", "mass_kg", "s_samples_s", "h_s",
                              "a_m_per_s2", "omega_rad_per_s", "gm_m3_per_s2", "r_observer_m", "r_body_m",
                              "jet_speed_m_per_s", "jet_c_m_per_s"});
  LimitScenario& ls = s.newton.limit;
  try {
    ls.preset = limit_preset_from_string(nl.str("preset", "sr-inertial"));
  } catch (const Error& e) {
    nl.fail("preset", e.what());
  }
  s.newton.c_list = scaled(nl.list("c_list_m_per_s", {1.0, 2.0, 4.0, 8.0}), &Units::speed, u);
  for (double c : s.newton.c_list)
    if (!(c > 0.0)) nl.fail("c_list_m_per_s", "c values must be > 0");
  ls.y0 = nl.vec3("y0_m", ls.y0 * u.length_m) / u.length_m;
  ls.w = nl.vec3("w_m_per_s", ls.w * u.length_m / u.time_s) * u.time_s / u.length_m;
  ls.m = u.mass(nl.num("mass_kg", ls.m));
  if (nl.has("s_samples_s")) ls.s_samples = scaled(nl.list("s_samples_s", {}), &Units::time, u);
  ls.h = u.time(nl.num("h_s", ls.h * u.time_s));
  ls.accel = u.accel(nl.num("a_m_per_s2", ls.accel * u.length_m / (u.time_s * u.time_s)));
  ls.omega = u.rate(nl.num("omega_rad_per_s", ls.omega / u.time_s));
  ls.gm = u.gm(nl.num("gm_m3_per_s2", ls.gm * u.length_m * u.length_m * u.length_m / (u.time_s * u.time_s)));
  ls.r_observer = u.length(nl.num("r_observer_m", ls.r_observer * u.length_m));
  ls.r_body = u.length(nl.num("r_body_m", ls.r_body * u.length_m));
  ls.jet_speed_m_per_s = nl.num("jet_speed_m_per_s", ls.jet_speed_m_per_s);
  ls.jet_c_m_per_s = nl.num("jet_c_m_per_s", ls.jet_c_m_per_s);
  ls.threads = s.threads;

  const Section va = top.sub("validate", {"samples", "max_radius_m"});
  s.validate.samples = va.integer("samples", 10);
  s.validate.max_radius = u.length(va.num("max_radius_m", 5.0 * u.length_m));
  if (s.validate.samples < 1) va.fail("samples", "samples must be >= 1");

  const Section out = top.sub("output", {"dir"});
  s.output_dir = out.str("dir", "out");
  return s;
}

Mat4 default_frame(const Chart& chart, const ObserverCurve& observer) {
  const Vec4 q = observer.position(0.0);
  const Mat4 g = chart.metric_at(q).g;
  Mat4 x = Mat4::Identity();
  x.col(0) = observer.velocity(0.0) / observer.c();
  // Gram-Schmidt of the coordinate basis against X_0
  for (int i = 1; i < 4; ++i) {
    Vec4 e = Vec4::Unit(i);
    for (int j = 0; j < i; ++j) {
      const double gjj = x.col(j).dot(g * x.col(j));
      e -= (x.col(j).dot(g * e) / gjj) * x.col(j);
    }
    const double n2 = e.dot(g * e);
    if (!(n2 < 0.0)) throw Error(ErrorKind::Domain, "default frame: degenerate spatial direction");
    x.col(i) = e / std::sqrt(-n2);
  }
  return x;
}

World build_observer(const Scenario& s) {
  World w;
  const double c = s.spacetime.c;
  if (s.observer.kind == "accelerated") {
    w.observer = std::make_shared<const ObserverCurve>(make_uniformly_accelerated_observer(s.observer.accel, c));
    w.chart = w.observer->chart_ptr();
    return w;
  }
  w.chart = std::make_shared<const Chart>(s.spacetime.name == "schwarzschild"
                                              ? Chart::schwarzschild(s.spacetime.radius, c)
                                              : Chart::minkowski(c));
  const Event q0(w.chart->id(), s.observer.position);
  if (!w.chart->contains(q0.coords)) throw Error(ErrorKind::Config, "observer position lies outside the chart");
  const Vec4 u0(c, s.observer.velocity[0], s.observer.velocity[1], s.observer.velocity[2]);
  if (s.observer.kind == "static") {
    w.observer = std::make_shared<const ObserverCurve>(make_static_observer(w.chart, q0));
  } else if (s.observer.kind == "inertial") {
    w.observer = std::make_shared<const ObserverCurve>(
        make_inertial_observer(w.chart, q0, u0, s.observer.tau_min, s.observer.tau_max, s.tol));
  } else {
    // program: the start frame comes from an inertial observer with the same tangent
    const ObserverCurve probe = make_inertial_observer(w.chart, q0, u0, -1e-3, 1e-3, s.tol);
    const Mat4 f0 = s.frame.initial.value_or(default_frame(*w.chart, probe));
    const Vec3 a = s.observer.program_accel;
    w.observer = std::make_shared<const ObserverCurve>(make_program_observer(
        w.chart, q0, f0, [a](double) { return a; }, s.observer.tau_min, s.observer.tau_max, s.tol));
  }
  return w;
}

World build_world(const Scenario& s) {
  World w = build_observer(s);
  w.initial_frame = s.frame.initial.value_or(default_frame(*w.chart, *w.observer));
  const double tmin = std::max(s.frame.tau_min, w.observer->tau_min());
  const double tmax = std::min(s.frame.tau_max, w.observer->tau_max());
  FrameField fw = fermi_walker_transport(w.observer, w.initial_frame, 0.0, tmin, tmax, s.tol);
  if (s.frame.kind == "rotating") fw = rotating_frame(fw, s.frame.omega, s.frame.axis);
  w.frames = std::make_shared<const FrameField>(std::move(fw));
  return w;
}

}  // namespace obsplit::cli
