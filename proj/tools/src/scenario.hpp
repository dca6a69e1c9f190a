#pragma once

// Scenario files: parsing, unit conversion, canonical hashing and the runtime
// objects they describe.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <obsplit/newtlimit.hpp>
#include <obsplit/observer.hpp>
#include <obsplit/splitting.hpp>

namespace obsplit::cli {

/// Internal units: lengths in `length_m` metres, times in `time_s` seconds.
struct Units {
  double length_m = 1.0;
  double time_s = 1.0;

  double length(double metres) const { return metres / length_m; }
  double time(double seconds) const { return seconds / time_s; }
  double speed(double m_per_s) const { return m_per_s * time_s / length_m; }
  double accel(double m_per_s2) const { return m_per_s2 * time_s * time_s / length_m; }
  double rate(double per_s) const { return per_s * time_s; }
  double gm(double m3_per_s2) const { return m3_per_s2 * time_s * time_s / (length_m * length_m * length_m); }
  double mass(double kg) const { return kg; }
};

struct SpacetimeSpec {
  std::string name = "minkowski";
  double c = 1.0;
  double radius = 0.0;
};

struct ObserverSpec {
  std::string kind = "inertial";
  Vec4 position = Vec4::Zero();
  /// d kappa^a / dt for inertial observers.
  Vec3 velocity = Vec3::Zero();
  double accel = 0.0;
  /// Constant proper acceleration in the frame basis for program observers.
  Vec3 program_accel = Vec3::Zero();
  double tau_min = -10.0;
  double tau_max = 10.0;
};

struct FrameSpec {
  /// "fw" or "rotating"
  std::string kind = "fw";
  double omega = 0.0;
  int axis = 3;
  /// Explicit columns X_0..X_3 at tau = 0; the chart default otherwise.
  std::optional<Mat4> initial;
  double tau_min = -10.0;
  double tau_max = 10.0;
};

struct TraceConeSpec {
  double tau = 0.0;
  std::vector<double> radii{1.0, 2.0};
  int n_theta = 4;
  int n_phi = 8;
};

struct InvertSpec {
  std::string targets_file;
};

struct WorldlineSpec {
  /// "inertial", "comoving" or "lightlike"
  std::string kind = "inertial";
  Vec4 position = Vec4::Zero();
  /// inertial: d kappa^a / dt; lightlike: d kappa / ds
  Vec4 direction = Vec4::Zero();
  Vec3 x = Vec3::Zero();
  std::vector<double> s_samples;
  double h = 1e-3;
  double s_min = -10.0;
  double s_max = 10.0;
};

struct NewtonLimitSpec {
  LimitScenario limit;
  std::vector<double> c_list{1.0, 2.0, 4.0, 8.0};
};

struct ValidateSpec {
  int samples = 10;
  double max_radius = 5.0;
};

struct Scenario {
  std::string name;
  std::string source;
  std::filesystem::path base_dir;
  std::string canonical;
  std::string hash;
  Units units;
  SpacetimeSpec spacetime;
  ObserverSpec observer;
  FrameSpec frame;
  IntegratorTolerances tol;
  SearchConfig search;
  TraceConeSpec trace_cone;
  InvertSpec invert;
  WorldlineSpec worldline;
  NewtonLimitSpec newton;
  ValidateSpec validate;
  std::filesystem::path output_dir = "out";
  int threads = 1;
  std::uint64_t seed = 12345;
};

/// `path` is a file or "builtin:<name>". Overrides are KEY=VAL pairs applied to
/// the tolerances section before canonicalization. Throws Error(Config) with
/// line diagnostics, or Error(Io).
Scenario load_scenario(const std::string& path, const std::vector<std::string>& tol_overrides = {});

/// Parses scenario text directly; `origin` names the source in diagnostics.
Scenario parse_scenario(const std::string& text, const std::string& origin,
                        const std::filesystem::path& base_dir,
                        const std::vector<std::string>& tol_overrides = {});

std::vector<std::string> builtin_scenarios();
std::optional<std::string> builtin_scenario_text(const std::string& name);

/// Hex SHA-256 of `text`.
std::string sha256_hex(const std::string& text);

struct World {
  ChartPtr chart;
  std::shared_ptr<const ObserverCurve> observer;
  /// Initial frame at tau = 0 before transport.
  Mat4 initial_frame = Mat4::Identity();
  std::shared_ptr<const FrameField> frames;
};

/// Chart and observer only; `frames` stays empty.
World build_observer(const Scenario& s);
/// Full construction including frame transport. Throws Domain for an invalid
/// initial frame.
World build_world(const Scenario& s);

/// Chart default frame at the observer's start.
Mat4 default_frame(const Chart& chart, const ObserverCurve& observer);

}  // namespace obsplit::cli
