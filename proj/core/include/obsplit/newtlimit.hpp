#pragma once

// Truncated series in eps = 1/c and Newtonian-limit checks.

#include <functional>
#include <string>
#include <vector>

#include "obsplit/types.hpp"

namespace obsplit {

/// c0 + c1 eps + c2 eps^2 + O(eps^3)
struct Series2 {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  double operator()(double eps) const { return c0 + eps * (c1 + eps * c2); }
};

Series2 series_mul(const Series2& f, const Series2& g);

/// Throws NonInvertible when f.c0 == 0.
Series2 series_inv(const Series2& f);

/// Clock rate of SR inertial observers: coefficients of (1/c)^k for
/// u = x_hat . v_hat and speed v.
Series2 sr_tau_dot_series(double u, double v);

struct SrForceSeries {
  /// tau_ddot / tau_dot^2
  Series2 tau_ddot_ratio;
  /// 1 / tau_dot^2
  Series2 inv_tau_dot2;
};

/// Expansions entering the SR relative-force law, coefficients of (1/c)^k.
SrForceSeries sr_force_correction(const Vec3& x_hat, const Vec3& v, const Vec3& dv_dtau, double r);

/// SR relative force with both expansions evaluated at eps = 1/c.
Vec3 sr_series_force(const SrForceSeries& s, double m, double c, const Vec3& f_spatial, const Vec3& v);

struct GeneralTauDot {
  /// alpha_00 != 1: the Newtonian limit cannot exist; no coefficients.
  bool obstructed = false;
  std::string reason;
  Series2 series;
};

/// Second-order expansion of 1/sqrt(alpha_00 + 2 alpha_0a v^a/c + alpha_ab v^a v^b/c^2)
/// for c-independent alpha. Throws Signature for alpha_00 <= 0.
GeneralTauDot general_tau_dot_series(const Mat4& alpha, const Vec3& v, double tol = 1e-12);

/// alpha(tau, x) in (c tau, x) components, written in (tau, x) and free of c.
using AlphaField = std::function<Mat4(double tau, const Vec3& x)>;

struct LimitForce {
  bool obstructed = false;
  std::string reason;
  /// Residuals of the two limit-existence conditions.
  double time_condition = 0.0;
  double curl_condition = 0.0;
  Vec3 force = Vec3::Zero();
};

/// Zeroth-order relative force of a force-free observed curve when
/// alpha_00 = 1 and alpha is c-independent.
LimitForce limit_case_pseudo_forces(const AlphaField& alpha, double tau, const Vec3& x, const Vec3& v,
                                    double m = 1.0, double tol = 1e-8, double h = 1e-5);

enum class LimitPreset {
  /// Inertial observer with standard frames observing a force-free inertial body.
  SrInertial,
  /// Body at rest in the inertial observer's coordinates.
  Comoving,
  /// First-order clock-rate bound at jet-fighter speed.
  JetFighter,
  /// Exploratory: uniformly accelerated observer with rotating frames.
  AcceleratedRotating,
  /// Exploratory: static Schwarzschild observer and a radial free-faller,
  /// with radius 2 GM / c^2.
  Schwarzschild,
};

const char* to_string(LimitPreset p) noexcept;
LimitPreset limit_preset_from_string(const std::string& s);

struct LimitScenario {
  LimitPreset preset = LimitPreset::SrInertial;
  /// Observed body: position at synchronized time 0 and coordinate velocity.
  Vec3 y0{3.0, 1.0, 0.5};
  Vec3 w{-0.04, 0.02, 0.01};
  double m = 1.0;
  /// Proper times of the observed body at which samples are taken.
  std::vector<double> s_samples{0.0, 1.0, 2.0};
  double h = 1e-3;
  // accelerated-rotating preset
  double accel = 0.1;
  double omega = 0.05;
  // Schwarzschild preset
  double gm = 1e-3;
  double r_observer = 50.0;
  double r_body = 40.0;
  // jet-fighter preset, SI units
  double jet_speed_m_per_s = 7000.0 / 3.6;
  double jet_c_m_per_s = 3.0e8;
  int threads = 1;
};

struct LimitRow {
  double c = 0.0;
  double max_tau_dot_dev = 0.0;
  double tau_dot_series_residual = 0.0;
  double pseudo_force = 0.0;
  double pseudo_force_series_residual = 0.0;
  double kinematic_residual = 0.0;
  double kinematic_scale = 0.0;
  double actual_force = 0.0;
  std::size_t samples = 0;
};

struct LimitReport {
  std::string scenario;
  /// False for exploratory presets.
  bool gated = true;
  std::vector<LimitRow> rows;
  /// Least-squares slopes of log(quantity) against log(1/c); NaN when undefined.
  double tau_dot_residual_slope = 0.0;
  double pseudo_force_slope = 0.0;
  double pseudo_force_residual_slope = 0.0;
  double jet_first_order = 0.0;
  bool jet_first_order_ok = false;
  std::vector<std::string> notes;
};

LimitReport newtonian_limit_report(const LimitScenario& scenario, const std::vector<double>& c_sweep);

/// Least-squares slope of log(y) against log(x); NaN with fewer than two
/// positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace obsplit
