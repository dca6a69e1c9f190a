#include "obsplit/newtlimit.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "obsplit/errors.hpp"
#include "obsplit/observer.hpp"
#include "obsplit/relative_force.hpp"
#include "obsplit/splitting.hpp"

namespace obsplit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Series2 series_mul(const Series2& f, const Series2& g) {
  return {f.c0 * g.c0, f.c0 * g.c1 + f.c1 * g.c0, f.c0 * g.c2 + f.c1 * g.c1 + f.c2 * g.c0};
}

Series2 series_inv(const Series2& f) {
  if (f.c0 == 0.0 || !std::isfinite(f.c0))
    throw Error(ErrorKind::NonInvertible, "series_inv: leading coefficient is zero");
  const double i0 = 1.0 / f.c0;
  return {i0, -f.c1 * i0 * i0, f.c1 * f.c1 * i0 * i0 * i0 - f.c2 * i0 * i0};
}

Series2 sr_tau_dot_series(double u, double v) {
  if (!(std::abs(u) <= 1.0 + 1e-12) || !(v >= 0.0))
    throw Error(ErrorKind::InvalidInput, "sr_tau_dot_series: need |u| <= 1 and v >= 0");
  return {1.0, u * v, (u * u + 0.5) * v * v};
}

SrForceSeries sr_force_correction(const Vec3& x_hat, const Vec3& v, const Vec3& dv_dtau, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::Domain, "sr_force_correction: |x| must be > 0");
  const double speed2 = v.squaredNorm();
  const double xv = x_hat.dot(v);
  // v^2 (1 - (x_hat . v_hat)^2) without dividing by |v|
  const double transverse = speed2 - xv * xv;
  const double first = x_hat.dot(dv_dtau) + transverse / r;
  SrForceSeries s;
  s.tau_ddot_ratio = {0.0, first, v.dot(dv_dtau) + xv * first};
  s.inv_tau_dot2 = {1.0, -2.0 * xv, -transverse};
  return s;
}

Vec3 sr_series_force(const SrForceSeries& s, double m, double c, const Vec3& f_spatial, const Vec3& v) {
  const double eps = 1.0 / c;
  return s.inv_tau_dot2(eps) * f_spatial - m * s.tau_ddot_ratio(eps) * v;
}

GeneralTauDot general_tau_dot_series(const Mat4& alpha, const Vec3& v, double tol) {
  const double a00 = alpha(0, 0);
  if (!(a00 > 0.0)) throw Error(ErrorKind::Signature, "general_tau_dot_series: alpha_00 must be > 0");
  GeneralTauDot out;
  if (std::abs(a00 - 1.0) > tol) {
    out.obstructed = true;
    out.reason = "alpha_00 != 1: the Newtonian limit cannot exist";
    return out;
  }
  const double a0v = alpha.block<1, 3>(0, 1).dot(v.transpose());
  const double vav = v.dot(alpha.block<3, 3>(1, 1) * v);
  out.series = {1.0 / std::sqrt(a00), -a0v / std::pow(a00, 1.5),
                (3.0 * a0v * a0v - a00 * vav) / (2.0 * std::pow(a00, 2.5))};
  return out;
}

LimitForce limit_case_pseudo_forces(const AlphaField& alpha, double tau, const Vec3& x, const Vec3& v,
                                    double m, double tol, double h) {
  if (!alpha) throw Error(ErrorKind::InvalidInput, "limit_case_pseudo_forces: missing alpha");
  LimitForce out;
  const Mat4 a = alpha(tau, x);
  if (std::abs(a(0, 0) - 1.0) > tol) {
    out.obstructed = true;
    out.reason = "alpha_00 != 1";
    return out;
  }
  const Eigen::FullPivLU<Mat4> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorKind::CriticalPoint, "limit_case_pseudo_forces: alpha is singular");
  const Mat4 ai = lu.inverse();
  const Mat4 dt = (alpha(tau + h, x) - alpha(tau - h, x)) / (2.0 * h);
  // dx[l] = d alpha / d x^l for l = 1..3, index 0 unused (no spatial
  // derivative along the time slot)
  std::array<Mat4, 4> dx;
  dx[0].setZero();
  for (int d = 0; d < 3; ++d) {
    Vec3 xp = x;
    Vec3 xm = x;
    xp[d] += h;
    xm[d] -= h;
    dx[static_cast<std::size_t>(d + 1)] = (alpha(tau, xp) - alpha(tau, xm)) / (2.0 * h);
  }
  for (int c = 1; c < 4; ++c) {
    double s = 0.0;
    for (int b = 1; b < 4; ++b) s += ai(c, b) * dt(b, 0);
    out.time_condition = std::max(out.time_condition, std::abs(s));
    for (int aa = 1; aa < 4; ++aa) {
      double q = 0.0;
      for (int b = 1; b < 4; ++b)
        q += ai(c, b) * (dx[static_cast<std::size_t>(aa)](b, 0) - dx[static_cast<std::size_t>(b)](0, aa));
      out.curl_condition = std::max(out.curl_condition, std::abs(q));
    }
  }
  if (out.time_condition > tol || out.curl_condition > tol) {
    out.obstructed = true;
    out.reason = "limit-existence conditions violated";
    return out;
  }
  for (int c = 1; c < 4; ++c) {
    double f = 0.0;
    for (int aa = 1; aa < 4; ++aa)
      for (int b = 1; b < 4; ++b) f -= ai(c, b) * dt(aa, b) * v[aa - 1];
    double q = 0.0;
    for (int l = 0; l < 4; ++l)
      for (int aa = 1; aa < 4; ++aa)
        for (int b = 1; b < 4; ++b) {
          const double t = dx[static_cast<std::size_t>(b)](l, aa) + dx[static_cast<std::size_t>(aa)](l, b) -
                           (l > 0 ? dx[static_cast<std::size_t>(l)](aa, b) : 0.0);
          q += ai(c, l) * t * v[aa - 1] * v[b - 1];
        }
    out.force[c - 1] = m * (f - 0.5 * q);
  }
  return out;
}

const char* to_string(LimitPreset p) noexcept {
  switch (p) {
    case LimitPreset::SrInertial: return "sr-inertial";
    case LimitPreset::Comoving: return "comoving";
    case LimitPreset::JetFighter: return "jet-fighter";
    case LimitPreset::AcceleratedRotating: return "accelerated-rotating";
    case LimitPreset::Schwarzschild: return "schwarzschild";
  }
  return "unknown";
}

LimitPreset limit_preset_from_string(const std::string& s) {
  for (auto p : {LimitPreset::SrInertial, LimitPreset::Comoving, LimitPreset::JetFighter,
                 LimitPreset::AcceleratedRotating, LimitPreset::Schwarzschild})
    if (s == to_string(p)) return p;
  throw Error(ErrorKind::Config, "unknown newton-limit preset '" + s + "'");
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return kNaN;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return kNaN;
  return (n * sxy - sx * sy) / den;
}

namespace {

struct Setup {
  std::shared_ptr<const FrameField> frames;
  Worldline body;
  SearchConfig search;
  bool sr_series = false;
};

Setup build_setup(const LimitScenario& sc, double c) {
  Setup st;
  const IntegratorTolerances tol;
  double t_span = 0.0;
  for (double s : sc.s_samples) t_span = std::max(t_span, std::abs(s));
  const double reach = sc.y0.norm() + sc.w.norm() * (t_span + 1.0) + 1.0;
  const double tau_span = 2.0 * (t_span + 1.0) + 2.0 * reach / c;

  st.search.n_x = 3;
  st.search.box_min = Vec3::Constant(-reach);
  st.search.box_max = Vec3::Constant(reach);
  st.search.tau_min = -tau_span;
  st.search.tau_max = tau_span;
  st.search.threads = sc.threads;

  switch (sc.preset) {
    case LimitPreset::SrInertial:
    case LimitPreset::Comoving:
    case LimitPreset::JetFighter: {
      auto chart = std::make_shared<const Chart>(Chart::minkowski(c));
      auto obs = std::make_shared<const ObserverCurve>(
          make_inertial_observer(chart, Event(chart->id(), Vec4::Zero()), Vec4(c, 0, 0, 0)));
      auto ff = std::make_shared<const FrameField>(
          fermi_walker_transport(obs, standard_frame(), 0.0, -tau_span, tau_span, tol));
      st.frames = ff;
      if (sc.preset == LimitPreset::Comoving) {
        st.body = worldline_comoving(ff, sc.y0, tol);
      } else {
        auto body = std::make_shared<const ObserverCurve>(make_inertial_observer(
            chart, Event(chart->id(), Vec4(0.0, sc.y0[0], sc.y0[1], sc.y0[2])),
            Vec4(c, sc.w[0], sc.w[1], sc.w[2])));
        st.body = worldline_from_observer(body);
        st.sr_series = true;
      }
      return st;
    }
    case LimitPreset::AcceleratedRotating: {
      auto obs = std::make_shared<const ObserverCurve>(make_uniformly_accelerated_observer(sc.accel, c));
      const FrameField fw = fermi_walker_transport(obs, standard_frame(), 0.0, -tau_span, tau_span, tol);
      st.frames = std::make_shared<const FrameField>(rotating_frame(fw, sc.omega, 1));
      auto body = std::make_shared<const ObserverCurve>(make_inertial_observer(
          obs->chart_ptr(), Event(obs->chart().id(), Vec4(0.0, sc.y0[0], sc.y0[1], sc.y0[2])),
          Vec4(c, sc.w[0], sc.w[1], sc.w[2])));
      st.body = worldline_from_observer(body);
      return st;
    }
    case LimitPreset::Schwarzschild: {
      const double radius = 2.0 * sc.gm / (c * c);
      auto chart = std::make_shared<const Chart>(Chart::schwarzschild(radius, c));
      const Vec4 q0(0.0, sc.r_observer, std::numbers::pi / 2, 0.0);
      auto obs = std::make_shared<const ObserverCurve>(make_static_observer(chart, Event(chart->id(), q0)));
      const double span = 2.0 * (t_span + 1.0) + 4.0 * sc.r_observer / c;
      st.frames = std::make_shared<const FrameField>(fermi_walker_transport(
          obs, static_schwarzschild_frame(*chart, q0), 0.0, -span, span, tol));
      auto body = std::make_shared<const ObserverCurve>(make_inertial_observer(
          chart, Event(chart->id(), Vec4(0.0, sc.r_body, std::numbers::pi / 2, 0.0)), Vec4(1.0, 0, 0, 0),
          -(t_span + 1.0), t_span + 1.0, tol));
      st.body = worldline_from_observer(body);
      const double d = std::abs(sc.r_observer - sc.r_body) + 2.0;
      st.search.box_min = Vec3::Constant(-d);
      st.search.box_max = Vec3::Constant(d);
      st.search.tau_min = -span;
      st.search.tau_max = span;
      return st;
    }
  }
  throw Error(ErrorKind::InvalidInput, "newtonian_limit_report: unknown preset");
}

}  // namespace

LimitReport newtonian_limit_report(const LimitScenario& sc, const std::vector<double>& c_sweep) {
  LimitReport rep;
  rep.scenario = to_string(sc.preset);
  rep.gated = sc.preset != LimitPreset::AcceleratedRotating && sc.preset != LimitPreset::Schwarzschild;

  if (sc.preset == LimitPreset::JetFighter) {
    const Series2 s = sr_tau_dot_series(1.0, sc.jet_speed_m_per_s);
    rep.jet_first_order = std::abs(s.c1) / sc.jet_c_m_per_s;
    rep.jet_first_order_ok = rep.jet_first_order <= 6.5e-6;
    rep.notes.push_back("first-order clock-rate correction |x_hat.v_hat| v / c at x_hat.v_hat = 1");
  }

  std::vector<double> eps, tau_res, pf, pf_res;
  for (double c : c_sweep) {
    if (!(c > 0.0)) throw Error(ErrorKind::InvalidInput, "newtonian_limit_report: c must be > 0");
    if (sc.preset == LimitPreset::JetFighter) continue;
    const Setup st = build_setup(sc, c);
    ObserveOptions oo;
    oo.search = st.search;
    oo.h = sc.h;
    const ObserveReport obs = observe_curve(*st.frames, st.body, sc.s_samples, oo);
    LimitRow row;
    row.c = c;
    row.samples = obs.samples.size();
    if (obs.branch_lost) rep.notes.push_back("c = " + std::to_string(c) + ": " + obs.diagnostics);
    for (const auto& smp : obs.samples) {
      row.max_tau_dot_dev = std::max(row.max_tau_dot_dev, std::abs(smp.tau_dot - 1.0));
      const ForceBreakdown fb = relative_force(sc.m, *st.frames, smp, Vec3::Zero(), kNaN);
      const Vec3 pseudo = fb.pseudo_sum();
      row.pseudo_force = std::max(row.pseudo_force, pseudo.norm());
      row.actual_force = std::max(row.actual_force, fb.actual.norm());
      row.kinematic_residual = std::max(row.kinematic_residual, (sc.m * smp.dv_dtau - fb.total).norm());
      row.kinematic_scale = std::max(row.kinematic_scale, sc.m * (smp.dv_dtau.norm() + 1e-12));
      if (st.sr_series || sc.preset == LimitPreset::Comoving) {
        const double speed = smp.v.norm();
        const Vec3 xh = smp.x.normalized();
        const double u = speed > 0.0 ? std::clamp(xh.dot(smp.v) / speed, -1.0, 1.0) : 0.0;
        const double series = sr_tau_dot_series(u, speed)(1.0 / c);
        row.tau_dot_series_residual = std::max(row.tau_dot_series_residual, std::abs(smp.tau_dot - series));
        const SrForceSeries fs = sr_force_correction(xh, smp.v, smp.dv_dtau, smp.x.norm());
        const Vec3 pred = sr_series_force(fs, sc.m, c, Vec3::Zero(), smp.v);
        row.pseudo_force_series_residual =
            std::max(row.pseudo_force_series_residual, (pseudo - pred).norm());
      } else {
        row.tau_dot_series_residual = kNaN;
        row.pseudo_force_series_residual = kNaN;
      }
    }
    eps.push_back(1.0 / c);
    tau_res.push_back(row.tau_dot_series_residual);
    pf.push_back(row.pseudo_force);
    pf_res.push_back(row.pseudo_force_series_residual);
    rep.rows.push_back(row);
  }
  rep.tau_dot_residual_slope = loglog_slope(eps, tau_res);
  rep.pseudo_force_slope = loglog_slope(eps, pf);
  rep.pseudo_force_residual_slope = loglog_slope(eps, pf_res);
  if (!rep.gated) rep.notes.push_back("exploratory scenario: no pass/fail assertions");
  return rep;
}

}  // namespace obsplit
