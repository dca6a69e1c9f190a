#include "obsplit/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "obsplit/errors.hpp"

namespace obsplit {

namespace {

// Dormand-Prince 5(4) tableau and Hairer's continuous extension.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;

double scaled_norm(const State& v, const State& y0, const State& y1, double rtol, double atol) {
  double sum = 0.0;
  const auto n = v.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = v[i] / sk;
    sum += q * q;
  }
  return std::sqrt(sum / static_cast<double>(std::max<Eigen::Index>(n, 1)));
}

bool is_domain_error(const Error& e) {
  return e.kind() == ErrorKind::OutOfChart || e.kind() == ErrorKind::DegenerateMetric;
}

}  // namespace

OdeStats& OdeStats::operator+=(const OdeStats& o) {
  accepted += o.accepted;
  rejected += o.rejected;
  rhs_evals += o.rhs_evals;
  max_error_estimate = std::max(max_error_estimate, o.max_error_estimate);
  return *this;
}

const char* to_string(OdeStatus s) noexcept {
  switch (s) {
    case OdeStatus::Completed: return "completed";
    case OdeStatus::LeftDomain: return "left-domain";
    case OdeStatus::StepUnderflow: return "step-underflow";
    case OdeStatus::MaxSteps: return "max-steps";
  }
  return "unknown";
}

bool DenseTrajectory::covers(double t) const {
  const double lo = std::min(t_begin_, t_end_);
  const double hi = std::max(t_begin_, t_end_);
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi) + std::abs(lo));
  return t >= lo - slack && t <= hi + slack;
}

State DenseTrajectory::evaluate(double t) const {
  if (segments_.empty()) {
    if (std::abs(t - t_begin_) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_begin_)))
      return y_begin_;
    throw Error(ErrorKind::Domain, "DenseTrajectory::evaluate: empty trajectory");
  }
  if (!covers(t)) throw Error(ErrorKind::Domain, "DenseTrajectory::evaluate: parameter outside interval");
  const bool forward = t_end_ >= t_begin_;
  // segments are ordered along the integration direction
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [forward](double v, const Segment& s) {
                               return forward ? v < s.t0 : v > s.t0;
                             });
  const Segment& s = (it == segments_.begin()) ? segments_.front() : *std::prev(it);
  double theta = (t - s.t0) / s.h;
  theta = std::clamp(theta, 0.0, 1.0);
  const double theta1 = 1.0 - theta;
  return s.r1 + theta * (s.r2 + theta1 * (s.r3 + theta * (s.r4 + theta1 * s.r5)));
}

std::vector<double> DenseTrajectory::knots() const {
  std::vector<double> out;
  out.reserve(segments_.size() + 1);
  for (const auto& s : segments_) out.push_back(s.t0);
  out.push_back(t_end_);
  return out;
}

DenseTrajectory integrate_dopri5(const OdeRhs& rhs, const State& y0, double t0, double t1,
                                 const OdeOptions& opts, const OdeAdmissible& admissible) {
  if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0))
    throw Error(ErrorKind::InvalidInput, "integrate_dopri5: tolerances must be > 0");

  DenseTrajectory tr;
  tr.t_begin_ = t0;
  tr.t_end_ = t0;
  tr.y_begin_ = y0;
  tr.y_end_ = y0;
  if (t1 == t0) return tr;

  const auto n = y0.size();
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double rtol = opts.rel_tol;
  const double atol = opts.abs_tol;

  auto ok = [&](const State& y) { return !admissible || admissible(y); };

  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

  // Returns false when the stage state is inadmissible.
  auto eval = [&](double t, const State& y, State& dy) -> bool {
    if (!ok(y)) return false;
    try {
      rhs(t, y, dy);
    } catch (const Error& e) {
      if (is_domain_error(e)) return false;
      throw;
    }
    ++tr.stats_.rhs_evals;
    return dy.allFinite();
  };

  double t = t0;
  State y = y0;
  if (!eval(t, y, k1)) {
    tr.status_ = OdeStatus::LeftDomain;
    return tr;
  }

  double h = opts.initial_step;
  if (!(h > 0.0)) {
    // Hairer's starting step heuristic
    const double dnf = scaled_norm(k1, y, y, rtol, atol);
    const double dny = scaled_norm(y, y, y, rtol, atol);
    double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h0 = std::min(h0, span);
    ytmp = y + dir * h0 * k1;
    if (eval(t + dir * h0, ytmp, k2)) {
      const double der2 = scaled_norm(k2 - k1, y, y, rtol, atol) / h0;
      const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
      const double h1 = der12 <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / der12, 0.2);
      h = std::min({100.0 * h0, h1, span});
    } else {
      h = h0;
    }
  }
  h = std::min(h, span);

  double facold = 1e-4;
  bool last_rejected = false;

  while (true) {
    if (tr.stats_.accepted + tr.stats_.rejected >= opts.max_steps) {
      tr.status_ = OdeStatus::MaxSteps;
      break;
    }
    const double remaining = std::abs(t1 - t);
    bool final_step = false;
    if (h >= remaining) {
      h = remaining;
      final_step = true;
    }
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < hmin) {
      tr.status_ = OdeStatus::StepUnderflow;
      break;
    }
    const double hs = dir * h;

    bool stage_ok = true;
    ytmp = y + hs * a21 * k1;
    stage_ok = stage_ok && eval(t + c2 * hs, ytmp, k2);
    if (stage_ok) {
      ytmp = y + hs * (a31 * k1 + a32 * k2);
      stage_ok = eval(t + c3 * hs, ytmp, k3);
    }
    if (stage_ok) {
      ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
      stage_ok = eval(t + c4 * hs, ytmp, k4);
    }
    if (stage_ok) {
      ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      stage_ok = eval(t + c5 * hs, ytmp, k5);
    }
    if (stage_ok) {
      ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      stage_ok = eval(t + hs, ytmp, k6);
    }
    if (stage_ok) {
      ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      stage_ok = eval(t + hs, ynew, k7);
    }
    if (!stage_ok) {
      ++tr.stats_.rejected;
      h *= 0.5;
      last_rejected = true;
      if (h < hmin) {
        tr.status_ = OdeStatus::LeftDomain;
        break;
      }
      continue;
    }

    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = scaled_norm(err, y, ynew, rtol, atol);

    // PI step-size controller
    const double fac11 = std::pow(std::max(en, 1e-300), 0.2 - kBeta * 0.75);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
    double hnew = h / fac;

    if (en <= 1.0) {
      facold = std::max(en, 1e-4);
      ++tr.stats_.accepted;
      tr.stats_.max_error_estimate = std::max(tr.stats_.max_error_estimate, en);

      DenseTrajectory::Segment seg;
      seg.t0 = t;
      seg.h = hs;
      seg.r1 = y;
      const State ydiff = ynew - y;
      const State bspl = hs * k1 - ydiff;
      seg.r2 = ydiff;
      seg.r3 = bspl;
      seg.r4 = ydiff - hs * k7 - bspl;
      seg.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      tr.segments_.push_back(std::move(seg));

      y = ynew;
      k1 = k7;
      t = final_step ? t1 : t + hs;
      tr.t_end_ = t;
      tr.y_end_ = y;
      if (final_step) {
        tr.status_ = OdeStatus::Completed;
        break;
      }
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = hnew;
    } else {
      ++tr.stats_.rejected;
      hnew = std::isfinite(en) ? h / std::min(1.0 / kFacMin, fac11 / kSafety) : 0.5 * h;
      last_rejected = true;
      h = hnew;
    }
  }
  return tr;
}

}  // namespace obsplit
