#include "obsplit/observer.hpp"

#include <cmath>
#include <limits>

#include "obsplit/errors.hpp"

namespace obsplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat4 unpack_frame(const State& y, Eigen::Index off) {
  Mat4 x;
  for (int i = 0; i < 4; ++i) x.col(i) = y.segment<4>(off + 4 * i);
  return x;
}

void pack_frame(const Mat4& x, State& y, Eigen::Index off) {
  for (int i = 0; i < 4; ++i) y.segment<4>(off + 4 * i) = x.col(i);
}

Vec4 normalized_observer_velocity(const Chart& chart, const Vec4& k, const Vec4& u) {
  if (!u.allFinite()) throw Error(ErrorKind::InvalidInput, "observer: non-finite velocity");
  const Metric4 g = chart.metric_at(k);
  const double n2 = g.norm2(u);
  if (causal_character(g, u) != CausalCharacter::Timelike)
    throw Error(ErrorKind::Domain, "observer: initial velocity is not timelike");
  if (!is_future_directed(g, chart.future_reference(k), u))
    throw Error(ErrorKind::Domain, "observer: initial velocity is past-directed");
  return u * (chart.c() / std::sqrt(n2));
}

// Fermi-Walker frame equation for observers:
// dX_i = -Gamma(gamma', X_i) + c^-2 [g(gamma', X_i) A - g(A, X_i) gamma'].
Mat4 fw_frame_rhs(const Christoffels& G, const Metric4& g, const Vec4& u, const Vec4& a, double c,
                  const Mat4& x) {
  Mat4 dx;
  const double ic2 = 1.0 / (c * c);
  for (int i = 0; i < 4; ++i) {
    const Vec4 xi = x.col(i);
    dx.col(i) = -contract(G, u, xi) + ic2 * (g.dot(u, xi) * a - g.dot(a, xi) * u);
  }
  return dx;
}

}  // namespace

TwoSidedTrajectory integrate_two_sided(const OdeRhs& rhs, const State& y0, double tau0,
                                       double tau_min, double tau_max, const OdeOptions& opts,
                                       const OdeAdmissible& admissible) {
  if (!(tau_min <= tau0 && tau0 <= tau_max))
    throw Error(ErrorKind::InvalidInput, "integrate_two_sided: tau0 outside [tau_min, tau_max]");
  DenseTrajectory back = integrate_dopri5(rhs, y0, tau0, tau_min, opts, admissible);
  DenseTrajectory fwd = integrate_dopri5(rhs, y0, tau0, tau_max, opts, admissible);
  return TwoSidedTrajectory(tau0, std::move(back), std::move(fwd));
}

const char* to_string(ObserverKind k) noexcept {
  switch (k) {
    case ObserverKind::Inertial: return "inertial";
    case ObserverKind::UniformlyAccelerated: return "uniformly-accelerated";
    case ObserverKind::Static: return "static";
    case ObserverKind::Program: return "program";
  }
  return "unknown";
}

CurvePoint ObserverCurve::at(double tau) const {
  if (!std::isfinite(tau) || !contains(tau))
    throw Error(ErrorKind::Domain, "ObserverCurve::at: proper time outside the curve interval");
  const double c = chart_->c();
  CurvePoint p;
  switch (kind_) {
    case ObserverKind::Inertial:
      if (!numeric_) {
        p.position = q0_ + tau * u0_;
        p.velocity = u0_;
        p.acceleration.setZero();
        return p;
      } else {
        const State y = numeric_->evaluate(tau);
        p.position = y.segment<4>(0);
        p.velocity = y.segment<4>(4);
        p.acceleration = -contract(chart_->christoffels_at(p.position, tol_.fd_step), p.velocity, p.velocity);
        return p;
      }
    case ObserverKind::UniformlyAccelerated: {
      const double a = accel_;
      const double ch = std::cosh(a * tau / c);
      const double sh = std::sinh(a * tau / c);
      p.position = Vec4(c * c / a * sh, c * c / a * (ch - 1.0), 0.0, 0.0);
      p.velocity = Vec4(c * ch, c * sh, 0.0, 0.0);
      p.acceleration = Vec4(a * sh, a * ch, 0.0, 0.0);
      return p;
    }
    case ObserverKind::Static:
      p.position = q0_ + tau * u0_;
      p.velocity = u0_;
      p.acceleration.setZero();
      return p;
    case ObserverKind::Program: {
      const State y = numeric_->evaluate(tau);
      p.position = y.segment<4>(0);
      const Mat4 x = unpack_frame(y, 4);
      p.velocity = c * x.col(0);
      const Vec3 ab = program_(tau);
      const Vec4 a = x.block<4, 3>(0, 1) * ab;
      p.acceleration = a - contract(chart_->christoffels_at(p.position, tol_.fd_step), p.velocity, p.velocity);
      return p;
    }
  }
  throw Error(ErrorKind::InvalidInput, "ObserverCurve: unknown kind");
}

Mat4 ObserverCurve::program_frame(double tau) const {
  if (kind_ != ObserverKind::Program)
    throw Error(ErrorKind::InvalidInput, "program_frame: not a program observer");
  if (!contains(tau)) throw Error(ErrorKind::Domain, "program_frame: proper time outside interval");
  return unpack_frame(numeric_->evaluate(tau), 4);
}

ObserverCurve make_inertial_observer(ChartPtr chart, const Event& q0, const Vec4& u0,
                                     double tau_min, double tau_max,
                                     const IntegratorTolerances& tol) {
  if (!chart) throw Error(ErrorKind::InvalidInput, "make_inertial_observer: null chart");
  if (!chart->contains(q0.coords))
    throw Error(ErrorKind::OutOfChart, "make_inertial_observer: start outside chart");
  ObserverCurve oc;
  oc.kind_ = ObserverKind::Inertial;
  oc.chart_ = chart;
  oc.tol_ = tol;
  oc.q0_ = q0.coords;
  oc.u0_ = normalized_observer_velocity(*chart, q0.coords, u0);
  if (chart->is_flat()) {
    oc.tau_min_ = -kInf;
    oc.tau_max_ = kInf;
    return oc;
  }
  const Chart& ch = *chart;
  const double h = tol.fd_step;
  OdeRhs rhs = [&ch, h](double, const State& y, State& dy) {
    const Vec4 u = y.segment<4>(4);
    dy.segment<4>(0) = u;
    dy.segment<4>(4) = -contract(ch.christoffels_at(y.segment<4>(0), h), u, u);
  };
  OdeAdmissible adm = [&ch](const State& y) { return ch.contains(y.segment<4>(0)); };
  State y0(8);
  y0 << oc.q0_, oc.u0_;
  oc.numeric_ = integrate_two_sided(rhs, y0, 0.0, tau_min, tau_max, tol.ode(), adm);
  oc.tau_min_ = oc.numeric_->tau_min();
  oc.tau_max_ = oc.numeric_->tau_max();
  return oc;
}

ObserverCurve make_uniformly_accelerated_observer(double a, double c) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw Error(ErrorKind::Domain, "make_uniformly_accelerated_observer: a must be > 0");
  ObserverCurve oc;
  oc.kind_ = ObserverKind::UniformlyAccelerated;
  oc.chart_ = std::make_shared<const Chart>(Chart::minkowski(c));
  oc.accel_ = a;
  oc.tau_min_ = -kInf;
  oc.tau_max_ = kInf;
  return oc;
}

ObserverCurve make_static_observer(ChartPtr chart, const Event& q0) {
  if (!chart) throw Error(ErrorKind::InvalidInput, "make_static_observer: null chart");
  const Metric4 g = chart->metric_at(q0.coords);
  if (!(g.g(0, 0) > 0.0))
    throw Error(ErrorKind::Domain, "make_static_observer: d_0 is not timelike here");
  ObserverCurve oc;
  oc.kind_ = ObserverKind::Static;
  oc.chart_ = chart;
  oc.q0_ = q0.coords;
  oc.u0_ = Vec4(chart->c() / std::sqrt(g.g(0, 0)), 0.0, 0.0, 0.0);
  oc.tau_min_ = -kInf;
  oc.tau_max_ = kInf;
  return oc;
}

ObserverCurve make_program_observer(ChartPtr chart, const Event& q0, const Mat4& frame0,
                                    std::function<Vec3(double)> program, double tau_min,
                                    double tau_max, const IntegratorTolerances& tol) {
  if (!chart) throw Error(ErrorKind::InvalidInput, "make_program_observer: null chart");
  if (!program) throw Error(ErrorKind::InvalidInput, "make_program_observer: missing program");
  const Chart& ch = *chart;
  const Metric4 g = ch.metric_at(q0.coords);
  if (!validate_frame_of_reference(g, ch.future_reference(q0.coords),
                                   ch.orientation_reference(q0.coords), Frame4(q0, frame0)))
    throw Error(ErrorKind::Domain, "make_program_observer: initial frame is not a frame of reference");

  ObserverCurve oc;
  oc.kind_ = ObserverKind::Program;
  oc.chart_ = chart;
  oc.tol_ = tol;
  oc.q0_ = q0.coords;
  oc.u0_ = ch.c() * frame0.col(0);
  oc.program_ = program;
  const double c = ch.c();
  const double h = tol.fd_step;
  const auto prog = oc.program_;
  OdeRhs rhs = [&ch, c, h, prog](double tau, const State& y, State& dy) {
    const Vec4 k = y.segment<4>(0);
    const Mat4 x = unpack_frame(y, 4);
    const Vec4 u = c * x.col(0);
    const Vec4 a = x.block<4, 3>(0, 1) * prog(tau);
    const Christoffels G = ch.christoffels_at(k, h);
    const Metric4 g = ch.metric_at(k);
    dy.segment<4>(0) = u;
    Mat4 dx = fw_frame_rhs(G, g, u, a, c, x);
    pack_frame(dx, dy, 4);
  };
  OdeAdmissible adm = [&ch](const State& y) { return ch.contains(y.segment<4>(0)); };
  State y0(20);
  y0.segment<4>(0) = q0.coords;
  pack_frame(frame0, y0, 4);
  oc.numeric_ = integrate_two_sided(rhs, y0, 0.0, tau_min, tau_max, tol.ode(), adm);
  oc.tau_min_ = oc.numeric_->tau_min();
  oc.tau_max_ = oc.numeric_->tau_max();
  return oc;
}

ProperAcceleration proper_acceleration(const ObserverCurve& curve, double tau) {
  const CurvePoint p = curve.at(tau);
  ProperAcceleration out;
  if (curve.kind() == ObserverKind::Program) {
    const Mat4 x = curve.program_frame(tau);
    out.vector = x.block<4, 3>(0, 1) * curve.program()(tau);
  } else {
    out.vector = p.acceleration + contract(curve.chart().christoffels_at(p.position), p.velocity, p.velocity);
  }
  const double n2 = curve.chart().metric_at(p.position).norm2(out.vector);
  out.magnitude = std::sqrt(std::max(0.0, -n2));
  return out;
}

Vec4 fermi_walker_derivative(const ObserverCurve& curve, const Vec4& y, const Vec4& dy, double tau) {
  const CurvePoint p = curve.at(tau);
  const Chart& ch = curve.chart();
  const Metric4 g = ch.metric_at(p.position);
  const Vec4 a = proper_acceleration(curve, tau).vector;
  const double ic2 = 1.0 / (curve.c() * curve.c());
  const Vec4 cov = dy + contract(ch.christoffels_at(p.position), p.velocity, y);
  return cov - ic2 * g.dot(p.velocity, y) * a + ic2 * g.dot(a, y) * p.velocity;
}

Vec4 fermi_walker_derivative(const ObserverCurve& curve, const VectorAlong& y, double tau, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "fermi_walker_derivative: h must be > 0");
  const Vec4 dy = (y(tau - 2 * h) - 8.0 * y(tau - h) + 8.0 * y(tau + h) - y(tau + 2 * h)) / (12.0 * h);
  return fermi_walker_derivative(curve, y(tau), dy, tau);
}

Mat4 FrameField::base_at(double tau) const {
  if (!contains(tau)) throw Error(ErrorKind::Domain, "FrameField: proper time outside interval");
  if (from_program_) return curve_->program_frame(tau);
  return unpack_frame(numeric_->evaluate(tau), 0);
}

Mat4 FrameField::base_derivative(double tau, const Mat4& x) const {
  const CurvePoint p = curve_->at(tau);
  const Metric4 g = curve_->chart().metric_at(p.position);
  const Vec4 a = proper_acceleration(*curve_, tau).vector;
  // covariant derivative of a Fermi-Walker frame: the Gamma term drops out
  return fw_frame_rhs(zero_christoffels(), g, p.velocity, a, curve_->c(), x);
}

Mat4 FrameField::at(double tau) const {
  Mat4 x = base_at(tau);
  for (const auto& [w, ax] : rotations_) x.block<4, 3>(0, 1) = x.block<4, 3>(0, 1) * rotation3(w * tau, ax);
  return x;
}

Mat4 FrameField::covariant_derivative(double tau) const {
  Mat4 x = base_at(tau);
  Mat4 dx = base_derivative(tau, x);
  for (const auto& [w, ax] : rotations_) {
    const Mat3 r = rotation3(w * tau, ax);
    const Mat3 dr = w * rotation3_derivative(w * tau, ax);
    const Eigen::Matrix<double, 4, 3> xs = x.block<4, 3>(0, 1);
    const Eigen::Matrix<double, 4, 3> dxs = dx.block<4, 3>(0, 1);
    x.block<4, 3>(0, 1) = xs * r;
    dx.block<4, 3>(0, 1) = dxs * r + xs * dr;
  }
  return dx;
}

Frame4 FrameField::frame(double tau) const {
  return Frame4(Event(curve_->chart().id(), curve_->position(tau)), at(tau));
}

FrameField fermi_walker_transport(std::shared_ptr<const ObserverCurve> curve, const Mat4& x0,
                                  double tau0, double tau_min, double tau_max,
                                  const IntegratorTolerances& tol) {
  if (!curve) throw Error(ErrorKind::InvalidInput, "fermi_walker_transport: null curve");
  if (!(tau_min <= tau0 && tau0 <= tau_max) || !curve->contains(tau_min) || !curve->contains(tau_max))
    throw Error(ErrorKind::Domain, "fermi_walker_transport: range outside the observer interval");
  const Chart& ch = curve->chart();
  const CurvePoint p0 = curve->at(tau0);
  const Metric4 g0 = ch.metric_at(p0.position);
  const double c = ch.c();
  if (!validate_frame_of_reference(g0, ch.future_reference(p0.position),
                                   ch.orientation_reference(p0.position), Frame4(Event(ch.id(), p0.position), x0)))
    throw Error(ErrorKind::Domain, "fermi_walker_transport: X0 is not a frame of reference");
  if ((x0.col(0) - p0.velocity / c).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, x0.col(0).cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::Domain, "fermi_walker_transport: X_0 differs from gamma'/c");

  FrameField ff;
  ff.curve_ = curve;
  ff.tau_min_ = tau_min;
  ff.tau_max_ = tau_max;

  if (curve->kind() == ObserverKind::Program &&
      (curve->program_frame(tau0) - x0).cwiseAbs().maxCoeff() <= 1e-12)
  {
    ff.from_program_ = true;
    return ff;
  }

  const ObserverCurve* cv = curve.get();
  const double h = tol.fd_step;
  OdeRhs rhs = [cv, &ch, c, h](double tau, const State& y, State& dy) {
    const CurvePoint p = cv->at(tau);
    const Metric4 g = ch.metric_at(p.position);
    const Christoffels G = ch.christoffels_at(p.position, h);
    const Vec4 a = cv->kind() == ObserverKind::Program
                       ? Vec4(cv->program_frame(tau).block<4, 3>(0, 1) * cv->program()(tau))
                       : Vec4(p.acceleration + contract(G, p.velocity, p.velocity));
    pack_frame(fw_frame_rhs(G, g, p.velocity, a, c, unpack_frame(y, 0)), dy, 0);
  };
  State y0(16);
  pack_frame(x0, y0, 0);
  ff.numeric_ = integrate_two_sided(rhs, y0, tau0, tau_min, tau_max, tol.ode());
  if (!ff.numeric_->complete())
    throw Error(ErrorKind::StepUnderflow, "fermi_walker_transport: integration did not complete");
  return ff;
}

FrameField rotating_frame(const FrameField& base, double omega, int axis) {
  if (axis < 1 || axis > 3) throw Error(ErrorKind::InvalidInput, "rotating_frame: axis must be 1, 2 or 3");
  if (!std::isfinite(omega)) throw Error(ErrorKind::InvalidInput, "rotating_frame: non-finite omega");
  FrameField out = base;
  if (omega != 0.0) out.rotations_.emplace_back(omega, axis);
  out.omega_ = omega;
  out.axis_ = axis;
  return out;
}

Mat4 standard_frame() { return Mat4::Identity(); }

Mat4 static_schwarzschild_frame(const Chart& chart, const Vec4& k) {
  const Metric4 g = chart.metric_at(k);
  Mat4 x = Mat4::Zero();
  for (int i = 0; i < 4; ++i) x(i, i) = 1.0 / std::sqrt(std::abs(g.g(i, i)));
  return x;
}

}  // namespace obsplit
