#pragma once

// Observer worldlines, proper acceleration, Fermi-Walker transport and
// frame-of-reference fields.

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "obsplit/geodesic.hpp"
#include "obsplit/lorentz.hpp"
#include "obsplit/ode.hpp"
#include "obsplit/spacetime.hpp"

namespace obsplit {

/// Dense output on both sides of an initial parameter tau0.
class TwoSidedTrajectory {
 public:
  TwoSidedTrajectory() = default;
  TwoSidedTrajectory(double tau0, DenseTrajectory backward, DenseTrajectory forward)
      : tau0_(tau0), back_(std::move(backward)), fwd_(std::move(forward)) {}

  double tau0() const { return tau0_; }
  double tau_min() const { return back_.t_end(); }
  double tau_max() const { return fwd_.t_end(); }
  bool covers(double tau) const { return tau >= tau0_ ? fwd_.covers(tau) : back_.covers(tau); }
  State evaluate(double tau) const { return tau >= tau0_ ? fwd_.evaluate(tau) : back_.evaluate(tau); }
  OdeStats stats() const {
    OdeStats s = back_.stats();
    s += fwd_.stats();
    return s;
  }
  bool complete() const {
    return back_.status() == OdeStatus::Completed && fwd_.status() == OdeStatus::Completed;
  }

 private:
  double tau0_ = 0.0;
  DenseTrajectory back_;
  DenseTrajectory fwd_;
};

/// Integrates an ODE from (tau0, y0) towards tau_min and tau_max.
TwoSidedTrajectory integrate_two_sided(const OdeRhs& rhs, const State& y0, double tau0,
                                       double tau_min, double tau_max, const OdeOptions& opts,
                                       const OdeAdmissible& admissible = nullptr);

struct CurvePoint {
  Vec4 position;
  /// d gamma / d tau
  Vec4 velocity;
  /// d^2 gamma / d tau^2 (coordinate, not covariant)
  Vec4 acceleration;
};

enum class ObserverKind { Inertial, UniformlyAccelerated, Static, Program };

const char* to_string(ObserverKind k) noexcept;

/// A proper-time parametrized future-directed timelike curve,
/// g(gamma', gamma') = c^2.
class ObserverCurve {
 public:
  ObserverKind kind() const { return kind_; }
  const Chart& chart() const { return *chart_; }
  const ChartPtr& chart_ptr() const { return chart_; }
  double c() const { return chart_->c(); }
  double tau_min() const { return tau_min_; }
  double tau_max() const { return tau_max_; }
  bool contains(double tau) const { return tau >= tau_min_ && tau <= tau_max_; }
  bool is_analytic() const { return !numeric_.has_value(); }

  /// Throws Domain when tau is outside the interval.
  CurvePoint at(double tau) const;
  Vec4 position(double tau) const { return at(tau).position; }
  Vec4 velocity(double tau) const { return at(tau).velocity; }

  /// Proper acceleration program in the frame basis, for Program observers.
  const std::function<Vec3(double)>& program() const { return program_; }
  /// Co-integrated Fermi-Walker frame, for Program observers.
  Mat4 program_frame(double tau) const;

  OdeStats stats() const { return numeric_ ? numeric_->stats() : OdeStats{}; }

 private:
  friend ObserverCurve make_inertial_observer(ChartPtr, const Event&, const Vec4&, double, double,
                                              const IntegratorTolerances&);
  friend ObserverCurve make_uniformly_accelerated_observer(double, double);
  friend ObserverCurve make_static_observer(ChartPtr, const Event&);
  friend ObserverCurve make_program_observer(ChartPtr, const Event&, const Mat4&,
                                             std::function<Vec3(double)>, double, double,
                                             const IntegratorTolerances&);

  ObserverKind kind_ = ObserverKind::Inertial;
  ChartPtr chart_;
  double tau_min_ = 0.0;
  double tau_max_ = 0.0;
  // analytic representation
  Vec4 q0_ = Vec4::Zero();
  Vec4 u0_ = Vec4::Zero();
  double accel_ = 0.0;
  // numeric representation
  std::optional<TwoSidedTrajectory> numeric_;
  std::function<Vec3(double)> program_;
  IntegratorTolerances tol_;
};

/// Geodesic observer through q0 with tangent u0 (rescaled to g(u0, u0) = c^2).
/// Minkowski observers are analytic; elsewhere the geodesic is integrated over
/// [tau_min, tau_max]. Throws Domain when u0 is not future-directed timelike.
ObserverCurve make_inertial_observer(ChartPtr chart, const Event& q0, const Vec4& u0,
                                     double tau_min = -10.0, double tau_max = 10.0,
                                     const IntegratorTolerances& tol = {});

/// Minkowski hyperbolic motion starting at rest at the origin, accelerating
/// along x^1. Throws Domain for a <= 0.
ObserverCurve make_uniformly_accelerated_observer(double a, double c = 1.0);

/// Schwarzschild observer at fixed (r, theta, phi).
ObserverCurve make_static_observer(ChartPtr chart, const Event& q0);

/// Worldline driven by a proper-acceleration program a^b(tau) in the frame
/// basis, starting at q0 with frame of reference `frame0` (X_0 = gamma'/c).
/// The frame is Fermi-Walker transported along with the curve.
ObserverCurve make_program_observer(ChartPtr chart, const Event& q0, const Mat4& frame0,
                                    std::function<Vec3(double)> program, double tau_min,
                                    double tau_max, const IntegratorTolerances& tol = {});

struct ProperAcceleration {
  /// nabla gamma' / d tau
  Vec4 vector;
  /// sqrt(-g(A, A))
  double magnitude = 0.0;
};

ProperAcceleration proper_acceleration(const ObserverCurve& curve, double tau);

using VectorAlong = std::function<Vec4(double)>;

/// Fermi-Walker derivative for observers; dY/dtau is taken by a five-point
/// stencil of step `h`.
Vec4 fermi_walker_derivative(const ObserverCurve& curve, const VectorAlong& y, double tau,
                             double h = 1e-3);

/// Same, with the ordinary derivative dY/dtau supplied.
Vec4 fermi_walker_derivative(const ObserverCurve& curve, const Vec4& y, const Vec4& dy, double tau);

/// Frame of reference along an observer: Fermi-Walker transported, optionally
/// rotated about one spatial axis with angular velocity omega.
class FrameField {
 public:
  const ObserverCurve& curve() const { return *curve_; }
  std::shared_ptr<const ObserverCurve> curve_ptr() const { return curve_; }
  double tau_min() const { return tau_min_; }
  double tau_max() const { return tau_max_; }
  bool contains(double tau) const { return tau >= tau_min_ && tau <= tau_max_; }
  double omega() const { return omega_; }
  int axis() const { return axis_; }

  /// Columns X_0..X_3 at tau.
  Mat4 at(double tau) const;
  /// Columns nabla X_i / d tau.
  Mat4 covariant_derivative(double tau) const;
  Frame4 frame(double tau) const;

  OdeStats stats() const { return numeric_ ? numeric_->stats() : OdeStats{}; }

 private:
  friend FrameField fermi_walker_transport(std::shared_ptr<const ObserverCurve>, const Mat4&,
                                           double, double, double, const IntegratorTolerances&);
  friend FrameField rotating_frame(const FrameField&, double, int);

  Mat4 base_at(double tau) const;
  Mat4 base_derivative(double tau, const Mat4& x) const;

  std::shared_ptr<const ObserverCurve> curve_;
  double tau_min_ = 0.0;
  double tau_max_ = 0.0;
  std::optional<TwoSidedTrajectory> numeric_;
  bool from_program_ = false;
  std::vector<std::pair<double, int>> rotations_;
  double omega_ = 0.0;
  int axis_ = 1;
};

/// Fermi-Walker transport of the frame X0 given at tau0 over [tau_min, tau_max].
/// For program observers started with the same frame, the co-integrated frame
/// is reused. Throws Domain when X0 is not a frame of reference with
/// X_0 = gamma'(tau0)/c.
FrameField fermi_walker_transport(std::shared_ptr<const ObserverCurve> curve, const Mat4& x0,
                                  double tau0, double tau_min, double tau_max,
                                  const IntegratorTolerances& tol = {});

/// Spatial columns post-multiplied by the rotation by omega*tau about `axis`.
FrameField rotating_frame(const FrameField& base, double omega, int axis);

/// Standard frame at a Minkowski event: the coordinate basis.
Mat4 standard_frame();

/// Orthonormal frame of a static Schwarzschild observer at k.
Mat4 static_schwarzschild_frame(const Chart& chart, const Vec4& k);

}  // namespace obsplit
