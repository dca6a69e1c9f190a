#pragma once

// Autoparallels, parallel transport, the exponential map and Jacobi fields.

#include <cstddef>
#include <span>
#include <vector>

#include "obsplit/ode.hpp"
#include "obsplit/spacetime.hpp"
#include "obsplit/types.hpp"

namespace obsplit {

struct IntegratorTolerances {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// Finite-difference step for curvature (and metric derivatives when no
  /// analytic Christoffels exist).
  double fd_step = kDefaultFdStep;

  OdeOptions ode() const {
    OdeOptions o;
    o.rel_tol = rel_tol;
    o.abs_tol = abs_tol;
    return o;
  }
};

struct GeodesicIVP {
  Event start;
  /// d kappa / ds at the start.
  Vec4 velocity = Vec4::Zero();
};

/// Interpolable geodesic, optionally carrying vector fields along it.
/// State layout: position (4), velocity (4), then 4 components per carried slot.
class DenseSolution {
 public:
  DenseSolution() = default;
  DenseSolution(std::string chart_id, GeodesicIVP ivp, double s_requested,
                DenseTrajectory trajectory, std::size_t carried_slots);

  const std::string& chart_id() const { return chart_id_; }
  const GeodesicIVP& ivp() const { return ivp_; }
  double s_begin() const { return traj_.t_begin(); }
  /// Parameter actually reached.
  double s_end() const { return traj_.t_end(); }
  double s_requested() const { return s_requested_; }
  bool reached_end() const { return traj_.status() == OdeStatus::Completed; }
  /// True when the integration stopped at the chart boundary.
  bool exited_chart() const { return traj_.status() == OdeStatus::LeftDomain; }
  bool covers(double s) const { return traj_.covers(s); }

  Vec4 position(double s) const;
  Vec4 velocity(double s) const;
  std::size_t carried_slots() const { return slots_; }
  Vec4 carried(double s, std::size_t slot) const;

  Vec4 end_position() const;
  Vec4 end_velocity() const;
  Vec4 end_carried(std::size_t slot) const;

  const OdeStats& stats() const { return traj_.stats(); }
  const DenseTrajectory& trajectory() const { return traj_; }

 private:
  std::string chart_id_;
  GeodesicIVP ivp_;
  double s_requested_ = 0.0;
  DenseTrajectory traj_;
  std::size_t slots_ = 0;
};

/// Solves kappa'' + Gamma(kappa', kappa') = 0 from ivp up to s_end. Stops early
/// (reached_end() false) when the path leaves the chart.
/// Throws EmptySolution on immediate exit, StepUnderflow when steps collapse.
DenseSolution integrate_geodesic(const Chart& chart, const GeodesicIVP& ivp, double s_end,
                                 const IntegratorTolerances& tol = {});

/// gamma_K(1). Throws NotInExpDomain when the geodesic leaves the chart first.
Event exp_map(const Chart& chart, const Event& q, const Vec4& k,
              const IntegratorTolerances& tol = {});

/// Transports v0 along the geodesic `along`; the result carries V in slot 0.
DenseSolution parallel_transport(const Chart& chart, const DenseSolution& along, const Vec4& v0,
                                 const IntegratorTolerances& tol = {});

/// Transports every column of `frame` (slots 0..3).
DenseSolution parallel_transport_frame(const Chart& chart, const DenseSolution& along,
                                       const Mat4& frame, const IntegratorTolerances& tol = {});

struct JacobiInitial {
  Vec4 j = Vec4::Zero();
  /// Covariant derivative nabla J / ds at the start.
  Vec4 dj = Vec4::Zero();
};

/// Several Jacobi fields along one geodesic. Field i occupies slots 2i (J) and
/// 2i + 1 (nabla J / ds).
class JacobiBundle {
 public:
  JacobiBundle() = default;
  JacobiBundle(DenseSolution sol, std::size_t fields) : sol_(std::move(sol)), fields_(fields) {}

  const DenseSolution& geodesic() const { return sol_; }
  std::size_t size() const { return fields_; }
  Vec4 field(double s, std::size_t i) const { return sol_.carried(s, 2 * i); }
  Vec4 derivative(double s, std::size_t i) const { return sol_.carried(s, 2 * i + 1); }
  Vec4 end_field(std::size_t i) const { return sol_.end_carried(2 * i); }
  Vec4 end_derivative(std::size_t i) const { return sol_.end_carried(2 * i + 1); }

 private:
  DenseSolution sol_;
  std::size_t fields_ = 0;
};

/// Solves nabla^2 J/ds^2 + R(J, gamma')gamma' = 0 jointly with the geodesic.
JacobiBundle integrate_jacobi_fields(const Chart& chart, const GeodesicIVP& ivp, double s_end,
                                     std::span<const JacobiInitial> init,
                                     const IntegratorTolerances& tol = {});

/// A single Jacobi field along a previously integrated geodesic.
class JacobiSolution {
 public:
  explicit JacobiSolution(JacobiBundle b) : bundle_(std::move(b)) {}
  const DenseSolution& geodesic() const { return bundle_.geodesic(); }
  Vec4 j(double s) const { return bundle_.field(s, 0); }
  Vec4 dj(double s) const { return bundle_.derivative(s, 0); }

 private:
  JacobiBundle bundle_;
};

JacobiSolution integrate_jacobi(const Chart& chart, const DenseSolution& geodesic, const Vec4& j0,
                                const Vec4& dj0, const IntegratorTolerances& tol = {});

/// d exp_q at K applied to the tangent vector whose horizontal part is
/// `base_dir` and whose connector (vertical) part is `fiber_dir`: J(1) of the
/// Jacobi field along s -> exp(sK) with J(0) = base_dir, nabla J(0) = fiber_dir.
Vec4 exp_differential(const Chart& chart, const Event& q, const Vec4& k, const Vec4& base_dir,
                      const Vec4& fiber_dir, const IntegratorTolerances& tol = {});

struct ConjugateScan {
  /// Parameter values s where exp_q(sK) is (numerically) conjugate to q.
  std::vector<double> values;
  /// Grid too coarse to say anything.
  bool resolution_warning = false;
  /// Geodesic left the chart before s_max; scan covers [0, s_reached].
  bool truncated = false;
  double s_reached = 0.0;
};

/// Best-effort conjugate point detector over (0, s_max] on a grid of grid_n
/// points, refined by bisection on sign changes and golden-section search on
/// near-zeros of the Jacobi determinant.
ConjugateScan detect_conjugate(const Chart& chart, const Event& q, const Vec4& k, double s_max,
                               int grid_n, const IntegratorTolerances& tol = {});

/// Determinant det[J_1(s), J_2(s), J_3(s), gamma'(s)] / s^3 used by the detector.
double conjugate_determinant(const JacobiBundle& bundle, double s);

}  // namespace obsplit
