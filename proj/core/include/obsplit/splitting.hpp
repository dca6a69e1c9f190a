#pragma once

// Static and kinematic observer mappings, their differentials, numerical
// inversion and relative motion.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "obsplit/geodesic.hpp"
#include "obsplit/lorentz.hpp"
#include "obsplit/observer.hpp"

namespace obsplit {

/// Observer coordinates (tau, x) with x != 0.
class ObservedEvent {
 public:
  /// Throws InvalidInput for non-finite data and Domain for x = 0.
  ObservedEvent(double tau, const Vec3& x);

  double tau() const { return tau_; }
  const Vec3& x() const { return x_; }
  double radius() const { return x_.norm(); }
  /// (c tau, x^1, x^2, x^3)
  Vec4 coords(double c) const;
  static ObservedEvent from_coords(const Vec4& y, double c);

 private:
  double tau_;
  Vec3 x_;
};

/// -|x| X_0 + x^a X_a, the past-directed lightlike initial vector.
Vec4 cone_vector(const Mat4& frame, const Vec3& x);

/// exp_q(-|x| X_0 + x^a X_a). Throws UnreachableDirection when the geodesic
/// leaves the chart first.
Event static_observer_map(const Chart& chart, const Frame4& frame, const Vec3& x,
                          const IntegratorTolerances& tol = {});

/// Spatial distance of two past-lightlike vectors as seen along X_0.
double static_distance(const Metric4& g, const Vec4& x0, const Vec4& k, const Vec4& k2);

Event kinematic_observer_map(const FrameField& frames, const ObservedEvent& p,
                             const IntegratorTolerances& tol = {});

/// Columns d phi / d(c tau), d phi / d x^a from Jacobi fields.
Mat4 observer_map_jacobian(const FrameField& frames, const ObservedEvent& p,
                           const IntegratorTolerances& tol = {});

struct MapWithJacobian {
  Vec4 image;
  Mat4 jacobian;
  /// Initial lightlike vector K at gamma(tau).
  Vec4 k;
  /// g(K, K) and g(gamma', K) at gamma(tau).
  double k_norm2 = 0.0;
  double k_dot_velocity = 0.0;
};

/// Image and Jacobian from a single integration.
MapWithJacobian kinematic_map_with_jacobian(const FrameField& frames, const ObservedEvent& p,
                                            const IntegratorTolerances& tol = {});

/// Central finite differences of the kinematic map in (c tau, x).
Mat4 observer_map_jacobian_fd(const FrameField& frames, const ObservedEvent& p, double h = 1e-5,
                              const IntegratorTolerances& tol = {});

struct SearchConfig {
  double tau_min = -10.0;
  double tau_max = 10.0;
  Vec3 box_min = Vec3::Constant(-10.0);
  Vec3 box_max = Vec3::Constant(10.0);
  /// Grid points per spatial axis.
  int n_x = 9;
  /// Proper-time seeds per spatial start: the light-travel estimate plus
  /// n_tau - 1 evenly spaced offsets across [tau_min, tau_max].
  int n_tau = 1;
  int max_iter = 50;
  double inv_tol = 1e-10;
  double merge_tol = 1e-6;
  double cond_max = 1e8;
  int threads = 1;
};

struct Preimage {
  double tau = 0.0;
  Vec3 x = Vec3::Zero();
  /// max-norm of phi(p) - target
  double residual = 0.0;
  double condition = 0.0;
  bool regular = false;
  int iterations = 0;

  ObservedEvent event() const { return ObservedEvent(tau, x); }
};

struct InversionResult {
  std::vector<Preimage> preimages;
  int starts = 0;
  int converged = 0;
  /// The target lies on the observer's worldline.
  bool origin_excluded = false;
  std::string diagnostics;
};

InversionResult invert_observer_map(const FrameField& frames, const Event& target,
                                    const SearchConfig& cfg = {},
                                    const IntegratorTolerances& tol = {});

/// Damped Newton from one start; empty when it does not converge.
std::optional<Preimage> refine_preimage(const FrameField& frames, const Vec4& target,
                                        const Vec4& start_coords, const SearchConfig& cfg,
                                        const IntegratorTolerances& tol = {});

enum class WorldlineKind {
  /// Parametrized by proper time.
  Observer,
  /// Arbitrary parameter; proper time is recovered from the metric.
  Timelike,
  /// Affine parameter of a lightlike geodesic.
  Lightlike,
};

/// A parametrized curve in the chart of the frames.
struct Worldline {
  WorldlineKind kind = WorldlineKind::Observer;
  std::function<Vec4(double)> position;
  std::function<Vec4(double)> velocity;
  double s_min = 0.0;
  double s_max = 0.0;
};

Worldline worldline_from_observer(std::shared_ptr<const ObserverCurve> curve);
Worldline worldline_from_geodesic(std::shared_ptr<const DenseSolution> geodesic);
/// s -> phi(s, x): the curve resting at fixed observer coordinates x.
Worldline worldline_comoving(std::shared_ptr<const FrameField> frames, const Vec3& x,
                             const IntegratorTolerances& tol = {});

struct RelativeMotionSample {
  double s = 0.0;
  double tau = 0.0;
  Vec3 x = Vec3::Zero();
  /// d tau / d s (s the proper time of the observed curve; the affine
  /// parameter for lightlike curves).
  double tau_dot = 0.0;
  /// d^2 tau / d s^2
  double tau_ddot = 0.0;
  Vec3 v = Vec3::Zero();
  Vec3 dv_dtau = Vec3::Zero();
  /// Proper-time rate ds/dsigma of the worldline parameter (1 for observers).
  double proper_rate = 1.0;
  bool ambiguous = false;
  bool not_an_observer = false;
  /// tau_dot <= 0 on a timelike curve.
  bool time_inconsistent = false;
};

struct ObserveOptions {
  SearchConfig search;
  /// Stencil step in the worldline parameter for dv/dtau and tau_ddot.
  double h = 1e-3;
};

struct ObserveReport {
  std::vector<RelativeMotionSample> samples;
  /// Tracking stopped early: no preimage continues the branch.
  bool branch_lost = false;
  std::string diagnostics;
};

ObserveReport observe_curve(const FrameField& frames, const Worldline& worldline,
                            const std::vector<double>& s_samples, const ObserveOptions& opts = {},
                            const IntegratorTolerances& tol = {});

/// alpha = J^T g(phi(p)) J in (c tau, x).
Mat4 pullback_metric_alpha(const FrameField& frames, const ObservedEvent& p,
                           const IntegratorTolerances& tol = {});

/// 1 / sqrt(alpha_00 + 2 alpha_0a v^a / c + alpha_ab v^a v^b / c^2).
/// Throws Superluminal when the radicand is not positive.
double tau_dot(const Mat4& alpha, const Vec3& v, double c);

/// Ordered, deterministic parallel loop over [0, n).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace obsplit
