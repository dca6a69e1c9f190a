#pragma once

// Embedded Runge-Kutta 5(4) (Dormand-Prince) with continuous dense output.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace obsplit {

using State = Eigen::VectorXd;

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// 0 selects the initial step automatically.
  double initial_step = 0.0;
  std::size_t max_steps = 200000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  /// Largest scaled local error estimate among accepted steps (<= 1 by construction).
  double max_error_estimate = 0.0;

  OdeStats& operator+=(const OdeStats& o);
};

enum class OdeStatus {
  Completed,
  /// A stage left the admissible set and no shorter step recovered.
  LeftDomain,
  StepUnderflow,
  MaxSteps,
};

const char* to_string(OdeStatus s) noexcept;

/// dy/dt = f(t, y); writes into `dy` (already sized).
using OdeRhs = std::function<void(double t, const State& y, State& dy)>;
/// States outside the admissible set are never evaluated by the right-hand side.
using OdeAdmissible = std::function<bool(const State& y)>;

class DenseTrajectory {
 public:
  DenseTrajectory() = default;

  double t_begin() const { return t_begin_; }
  /// Parameter actually reached (equals the requested end on completion).
  double t_end() const { return t_end_; }
  bool empty() const { return segments_.empty(); }
  std::size_t dim() const { return static_cast<std::size_t>(y_begin_.size()); }
  OdeStatus status() const { return status_; }
  const OdeStats& stats() const { return stats_; }
  const State& initial_state() const { return y_begin_; }
  const State& final_state() const { return y_end_; }

  /// Dense interpolation; `t` must lie between t_begin and t_end.
  State evaluate(double t) const;
  bool covers(double t) const;

  /// Accepted step boundaries, including both ends.
  std::vector<double> knots() const;

 private:
  friend DenseTrajectory integrate_dopri5(const OdeRhs&, const State&, double, double,
                                          const OdeOptions&, const OdeAdmissible&);
  struct Segment {
    double t0;
    double h;
    State r1, r2, r3, r4, r5;
  };

  double t_begin_ = 0.0;
  double t_end_ = 0.0;
  State y_begin_;
  State y_end_;
  std::vector<Segment> segments_;
  OdeStatus status_ = OdeStatus::Completed;
  OdeStats stats_;
};

/// Integrates from t0 to t1 (either direction). Never throws for numerical
/// trouble: the trajectory up to the last accepted step is returned with a status.
DenseTrajectory integrate_dopri5(const OdeRhs& rhs, const State& y0, double t0, double t1,
                                 const OdeOptions& opts = {},
                                 const OdeAdmissible& admissible = nullptr);

}  // namespace obsplit
