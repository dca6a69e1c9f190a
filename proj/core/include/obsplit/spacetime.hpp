#pragma once

// Single-chart spacetime models: metric, Christoffel symbols and curvature.

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "obsplit/lorentz.hpp"
#include "obsplit/types.hpp"

namespace obsplit {

inline constexpr double kDefaultFdStep = 1e-5;

/// riemann[k][l](i, j) = R^k_{l i j}, with
/// R(d_i, d_j) d_l = R^k_{l i j} d_k and R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
using Riemann = std::array<std::array<Mat4, 4>, 4>;

struct CurvatureSample {
  Christoffels gamma;
  Riemann riemann;
  /// Ric_{lj} = R^k_{l k j}
  Mat4 ricci;
};

enum class ChartKind { Minkowski, Schwarzschild, Custom };

class Chart {
 public:
  using DomainFn = std::function<bool(const Vec4&)>;
  using MetricFn = std::function<Mat4(const Vec4&)>;
  using ChristoffelFn = std::function<Christoffels(const Vec4&)>;

  /// Standard coordinates (ct, x, y, z) on R^4.
  static Chart minkowski(double c = 1.0);

  /// Exterior Schwarzschild coordinates (ct, r, theta, phi) with
  /// r > radius, 0 < theta < pi, -pi < phi < pi.
  static Chart schwarzschild(double radius, double c = 1.0);

  /// User-supplied metric; Christoffels fall back to finite differences
  /// unless `christoffels` is given.
  static Chart custom(std::string id, DomainFn domain, MetricFn metric, double c = 1.0,
                      std::optional<ChristoffelFn> christoffels = std::nullopt);

  const std::string& id() const { return id_; }
  ChartKind kind() const { return kind_; }
  double c() const { return c_; }
  /// Schwarzschild radius, 0 for other charts.
  double radius() const { return radius_; }
  bool is_flat() const { return kind_ == ChartKind::Minkowski; }

  bool contains(const Vec4& k) const;

  /// Throws OutOfChart when `k` is outside the domain.
  Metric4 metric_at(const Vec4& k) const;

  /// Analytic Christoffels when available, central differences otherwise.
  Christoffels christoffels_at(const Vec4& k, double fd_step = kDefaultFdStep) const;

  /// Always the finite-difference route, regardless of analytic availability.
  Christoffels christoffels_fd(const Vec4& k, double fd_step = kDefaultFdStep) const;

  /// Metric derivatives d_m g_ij by central differences; dg[m](i, j).
  std::array<Mat4, 4> metric_derivatives(const Vec4& k, double fd_step = kDefaultFdStep) const;

  CurvatureSample riemann_ricci_at(const Vec4& k, double fd_step = kDefaultFdStep) const;

  /// R^k_{l i j} a^l b^i d^j for every k; the curvature term of the Jacobi equation
  /// uses a = d = gamma', b = J.
  Vec4 riemann_action(const Vec4& k, const Vec4& b, const Vec4& a, double fd_step = kDefaultFdStep) const;

  /// Designated future-directed timelike vector at k (the coordinate d_0).
  Vec4 future_reference(const Vec4& k) const;

  /// Designated right-handed reference frame at k (the coordinate frame).
  Frame4 orientation_reference(const Vec4& k) const;

 private:
  Chart() = default;
  void require_inside(const Vec4& k, const char* who) const;

  ChartKind kind_ = ChartKind::Minkowski;
  std::string id_;
  double c_ = 1.0;
  double radius_ = 0.0;
  DomainFn domain_;
  MetricFn metric_;
  std::optional<ChristoffelFn> christoffels_;
};

using ChartPtr = std::shared_ptr<const Chart>;

/// Exact Schwarzschild Christoffels in (ct, r, theta, phi).
Christoffels schwarzschild_christoffels(double radius, const Vec4& k);

}  // namespace obsplit
