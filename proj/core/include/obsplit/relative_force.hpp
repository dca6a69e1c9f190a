#pragma once

// Christoffel symbols in observer coordinates and the relative-force law.

#include <array>
#include <string_view>

#include "obsplit/splitting.hpp"

namespace obsplit {

enum class ChristoffelMethod {
  /// Transformation law with the inverse Jacobian and a finite-difference
  /// Hessian of the observer map.
  Jacobian,
  /// Levi-Civita formula on finite-difference derivatives of alpha.
  Pullback,
};

/// Upsilon[c](i, j) = Upsilon^c_ij in (c tau, x).
using ObserverChristoffels = Christoffels;

ObserverChristoffels transformed_christoffels(const FrameField& frames, const ObservedEvent& p,
                                              ChristoffelMethod method, double h = 1e-4,
                                              const IntegratorTolerances& tol = {});

/// Time component F'^0 making F' orthogonal to the observed worldline.
/// `jinv` is d x / d kappa. Throws IllPosedForce for a vanishing denominator.
double force_zero_component(const Mat4& alpha, const Vec3& v, double c, const Mat4& jinv,
                            const Vec3& f_spatial);

struct ForceBreakdown {
  Vec3 total = Vec3::Zero();
  /// (1 / tau_dot^2) (d x / d kappa) F'
  Vec3 actual = Vec3::Zero();
  /// -m c^2 Ups^c_00, -m (tau_ddot / tau_dot^2) v^c, -2 m c Ups^c_0a v^a,
  /// -m Ups^c_ab v^a v^b
  std::array<Vec3, 4> pseudo{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};

  static constexpr std::array<std::string_view, 4> kPseudoLabels{
      "static", "clock-rate", "coriolis", "velocity-quadratic"};

  Vec3 pseudo_sum() const { return pseudo[0] + pseudo[1] + pseudo[2] + pseudo[3]; }
};

/// Algebraic assembly of the force law from precomputed ingredients.
ForceBreakdown assemble_relative_force(double m, double c, const ObserverChristoffels& ups,
                                       const Mat4& jinv, const Mat4& alpha, const Vec3& v,
                                       double tau_dot, double tau_ddot, const Vec3& f_spatial);

/// Relative force at a tracked sample. `tau_ddot` overrides the sample's
/// estimate when finite.
ForceBreakdown relative_force(double m, const FrameField& frames, const RelativeMotionSample& sample,
                              const Vec3& f_spatial, double tau_ddot,
                              ChristoffelMethod method = ChristoffelMethod::Jacobian,
                              const IntegratorTolerances& tol = {});

}  // namespace obsplit
