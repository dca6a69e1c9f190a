#pragma once

// Closed-form linear algebra on a 3+1 Lorentz vector space.

#include "obsplit/types.hpp"

namespace obsplit {

inline constexpr double kDefaultCausalTol = 1e-10;

/// Minkowski form diag(1, -1, -1, -1).
Mat4 eta();

/// Lorentz product components g_ij of signature (+,-,-,-).
struct Metric4 {
  Mat4 g = Mat4::Zero();

  Metric4() = default;
  explicit Metric4(const Mat4& components) : g(components) {}

  static Metric4 minkowski() { return Metric4(eta()); }

  double dot(const Vec4& a, const Vec4& b) const { return a.dot(g * b); }
  double norm2(const Vec4& a) const { return dot(a, a); }

  /// Symmetric within `sym_tol` with one positive and three negative eigenvalues.
  bool has_lorentz_signature(double sym_tol = 1e-12) const;
};

enum class CausalCharacter { Timelike, Lightlike, Spacelike, Zero };

const char* to_string(CausalCharacter c) noexcept;

CausalCharacter causal_character(const Metric4& g, const Vec4& v,
                                 double tol = kDefaultCausalTol);

/// Time orientation test against a designated future-directed timelike vector.
/// Throws Domain for spacelike or zero `v`.
bool is_future_directed(const Metric4& g, const Vec4& future_ref, const Vec4& v,
                        double tol = kDefaultCausalTol);

/// Orthogonal projections along and across a non-null vector Z.
struct Projectors {
  Mat4 parallel;
  Mat4 perp;
};

Projectors projectors(const Metric4& g, const Vec4& z, double tol = kDefaultCausalTol);

/// Membership in the identity component of O(1,3).
bool is_restricted_lorentz(const Mat4& lambda, double tol = 1e-12);

/// A = scale * lorentz with scale > 0 and lorentz in O(1,3).
struct ConformalFactorization {
  double scale = 1.0;
  Mat4 lorentz = Mat4::Identity();
};

ConformalFactorization co_factorize(const Mat4& a, double tol = 1e-10);

/// Four ordered vectors at one event; column i holds X_i.
struct Frame4 {
  Event base;
  Mat4 columns = Mat4::Identity();

  Frame4() = default;
  Frame4(Event e, const Mat4& c) : base(std::move(e)), columns(c) {}

  Vec4 column(int i) const { return columns.col(i); }
};

/// Gram matrix g(X_i, X_j).
Mat4 gram(const Metric4& g, const Mat4& columns);

/// Largest |Gram(g, X) - eta| entry.
double gram_residual(const Metric4& g, const Mat4& columns);

/// Orthonormal, future-pointing and positively oriented relative to
/// `right_handed_ref`.
bool validate_frame_of_reference(const Metric4& g, const Vec4& future_ref,
                                 const Frame4& right_handed_ref, const Frame4& x,
                                 double tol = 1e-8);

/// Boost with rapidity `rapidity` along spatial axis `axis` (1..3).
Mat4 boost(double rapidity, int axis);

/// Spatial rotation by `angle` about axis `axis` (1..3), as a 4x4 matrix.
Mat4 rotation(double angle, int axis);

/// 3x3 right-handed rotation about coordinate axis `axis` (1..3).
Mat3 rotation3(double angle, int axis);

/// d/d(angle) of rotation3.
Mat3 rotation3_derivative(double angle, int axis);

bool all_finite(const Vec4& v);
bool all_finite(const Mat4& m);

}  // namespace obsplit
