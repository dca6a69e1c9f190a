#include "obsplit/lorentz.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "obsplit/errors.hpp"

namespace obsplit {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::SingularProjector: return "singular-projector";
    case ErrorKind::NotInGroup: return "not-in-group";
    case ErrorKind::OutOfChart: return "out-of-chart";
    case ErrorKind::DegenerateMetric: return "degenerate-metric";
    case ErrorKind::EmptySolution: return "empty-solution";
    case ErrorKind::StepUnderflow: return "step-underflow";
    case ErrorKind::NotInExpDomain: return "not-in-exp-domain";
    case ErrorKind::UnreachableDirection: return "unreachable-direction";
    case ErrorKind::Superluminal: return "superluminal";
    case ErrorKind::IllPosedForce: return "ill-posed-force";
    case ErrorKind::CriticalPoint: return "critical-point";
    case ErrorKind::NonInvertible: return "non-invertible";
    case ErrorKind::Signature: return "signature";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

const char* to_string(CausalCharacter c) noexcept {
  switch (c) {
    case CausalCharacter::Timelike: return "timelike";
    case CausalCharacter::Lightlike: return "lightlike";
    case CausalCharacter::Spacelike: return "spacelike";
    case CausalCharacter::Zero: return "zero";
  }
  return "unknown";
}

Mat4 eta() { return Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal(); }

bool all_finite(const Vec4& v) { return v.allFinite(); }
bool all_finite(const Mat4& m) { return m.allFinite(); }

bool Metric4::has_lorentz_signature(double sym_tol) const {
  if (!g.allFinite()) return false;
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > sym_tol) return false;
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  const Vec4& ev = es.eigenvalues();
  int pos = 0;
  int neg = 0;
  for (int i = 0; i < 4; ++i) {
    if (ev[i] > 0.0) ++pos;
    if (ev[i] < 0.0) ++neg;
  }
  return pos == 1 && neg == 3;
}

CausalCharacter causal_character(const Metric4& g, const Vec4& v, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidInput, "causal_character: tol must be > 0");
  if (!v.allFinite() || !g.g.allFinite())
    throw Error(ErrorKind::InvalidInput, "causal_character: non-finite input");
  const double q = g.norm2(v);
  if (q > tol) return CausalCharacter::Timelike;
  if (q < -tol) return CausalCharacter::Spacelike;
  if (v.cwiseAbs().maxCoeff() > tol) return CausalCharacter::Lightlike;
  return CausalCharacter::Zero;
}

bool is_future_directed(const Metric4& g, const Vec4& future_ref, const Vec4& v, double tol) {
  const auto ch = causal_character(g, v, tol);
  if (ch == CausalCharacter::Spacelike || ch == CausalCharacter::Zero)
    throw Error(ErrorKind::Domain,
                std::string("is_future_directed: vector is ") + to_string(ch));
  return g.dot(future_ref, v) > 0.0;
}

Projectors projectors(const Metric4& g, const Vec4& z, double tol) {
  if (!z.allFinite()) throw Error(ErrorKind::InvalidInput, "projectors: non-finite vector");
  const double zz = g.norm2(z);
  if (std::abs(zz) <= tol)
    throw Error(ErrorKind::SingularProjector, "projectors: vector is lightlike or zero");
  Projectors p;
  p.parallel = z * (g.g * z).transpose() / zz;
  p.perp = Mat4::Identity() - p.parallel;
  return p;
}

bool is_restricted_lorentz(const Mat4& lambda, double tol) {
  if (!lambda.allFinite()) throw Error(ErrorKind::InvalidInput, "is_restricted_lorentz: non-finite matrix");
  const Mat4 e = eta();
  const double defect = (lambda.transpose() * e * lambda - e).cwiseAbs().maxCoeff();
  if (defect > tol) return false;
  if (!(lambda(0, 0) > 0.0)) return false;
  return lambda.bottomRightCorner<3, 3>().determinant() > 0.0;
}

ConformalFactorization co_factorize(const Mat4& a, double tol) {
  if (!a.allFinite()) throw Error(ErrorKind::InvalidInput, "co_factorize: non-finite matrix");
  const Mat4 e = eta();
  const Mat4 m = a.transpose() * e * a;
  const double lambda_sq = m(0, 0);
  if (!(lambda_sq > 0.0))
    throw Error(ErrorKind::NotInGroup, "co_factorize: matrix is not conformal");
  if ((m - lambda_sq * e).cwiseAbs().maxCoeff() > tol * std::max(1.0, lambda_sq))
    throw Error(ErrorKind::NotInGroup, "co_factorize: matrix is not conformal");

  ConformalFactorization f;
  f.scale = std::pow(std::abs(a.determinant()), 0.25);
  f.lorentz = a / f.scale;
  if ((f.lorentz.transpose() * e * f.lorentz - e).cwiseAbs().maxCoeff() > tol)
    throw Error(ErrorKind::NotInGroup, "co_factorize: normalized factor is not in O(1,3)");
  return f;
}

Mat4 gram(const Metric4& g, const Mat4& columns) {
  return columns.transpose() * g.g * columns;
}

double gram_residual(const Metric4& g, const Mat4& columns) {
  return (gram(g, columns) - eta()).cwiseAbs().maxCoeff();
}

bool validate_frame_of_reference(const Metric4& g, const Vec4& future_ref,
                                 const Frame4& right_handed_ref, const Frame4& x,
                                 double tol) {
  if (!x.columns.allFinite()) return false;
  if (gram_residual(g, x.columns) > tol) return false;
  const Vec4 x0 = x.column(0);
  if (causal_character(g, x0) != CausalCharacter::Timelike) return false;
  if (!(g.dot(future_ref, x0) > 0.0)) return false;
  const double ref_det = right_handed_ref.columns.determinant();
  if (std::abs(ref_det) <= 1e-12) return false;
  // sign of det(ref^-1 X)
  return x.columns.determinant() / ref_det > 0.0;
}

Mat4 boost(double rapidity, int axis) {
  if (axis < 1 || axis > 3) throw Error(ErrorKind::InvalidInput, "boost: axis must be 1..3");
  Mat4 b = Mat4::Identity();
  b(0, 0) = std::cosh(rapidity);
  b(axis, axis) = std::cosh(rapidity);
  b(0, axis) = std::sinh(rapidity);
  b(axis, 0) = std::sinh(rapidity);
  return b;
}

Mat3 rotation3(double angle, int axis) {
  if (axis < 1 || axis > 3) throw Error(ErrorKind::InvalidInput, "rotation: axis must be 1..3");
  const int i = axis % 3;        // next axis
  const int j = (axis + 1) % 3;  // axis after that
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r = Mat3::Identity();
  r(i, i) = c;
  r(i, j) = -s;
  r(j, i) = s;
  r(j, j) = c;
  return r;
}

Mat3 rotation3_derivative(double angle, int axis) {
  if (axis < 1 || axis > 3) throw Error(ErrorKind::InvalidInput, "rotation: axis must be 1..3");
  const int i = axis % 3;
  const int j = (axis + 1) % 3;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r = Mat3::Zero();
  r(i, i) = -s;
  r(i, j) = -c;
  r(j, i) = c;
  r(j, j) = -s;
  return r;
}

Mat4 rotation(double angle, int axis) {
  Mat4 r = Mat4::Identity();
  r.bottomRightCorner<3, 3>() = rotation3(angle, axis);
  return r;
}

}  // namespace obsplit
