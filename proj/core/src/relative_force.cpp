#include "obsplit/relative_force.hpp"

#include <cmath>

#include "obsplit/errors.hpp"

namespace obsplit {

namespace {

Mat4 invert_jacobian(const Mat4& j) {
  const Eigen::FullPivLU<Mat4> lu(j);
  if (!lu.isInvertible())
    throw Error(ErrorKind::CriticalPoint, "observer map Jacobian is singular");
  return lu.inverse();
}

// Observed event shifted by `d` in (c tau, x).
ObservedEvent shifted(const ObservedEvent& p, double c, int axis, double d) {
  Vec4 y = p.coords(c);
  y[axis] += d;
  return ObservedEvent::from_coords(y, c);
}

}  // namespace

ObserverChristoffels transformed_christoffels(const FrameField& frames, const ObservedEvent& p,
                                              ChristoffelMethod method, double h,
                                              const IntegratorTolerances& tol) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "transformed_christoffels: h must be > 0");
  const double c = frames.curve().c();
  const Chart& ch = frames.curve().chart();
  ObserverChristoffels ups = zero_christoffels();

  if (method == ChristoffelMethod::Jacobian) {
    const MapWithJacobian m = kinematic_map_with_jacobian(frames, p, tol);
    const Mat4 jinv = invert_jacobian(m.jacobian);
    const Christoffels G = ch.christoffels_at(m.image, tol.fd_step);
    // hess[l](i, j) = d^2 kappa^l / dx^i dx^j
    std::array<Mat4, 4> hess;
    for (auto& x : hess) x.setZero();
    for (int j = 0; j < 4; ++j) {
      const Mat4 jp = observer_map_jacobian(frames, shifted(p, c, j, h), tol);
      const Mat4 jm = observer_map_jacobian(frames, shifted(p, c, j, -h), tol);
      const Mat4 d = (jp - jm) / (2.0 * h);
      for (int l = 0; l < 4; ++l)
        for (int i = 0; i < 4; ++i) hess[static_cast<std::size_t>(l)](i, j) = d(l, i);
    }
    for (auto& x : hess) x = 0.5 * (x + x.transpose()).eval();
    for (int cc = 0; cc < 4; ++cc) {
      Mat4 u = Mat4::Zero();
      for (int l = 0; l < 4; ++l) {
        u += jinv(cc, l) * (m.jacobian.transpose() * G[static_cast<std::size_t>(l)] * m.jacobian);
        u += jinv(cc, l) * hess[static_cast<std::size_t>(l)];
      }
      ups[static_cast<std::size_t>(cc)] = u;
    }
    return ups;
  }

  const Mat4 alpha = pullback_metric_alpha(frames, p, tol);
  const Eigen::FullPivLU<Mat4> lu(alpha);
  if (!lu.isInvertible()) throw Error(ErrorKind::CriticalPoint, "pullback metric is singular");
  const Mat4 ainv = lu.inverse();
  std::array<Mat4, 4> da;  // da[k] = d alpha / d x^k
  for (int k = 0; k < 4; ++k) {
    const Mat4 ap = pullback_metric_alpha(frames, shifted(p, c, k, h), tol);
    const Mat4 am = pullback_metric_alpha(frames, shifted(p, c, k, -h), tol);
    da[static_cast<std::size_t>(k)] = (ap - am) / (2.0 * h);
  }
  for (int cc = 0; cc < 4; ++cc)
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        double s = 0.0;
        for (int l = 0; l < 4; ++l)
          s += ainv(cc, l) * (da[static_cast<std::size_t>(j)](l, i) + da[static_cast<std::size_t>(i)](l, j) -
                              da[static_cast<std::size_t>(l)](i, j));
        ups[static_cast<std::size_t>(cc)](i, j) = ups[static_cast<std::size_t>(cc)](j, i) = 0.5 * s;
      }
  return ups;
}

double force_zero_component(const Mat4& alpha, const Vec3& v, double c, const Mat4& jinv,
                            const Vec3& f_spatial) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidInput, "force_zero_component: c must be > 0");
  // w_i = alpha_0i + alpha_bi v^b / c
  Eigen::RowVector4d w = alpha.row(0);
  for (int b = 0; b < 3; ++b) w += alpha.row(b + 1) * (v[b] / c);
  const double den = w.dot(jinv.col(0));
  const double num = w * (jinv.block<4, 3>(0, 1) * f_spatial);
  const double scale = w.norm() * jinv.col(0).norm();
  if (!(std::abs(den) > 1e-14 * scale) || !std::isfinite(den))
    throw Error(ErrorKind::IllPosedForce, "force_zero_component: d/d kappa^0 is orthogonal to the worldline");
  return -num / den;
}

ForceBreakdown assemble_relative_force(double m, double c, const ObserverChristoffels& ups,
                                       const Mat4& jinv, const Mat4& alpha, const Vec3& v,
                                       double tau_dot, double tau_ddot, const Vec3& f_spatial) {
  if (!(tau_dot > 0.0)) throw Error(ErrorKind::Domain, "relative_force: tau_dot must be > 0");
  ForceBreakdown fb;
  Vec4 fp;
  fp[0] = f_spatial.isZero(0.0) ? 0.0 : force_zero_component(alpha, v, c, jinv, f_spatial);
  fp.tail<3>() = f_spatial;
  fb.actual = (jinv * fp).tail<3>() / (tau_dot * tau_dot);
  for (int cc = 1; cc < 4; ++cc) {
    const Mat4& u = ups[static_cast<std::size_t>(cc)];
    const int r = cc - 1;
    fb.pseudo[0][r] = -m * c * c * u(0, 0);
    fb.pseudo[1][r] = -m * (tau_ddot / (tau_dot * tau_dot)) * v[r];
    fb.pseudo[2][r] = -2.0 * m * c * u.block<1, 3>(0, 1).dot(v.transpose());
    fb.pseudo[3][r] = -m * v.dot(u.block<3, 3>(1, 1) * v);
  }
  fb.total = fb.actual + fb.pseudo_sum();
  return fb;
}

ForceBreakdown relative_force(double m, const FrameField& frames, const RelativeMotionSample& sample,
                              const Vec3& f_spatial, double tau_ddot, ChristoffelMethod method,
                              const IntegratorTolerances& tol) {
  const double c = frames.curve().c();
  const ObservedEvent p(sample.tau, sample.x);
  const MapWithJacobian mj = kinematic_map_with_jacobian(frames, p, tol);
  const Mat4 jinv = invert_jacobian(mj.jacobian);
  const Mat4 alpha = mj.jacobian.transpose() * frames.curve().chart().metric_at(mj.image).g * mj.jacobian;
  const ObserverChristoffels ups = transformed_christoffels(frames, p, method, 1e-4, tol);
  const double tdd = std::isfinite(tau_ddot) ? tau_ddot : sample.tau_ddot;
  return assemble_relative_force(m, c, ups, jinv, alpha, sample.v, sample.tau_dot, tdd, f_spatial);
}

}  // namespace obsplit
