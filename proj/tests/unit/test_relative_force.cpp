#include <doctest.h>

#include <cmath>
#include <memory>

#include <obsplit/errors.hpp>
#include <obsplit/relative_force.hpp>

using namespace obsplit;

namespace {

ChartPtr mink() { return std::make_shared<const Chart>(Chart::minkowski()); }

std::shared_ptr<const FrameField> sr_frames() {
  auto o = std::make_shared<const ObserverCurve>(
      make_inertial_observer(mink(), Event("minkowski", Vec4::Zero()), Vec4(1, 0, 0, 0)));
  return std::make_shared<const FrameField>(fermi_walker_transport(o, standard_frame(), 0.0, -40.0, 40.0));
}

std::shared_ptr<const FrameField> acc_rot_frames(double a = 1.0, double omega = 1.0) {
  auto o = std::make_shared<const ObserverCurve>(make_uniformly_accelerated_observer(a));
  return std::make_shared<const FrameField>(
      rotating_frame(fermi_walker_transport(o, standard_frame(), 0.0, -4.0, 4.0), omega, 1));
}

double max_abs(const Christoffels& g, int first = 0) {
  double m = 0.0;
  for (int k = first; k < 4; ++k) m = std::max(m, g[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff());
  return m;
}

ObserveOptions sr_opts() {
  ObserveOptions o;
  o.search.tau_min = -20;
  o.search.tau_max = 20;
  o.search.box_min = Vec3::Constant(-8);
  o.search.box_max = Vec3::Constant(8);
  o.search.n_x = 3;
  return o;
}

}  // namespace

TEST_CASE("time component of the force") {
  const Mat4 alpha = (Mat4() << 1, -0.3, 0.2, 0.1, -0.3, -1, 0, 0, 0.2, 0, -1, 0, 0.1, 0, 0, -1).finished();
  CHECK(force_zero_component(alpha, Vec3(0.1, 0.2, 0.0), 1.0, Mat4::Identity(), Vec3::Zero()) == 0.0);

  const Vec3 f(0.5, -1.0, 2.0);
  const double direct = -(alpha(0, 1) * f[0] + alpha(0, 2) * f[1] + alpha(0, 3) * f[2]) / alpha(0, 0);
  CHECK(std::abs(force_zero_component(alpha, Vec3::Zero(), 1.0, Mat4::Identity(), f) - direct) <= 1e-12);
}

TEST_CASE("reconstructed force is orthogonal to the worldline") {
  const auto fr = sr_frames();
  const Metric4 g = Metric4::minkowski();
  for (const Vec3& x : {Vec3(1, 2, 3), Vec3(-4, 0.5, 0.1)})
    for (const Vec3& v : {Vec3(0.1, -0.2, 0.3), Vec3(-0.5, 0.1, 0.0)}) {
      const Mat4 j = observer_map_jacobian(*fr, ObservedEvent(1.0, x));
      const Mat4 jinv = j.inverse();
      const Mat4 alpha = j.transpose() * g.g * j;
      const Vec3 fs(0.3, 1.0, -0.7);
      // F' in spacetime components, spatial part fixed
      Vec4 fp;
      fp[0] = force_zero_component(alpha, v, 1.0, jinv, fs);
      fp.tail<3>() = fs;
      const Vec4 tangent = j * Vec4(1.0, v[0], v[1], v[2]);
      CHECK(std::abs(g.dot(tangent, fp)) <= 1e-10 * fp.norm());
    }
}

TEST_CASE("ill-posed force") {
  Mat4 alpha = Mat4::Zero();
  alpha(0, 1) = alpha(1, 0) = 1.0;
  alpha(2, 2) = alpha(3, 3) = -1.0;
  try {
    force_zero_component(alpha, Vec3::Zero(), 1.0, Mat4::Identity(), Vec3(1, 0, 0));
    FAIL("expected IllPosedForce");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllPosedForce);
  }
}

TEST_CASE("observer-frame Christoffels, SR inertial") {
  const auto fr = sr_frames();
  const ObservedEvent p(0.5, Vec3(1.0, -2.0, 0.5));
  for (ChristoffelMethod m : {ChristoffelMethod::Jacobian, ChristoffelMethod::Pullback}) {
    const ObserverChristoffels u = transformed_christoffels(*fr, p, m);
    CHECK(max_abs(u, 1) <= 1e-6);
  }
}

TEST_CASE("both Christoffel routes agree for accelerated rotating frames") {
  const auto fr = acc_rot_frames();
  for (const ObservedEvent& p : {ObservedEvent(0.3, Vec3(0.2, 0.3, -0.1)), ObservedEvent(-0.8, Vec3(-0.3, 0.1, 0.4))}) {
    const ObserverChristoffels a = transformed_christoffels(*fr, p, ChristoffelMethod::Jacobian);
    const ObserverChristoffels b = transformed_christoffels(*fr, p, ChristoffelMethod::Pullback);
    double diff = 0.0, sym = 0.0;
    for (int k = 0; k < 4; ++k) {
      diff = std::max(diff, (a[k] - b[k]).cwiseAbs().maxCoeff());
      sym = std::max(sym, (a[k] - a[k].transpose()).cwiseAbs().maxCoeff());
      sym = std::max(sym, (b[k] - b[k].transpose()).cwiseAbs().maxCoeff());
    }
    CHECK(diff <= 1e-5);
    CHECK(sym <= 1e-8);
    CHECK(max_abs(a) > 0.1);
  }
}

TEST_CASE("breakdown parts add up") {
  ObserverChristoffels u = zero_christoffels();
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) u[k](i, j) = u[k](j, i) = 0.01 * (k + 1) * (i - j + 0.5 * i * j);
  const Mat4 jinv = Mat4::Identity() + 0.1 * Mat4::Ones();
  const ForceBreakdown fb =
      assemble_relative_force(2.0, 3.0, u, jinv, eta(), Vec3(0.3, -0.2, 0.1), 1.1, 0.05, Vec3(1, 2, 3));
  CHECK((fb.actual + fb.pseudo_sum() - fb.total).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(fb.pseudo[0][1] == doctest::Approx(-2.0 * 9.0 * u[2](0, 0)));
  CHECK(ForceBreakdown::kPseudoLabels[1] == "clock-rate");
  CHECK_THROWS_AS(assemble_relative_force(1, 1, u, jinv, eta(), Vec3::Zero(), 0.0, 0.0, Vec3::Zero()), Error);
}

TEST_CASE("SR inertial: only the clock-rate pseudo-force survives") {
  const auto fr = sr_frames();
  auto body = std::make_shared<const ObserverCurve>(
      make_inertial_observer(mink(), Event("minkowski", Vec4(0, 3, 1, 0.5)), Vec4(1, -0.2, 0.1, 0.05)));
  const ObserveReport rep = observe_curve(*fr, worldline_from_observer(body), {0.5, 1.5}, sr_opts());
  REQUIRE(rep.samples.size() == 2);
  for (const RelativeMotionSample& s : rep.samples) {
    const ForceBreakdown fb = relative_force(1.0, *fr, s, Vec3::Zero(), std::nan(""));
    CHECK(fb.actual.norm() == 0.0);
    const Vec3 expected = -(s.tau_ddot / (s.tau_dot * s.tau_dot)) * s.v;
    CHECK((fb.total - expected).norm() <= 1e-6 * expected.norm());
    CHECK((fb.total - s.dv_dtau).norm() <= 1e-6 * s.dv_dtau.norm());
  }
}

TEST_CASE("comoving curve at rest feels nothing") {
  const auto fr = sr_frames();
  const ObserveReport rep = observe_curve(*fr, worldline_comoving(fr, Vec3(2, -1, 0.5)), {0.0, 1.0}, sr_opts());
  for (const RelativeMotionSample& s : rep.samples) {
    const ForceBreakdown fb = relative_force(1.0, *fr, s, Vec3::Zero(), 0.0);
    CHECK(fb.total.norm() <= 1e-8);
    for (const Vec3& part : fb.pseudo) CHECK(part.norm() <= 1e-8);
  }
}

TEST_CASE("free body seen from accelerated rotating frames obeys the force law") {
  const auto fr = acc_rot_frames(0.2, 0.3);
  auto body = std::make_shared<const ObserverCurve>(
      make_inertial_observer(mink(), Event("minkowski", Vec4(0, 1.0, 0.5, -0.3)), Vec4(1, 0.1, -0.05, 0.02)));
  ObserveOptions o;
  o.search.tau_min = -3.5;
  o.search.tau_max = 3.5;
  o.search.box_min = Vec3::Constant(-2.5);
  o.search.box_max = Vec3::Constant(2.5);
  o.search.n_x = 3;
  o.search.n_tau = 3;
  const ObserveReport rep = observe_curve(*fr, worldline_from_observer(body), {0.0, 0.5}, o);
  REQUIRE(rep.samples.size() == 2);
  for (const RelativeMotionSample& s : rep.samples) {
    const ForceBreakdown fb = relative_force(1.0, *fr, s, Vec3::Zero(), std::nan(""));
    const double scale = std::max(s.dv_dtau.norm(), fb.pseudo[0].norm());
    CHECK((fb.total - s.dv_dtau).norm() <= 1e-5 * scale);
    CHECK(fb.pseudo[0].norm() > 1e-3);
  }
}
