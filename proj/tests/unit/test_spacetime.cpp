#include <doctest.h>

#include <cmath>
#include <numbers>

#include <obsplit/errors.hpp>
#include <obsplit/spacetime.hpp>

#include "oracles/frozen.hpp"

using namespace obsplit;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const Christoffels& g) {
  double m = 0.0;
  for (const auto& x : g) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

double max_diff(const Christoffels& a, const Christoffels& b) {
  double m = 0.0;
  for (int k = 0; k < 4; ++k) m = std::max(m, (a[k] - b[k]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("Minkowski metric and connection") {
  const Chart m = Chart::minkowski(2.0);
  const Vec4 k(0.3, -4.0, 1.0, 7.0);
  CHECK(m.metric_at(k).g == eta());
  CHECK(max_abs(m.christoffels_at(k)) == 0.0);
  CHECK(max_abs(m.christoffels_fd(k)) == 0.0);
  const CurvatureSample cs = m.riemann_ricci_at(k);
  CHECK(cs.ricci.cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.c() == 2.0);
}

TEST_CASE("Schwarzschild metric components") {
  const Chart s = Chart::schwarzschild(1.0);
  const Mat4 g = s.metric_at(Vec4(0, 2, kPi / 2, 0)).g;
  CHECK(g(0, 0) == doctest::Approx(0.5));
  CHECK(g(1, 1) == doctest::Approx(-2.0));
  CHECK(g(2, 2) == doctest::Approx(-4.0));
  CHECK(g(3, 3) == doctest::Approx(-4.0));
  CHECK(std::abs(g(0, 1)) == 0.0);
  CHECK(s.metric_at(Vec4(0, 1e9, kPi / 2, 0)).g(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.metric_at(Vec4(0, 3, 1, 0)).has_lorentz_signature());
}

TEST_CASE("Schwarzschild domain") {
  const Chart s = Chart::schwarzschild(1.0);
  CHECK_FALSE(s.contains(Vec4(0, 0.5, 1, 0)));
  CHECK_FALSE(s.contains(Vec4(0, 5, 0, 0)));
  CHECK_FALSE(s.contains(Vec4(0, 5, 1, 4)));
  try {
    s.metric_at(Vec4(0, 1, 1, 0));
    FAIL("horizon accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfChart);
  }
  CHECK_THROWS_AS(Chart::schwarzschild(-1.0), Error);
}

TEST_CASE("Schwarzschild Christoffels against symbolic values") {
  const Chart s = Chart::schwarzschild(1.0);
  const Christoffels a = s.christoffels_at(Vec4(0, 2, kPi / 2, 0));
  CHECK(a[1](0, 0) == doctest::Approx(oracle::kSchwGammaR_tt_r2).epsilon(1e-14));

  const Christoffels b = s.christoffels_at(Vec4(0.3, 7.5, 1.1, 0.3));
  double worst = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(b[k](i, j) - oracle::kSchwGammaB[16 * k + 4 * i + j]));
  CHECK(worst < 1e-14);
}

TEST_CASE("finite-difference Christoffels agree with analytic ones") {
  const Chart s = Chart::schwarzschild(1.0);
  for (double r : {2.0, 3.5, 10.0, 40.0}) {
    const Vec4 k(0.0, r, 1.2, -0.4);
    CHECK(max_diff(s.christoffels_at(k), s.christoffels_fd(k, 1e-5)) <= 1e-6);
  }
}

TEST_CASE("custom chart falls back to finite differences") {
  const Chart s = Chart::schwarzschild(1.0);
  const Chart c = Chart::custom(
      "schw-copy", [](const Vec4& k) { return k[1] > 1.0 && k[2] > 0 && k[2] < kPi; },
      [&](const Vec4& k) { return s.metric_at(k).g; });
  const Vec4 k(0, 4, 1.0, 0.2);
  CHECK(max_diff(c.christoffels_at(k), schwarzschild_christoffels(1.0, k)) < 1e-6);
}

TEST_CASE("Schwarzschild curvature") {
  const Chart s = Chart::schwarzschild(1.0);
  const CurvatureSample cs = s.riemann_ricci_at(Vec4(0, 2, kPi / 2, 0));
  CHECK(cs.ricci.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(std::abs(cs.riemann[0][1](0, 1)) > 1e-3);
  CHECK(cs.riemann[0][1](0, 1) == doctest::Approx(oracle::kSchwRiemann_t_rtr_r2).epsilon(1e-6));
  CHECK(cs.riemann[0][1](1, 0) == doctest::Approx(-oracle::kSchwRiemann_t_rtr_r2).epsilon(1e-6));
}

TEST_CASE("Ricci flatness on an interior grid") {
  const Chart s = Chart::schwarzschild(1.0);
  double worst = 0.0;
  int n = 0;
  for (double r : {2.5, 4.0, 7.0, 12.0, 20.0})
    for (double th : {0.6, 1.2, 1.8, 2.4}) {
      worst = std::max(worst, s.riemann_ricci_at(Vec4(0, r, th, 0.5)).ricci.cwiseAbs().maxCoeff());
      ++n;
    }
  CHECK(n == 20);
  CHECK(worst <= 1e-5);
}

TEST_CASE("connection is symmetric and metric compatible") {
  const Chart s = Chart::schwarzschild(1.0);
  for (double r : {2.2, 5.0, 15.0}) {
    const Vec4 k(1.0, r, 0.9, 1.3);
    const Christoffels gam = s.christoffels_at(k);
    for (int c = 0; c < 4; ++c) CHECK((gam[c] - gam[c].transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Mat4 g = s.metric_at(k).g;
    const auto dg = s.metric_derivatives(k);
    double worst = 0.0;
    for (int m = 0; m < 4; ++m)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          double v = dg[m](i, j);
          for (int l = 0; l < 4; ++l) v -= gam[l](m, i) * g(l, j) + gam[l](m, j) * g(i, l);
          worst = std::max(worst, std::abs(v));
        }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("reference vectors") {
  const Chart s = Chart::schwarzschild(1.0);
  const Vec4 k(0, 3, 1, 0);
  CHECK(s.future_reference(k) == Vec4(1, 0, 0, 0));
  CHECK(s.orientation_reference(k).columns == Mat4::Identity());
}
