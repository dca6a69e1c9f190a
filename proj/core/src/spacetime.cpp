#include "obsplit/spacetime.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "obsplit/errors.hpp"

namespace obsplit {

namespace {

std::string format_coords(const Vec4& k) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << k[0] << ", " << k[1] << ", " << k[2] << ", " << k[3] << ')';
  return os.str();
}

}  // namespace

Chart Chart::minkowski(double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidInput, "minkowski: c must be > 0");
  Chart ch;
  ch.kind_ = ChartKind::Minkowski;
  ch.id_ = "minkowski";
  ch.c_ = c;
  ch.domain_ = [](const Vec4& k) { return k.allFinite(); };
  ch.metric_ = [](const Vec4&) { return eta(); };
  ch.christoffels_ = [](const Vec4&) { return zero_christoffels(); };
  return ch;
}

Chart Chart::schwarzschild(double radius, double c) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidInput, "schwarzschild: radius must be > 0");
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidInput, "schwarzschild: c must be > 0");
  Chart ch;
  ch.kind_ = ChartKind::Schwarzschild;
  ch.id_ = "schwarzschild";
  ch.c_ = c;
  ch.radius_ = radius;
  ch.domain_ = [radius](const Vec4& k) {
    return k.allFinite() && k[1] > radius && k[2] > 0.0 && k[2] < std::numbers::pi &&
           k[3] > -std::numbers::pi && k[3] < std::numbers::pi;
  };
  ch.metric_ = [radius](const Vec4& k) {
    const double r = k[1];
    const double f = 1.0 - radius / r;
    const double s = std::sin(k[2]);
    Mat4 g = Mat4::Zero();
    g(0, 0) = f;
    g(1, 1) = -1.0 / f;
    g(2, 2) = -r * r;
    g(3, 3) = -r * r * s * s;
    return g;
  };
  ch.christoffels_ = [radius](const Vec4& k) { return schwarzschild_christoffels(radius, k); };
  return ch;
}

Chart Chart::custom(std::string id, DomainFn domain, MetricFn metric, double c,
                    std::optional<ChristoffelFn> christoffels) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidInput, "custom chart: c must be > 0");
  if (!domain || !metric) throw Error(ErrorKind::InvalidInput, "custom chart: missing evaluator");
  Chart ch;
  ch.kind_ = ChartKind::Custom;
  ch.id_ = std::move(id);
  ch.c_ = c;
  ch.domain_ = std::move(domain);
  ch.metric_ = std::move(metric);
  ch.christoffels_ = std::move(christoffels);
  return ch;
}

Christoffels schwarzschild_christoffels(double radius, const Vec4& k) {
  const double r = k[1];
  const double th = k[2];
  const double f = 1.0 - radius / r;
  const double s = std::sin(th);
  const double co = std::cos(th);
  Christoffels g = zero_christoffels();
  const double a = radius / (2.0 * r * r);
  g[0](0, 1) = g[0](1, 0) = a / f;
  g[1](0, 0) = f * a;
  g[1](1, 1) = -a / f;
  g[1](2, 2) = -r * f;
  g[1](3, 3) = -r * f * s * s;
  g[2](1, 2) = g[2](2, 1) = 1.0 / r;
  g[2](3, 3) = -s * co;
  g[3](1, 3) = g[3](3, 1) = 1.0 / r;
  g[3](2, 3) = g[3](3, 2) = co / s;
  return g;
}

bool Chart::contains(const Vec4& k) const { return domain_(k); }

void Chart::require_inside(const Vec4& k, const char* who) const {
  if (!contains(k))
    throw Error(ErrorKind::OutOfChart,
                std::string(who) + ": " + format_coords(k) + " outside chart " + id_);
}

Metric4 Chart::metric_at(const Vec4& k) const {
  require_inside(k, "metric_at");
  return Metric4(metric_(k));
}

std::array<Mat4, 4> Chart::metric_derivatives(const Vec4& k, double h) const {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "metric_derivatives: fd_step must be > 0");
  std::array<Mat4, 4> dg;
  for (int m = 0; m < 4; ++m) {
    Vec4 kp = k;
    Vec4 km = k;
    kp[m] += h;
    km[m] -= h;
    require_inside(kp, "metric_derivatives");
    require_inside(km, "metric_derivatives");
    dg[m] = (metric_(kp) - metric_(km)) / (2.0 * h);
  }
  return dg;
}

Christoffels Chart::christoffels_fd(const Vec4& k, double h) const {
  require_inside(k, "christoffels_at");
  const Mat4 g = metric_(k);
  Eigen::FullPivLU<Mat4> lu(g);
  if (!lu.isInvertible() || std::abs(g.determinant()) < 1e-300)
    throw Error(ErrorKind::DegenerateMetric, "christoffels_at: metric is singular at " + format_coords(k));
  const Mat4 ginv = lu.inverse();
  const auto dg = metric_derivatives(k, h);

  Christoffels gamma = zero_christoffels();
  for (int kk = 0; kk < 4; ++kk) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) {
        double sum = 0.0;
        for (int l = 0; l < 4; ++l) {
          sum += ginv(kk, l) * (dg[j](l, i) + dg[i](l, j) - dg[l](i, j));
        }
        gamma[kk](i, j) = gamma[kk](j, i) = 0.5 * sum;
      }
    }
  }
  return gamma;
}

Christoffels Chart::christoffels_at(const Vec4& k, double h) const {
  if (christoffels_) {
    require_inside(k, "christoffels_at");
    return (*christoffels_)(k);
  }
  return christoffels_fd(k, h);
}

CurvatureSample Chart::riemann_ricci_at(const Vec4& k, double h) const {
  CurvatureSample out;
  out.gamma = christoffels_at(k, h);
  for (auto& row : out.riemann)
    for (auto& m : row) m.setZero();
  out.ricci.setZero();
  if (is_flat()) return out;

  // dgamma[m][k](i, j) = d_m Gamma^k_ij
  std::array<Christoffels, 4> dgamma;
  for (int m = 0; m < 4; ++m) {
    Vec4 kp = k;
    Vec4 km = k;
    kp[m] += h;
    km[m] -= h;
    const Christoffels gp = christoffels_at(kp, h);
    const Christoffels gm = christoffels_at(km, h);
    for (int a = 0; a < 4; ++a) dgamma[m][a] = (gp[a] - gm[a]) / (2.0 * h);
  }

  const Christoffels& G = out.gamma;
  for (int a = 0; a < 4; ++a) {
    for (int l = 0; l < 4; ++l) {
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          double r = dgamma[i][a](j, l) - dgamma[j][a](i, l);
          for (int m = 0; m < 4; ++m) r += G[a](i, m) * G[m](j, l) - G[a](j, m) * G[m](i, l);
          out.riemann[a][l](i, j) = r;
        }
      }
    }
  }
  for (int l = 0; l < 4; ++l)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int a = 0; a < 4; ++a) s += out.riemann[a][l](a, j);
      out.ricci(l, j) = s;
    }
  return out;
}

Vec4 Chart::riemann_action(const Vec4& k, const Vec4& b, const Vec4& a, double h) const {
  if (is_flat()) return Vec4::Zero();
  const CurvatureSample cs = riemann_ricci_at(k, h);
  Vec4 out = Vec4::Zero();
  for (int kk = 0; kk < 4; ++kk)
    for (int l = 0; l < 4; ++l) out[kk] += a[l] * b.dot(cs.riemann[kk][l] * a);
  return out;
}

Vec4 Chart::future_reference(const Vec4&) const { return Vec4(1.0, 0.0, 0.0, 0.0); }

Frame4 Chart::orientation_reference(const Vec4& k) const {
  return Frame4(Event(id_, k), Mat4::Identity());
}

}  // namespace obsplit
