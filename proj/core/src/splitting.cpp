#include "obsplit/splitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "obsplit/errors.hpp"

namespace obsplit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double max_abs(const Vec4& v) { return v.cwiseAbs().maxCoeff(); }

// tau at which the observer's time coordinate reaches `level`; the curve's
// kappa^0 is increasing in tau.
double solve_time_level(const FrameField& frames, double level, double lo, double hi) {
  const ObserverCurve& cv = frames.curve();
  auto f = [&](double t) { return cv.position(t)[0] - level; };
  double flo = f(lo);
  double fhi = f(hi);
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++i) {
    const double m = 0.5 * (lo + hi);
    const double fm = f(m);
    if (fm < 0.0) {
      lo = m;
      flo = fm;
    } else {
      hi = m;
      fhi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

double condition_number(const Mat4& j) {
  Eigen::JacobiSVD<Mat4> svd(j);
  const auto& s = svd.singularValues();
  if (!(s[3] > 0.0)) return std::numeric_limits<double>::infinity();
  return s[0] / s[3];
}

bool lex_less(const Preimage& a, const Preimage& b) {
  if (a.tau != b.tau) return a.tau < b.tau;
  for (int i = 0; i < 3; ++i)
    if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
  return a.residual < b.residual;
}

double stencil_derivative(const std::array<double, 5>& f, double h, int center) {
  // f holds samples at offsets (index - center) * h
  if (center == 2) return (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
  if (center == 0) return (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
  return (25.0 * f[4] - 48.0 * f[3] + 36.0 * f[2] - 16.0 * f[1] + 3.0 * f[0]) / (12.0 * h);
}

}  // namespace

ObservedEvent::ObservedEvent(double tau, const Vec3& x) : tau_(tau), x_(x) {
  if (!std::isfinite(tau) || !x.allFinite())
    throw Error(ErrorKind::InvalidInput, "ObservedEvent: non-finite coordinates");
  if (x.norm() == 0.0) throw Error(ErrorKind::Domain, "ObservedEvent: x = 0 is excluded");
}

Vec4 ObservedEvent::coords(double c) const { return Vec4(c * tau_, x_[0], x_[1], x_[2]); }

ObservedEvent ObservedEvent::from_coords(const Vec4& y, double c) {
  return ObservedEvent(y[0] / c, y.tail<3>());
}

Vec4 cone_vector(const Mat4& frame, const Vec3& x) {
  return -x.norm() * frame.col(0) + frame.block<4, 3>(0, 1) * x;
}

Event static_observer_map(const Chart& chart, const Frame4& frame, const Vec3& x,
                          const IntegratorTolerances& tol) {
  if (x.norm() == 0.0) throw Error(ErrorKind::Domain, "static_observer_map: x = 0 is excluded");
  const Vec4 k = cone_vector(frame.columns, x);
  try {
    return exp_map(chart, frame.base, k, tol);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NotInExpDomain)
      throw Error(ErrorKind::UnreachableDirection, std::string("static_observer_map: ") + e.what());
    throw;
  }
}

double static_distance(const Metric4& g, const Vec4& x0, const Vec4& k, const Vec4& k2) {
  const Projectors p = projectors(g, x0);
  const Vec4 d = p.perp * (k - k2);
  return std::sqrt(std::max(0.0, -g.norm2(d)));
}

Event kinematic_observer_map(const FrameField& frames, const ObservedEvent& p,
                             const IntegratorTolerances& tol) {
  if (!frames.contains(p.tau()))
    throw Error(ErrorKind::Domain, "kinematic_observer_map: tau outside the frame field interval");
  return static_observer_map(frames.curve().chart(), frames.frame(p.tau()), p.x(), tol);
}

MapWithJacobian kinematic_map_with_jacobian(const FrameField& frames, const ObservedEvent& p,
                                            const IntegratorTolerances& tol) {
  if (!frames.contains(p.tau()))
    throw Error(ErrorKind::Domain, "observer map: tau outside the frame field interval");
  const ObserverCurve& cv = frames.curve();
  const Chart& ch = cv.chart();
  const double c = ch.c();
  const CurvePoint pt = cv.at(p.tau());
  const Mat4 x = frames.at(p.tau());
  const Mat4 dx = frames.covariant_derivative(p.tau());
  const double r = p.radius();
  const Vec3 xh = p.x() / r;

  MapWithJacobian out;
  out.k = cone_vector(x, p.x());
  const Metric4 g = ch.metric_at(pt.position);
  out.k_norm2 = g.norm2(out.k);
  out.k_dot_velocity = g.dot(pt.velocity, out.k);

  std::array<JacobiInitial, 4> init;
  init[0].j = pt.velocity;
  init[0].dj = -r * dx.col(0) + dx.block<4, 3>(0, 1) * p.x();
  for (int a = 0; a < 3; ++a) {
    init[static_cast<std::size_t>(a + 1)].j.setZero();
    init[static_cast<std::size_t>(a + 1)].dj = -xh[a] * x.col(0) + x.col(a + 1);
  }
  JacobiBundle b;
  try {
    b = integrate_jacobi_fields(ch, GeodesicIVP{Event(ch.id(), pt.position), out.k}, 1.0, init, tol);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptySolution || e.kind() == ErrorKind::StepUnderflow)
      throw Error(ErrorKind::UnreachableDirection, std::string("observer map: ") + e.what());
    throw;
  }
  if (!b.geodesic().reached_end())
    throw Error(ErrorKind::UnreachableDirection, "observer map: lightlike geodesic leaves the chart");
  out.image = b.geodesic().end_position();
  out.jacobian.col(0) = b.end_field(0) / c;
  for (int a = 0; a < 3; ++a) out.jacobian.col(a + 1) = b.end_field(static_cast<std::size_t>(a + 1));
  return out;
}

Mat4 observer_map_jacobian(const FrameField& frames, const ObservedEvent& p,
                           const IntegratorTolerances& tol) {
  return kinematic_map_with_jacobian(frames, p, tol).jacobian;
}

Mat4 observer_map_jacobian_fd(const FrameField& frames, const ObservedEvent& p, double h,
                              const IntegratorTolerances& tol) {
  const double c = frames.curve().c();
  const Vec4 y = p.coords(c);
  Mat4 j;
  for (int i = 0; i < 4; ++i) {
    Vec4 yp = y;
    Vec4 ym = y;
    yp[i] += h;
    ym[i] -= h;
    const Vec4 fp = kinematic_observer_map(frames, ObservedEvent::from_coords(yp, c), tol).coords;
    const Vec4 fm = kinematic_observer_map(frames, ObservedEvent::from_coords(ym, c), tol).coords;
    j.col(i) = (fp - fm) / (2.0 * h);
  }
  return j;
}

std::optional<Preimage> refine_preimage(const FrameField& frames, const Vec4& target,
                                        const Vec4& start_coords, const SearchConfig& cfg,
                                        const IntegratorTolerances& tol) {
  const double c = frames.curve().c();
  const double abs_tol = cfg.inv_tol * (1.0 + max_abs(target));
  const double tau_lo = std::max(cfg.tau_min, frames.tau_min());
  const double tau_hi = std::min(cfg.tau_max, frames.tau_max());

  auto admissible = [&](const Vec4& y) {
    const double t = y[0] / c;
    return y.allFinite() && t >= tau_lo && t <= tau_hi && y.tail<3>().norm() > 1e-12 * (1.0 + max_abs(y));
  };
  auto evaluate = [&](const Vec4& y) -> std::optional<MapWithJacobian> {
    if (!admissible(y)) return std::nullopt;
    try {
      return kinematic_map_with_jacobian(frames, ObservedEvent::from_coords(y, c), tol);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  Vec4 y = start_coords;
  auto cur = evaluate(y);
  if (!cur) return std::nullopt;
  double res = max_abs(cur->image - target);
  for (int it = 0; it <= cfg.max_iter; ++it) {
    if (res <= abs_tol) {
      Preimage out;
      out.tau = y[0] / c;
      out.x = y.tail<3>();
      out.residual = res;
      out.condition = condition_number(cur->jacobian);
      out.regular = out.condition < cfg.cond_max;
      out.iterations = it;
      return out;
    }
    if (it == cfg.max_iter) break;
    const Eigen::FullPivLU<Mat4> lu(cur->jacobian);
    if (!lu.isInvertible()) return std::nullopt;
    const Vec4 step = lu.solve(target - cur->image);
    if (!step.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, lambda *= 0.5) {
      const Vec4 trial = y + lambda * step;
      auto next = evaluate(trial);
      if (!next) continue;
      const double r2 = max_abs(next->image - target);
      if (r2 < res) {
        y = trial;
        cur = std::move(next);
        res = r2;
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  return std::nullopt;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t nt = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += nt) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

InversionResult invert_observer_map(const FrameField& frames, const Event& target,
                                    const SearchConfig& cfg, const IntegratorTolerances& tol) {
  if (cfg.n_x < 1 || cfg.n_tau < 1 || cfg.max_iter < 1 || !(cfg.inv_tol > 0.0) ||
      !(cfg.merge_tol > 0.0) || !(cfg.cond_max > 0.0) || !(cfg.tau_min <= cfg.tau_max))
    throw Error(ErrorKind::InvalidInput, "invert_observer_map: invalid search configuration");
  const ObserverCurve& cv = frames.curve();
  const Chart& ch = cv.chart();
  if (!ch.contains(target.coords))
    throw Error(ErrorKind::OutOfChart, "invert_observer_map: target outside chart");
  const double c = ch.c();
  const double tau_lo = std::max(cfg.tau_min, frames.tau_min());
  const double tau_hi = std::min(cfg.tau_max, frames.tau_max());

  InversionResult res;
  if (!(tau_lo <= tau_hi)) {
    res.diagnostics = "search interval does not meet the frame field interval";
    return res;
  }

  {
    const double t_on = solve_time_level(frames, target.coords[0], tau_lo, tau_hi);
    if (max_abs(cv.position(t_on) - target.coords) <= cfg.inv_tol * (1.0 + max_abs(target.coords))) {
      res.origin_excluded = true;
      res.diagnostics = "target lies on the observer worldline (x = 0 is excluded)";
      return res;
    }
  }

  std::vector<Vec4> starts;
  auto axis_value = [&](int axis, int i) {
    if (cfg.n_x == 1) return 0.5 * (cfg.box_min[axis] + cfg.box_max[axis]);
    return cfg.box_min[axis] + (cfg.box_max[axis] - cfg.box_min[axis]) * i / (cfg.n_x - 1);
  };
  for (int i = 0; i < cfg.n_x; ++i)
    for (int j = 0; j < cfg.n_x; ++j)
      for (int k = 0; k < cfg.n_x; ++k) {
        const Vec3 x(axis_value(0, i), axis_value(1, j), axis_value(2, k));
        if (x.norm() <= 1e-12) continue;
        const double seed = solve_time_level(frames, target.coords[0] + x.norm(), tau_lo, tau_hi);
        starts.emplace_back(c * seed, x[0], x[1], x[2]);
        for (int m = 1; m < cfg.n_tau; ++m) {
          const double t = tau_lo + (tau_hi - tau_lo) * m / cfg.n_tau;
          starts.emplace_back(c * t, x[0], x[1], x[2]);
        }
      }
  res.starts = static_cast<int>(starts.size());

  std::vector<std::optional<Preimage>> found(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t i) {
    found[i] = refine_preimage(frames, target.coords, starts[i], cfg, tol);
  });

  std::vector<Preimage> roots;
  for (auto& f : found)
    if (f) roots.push_back(*f);
  res.converged = static_cast<int>(roots.size());
  std::sort(roots.begin(), roots.end(), lex_less);
  for (const auto& r : roots) {
    const Vec4 yr(c * r.tau, r.x[0], r.x[1], r.x[2]);
    bool dup = false;
    for (const auto& kept : res.preimages) {
      const Vec4 yk(c * kept.tau, kept.x[0], kept.x[1], kept.x[2]);
      if (max_abs(yr - yk) <= cfg.merge_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) res.preimages.push_back(r);
  }
  if (res.preimages.empty()) res.diagnostics = "no start converged";
  return res;
}

Worldline worldline_from_observer(std::shared_ptr<const ObserverCurve> curve) {
  if (!curve) throw Error(ErrorKind::InvalidInput, "worldline_from_observer: null curve");
  Worldline w;
  w.kind = WorldlineKind::Observer;
  w.position = [curve](double s) { return curve->position(s); };
  w.velocity = [curve](double s) { return curve->velocity(s); };
  w.s_min = curve->tau_min();
  w.s_max = curve->tau_max();
  return w;
}

Worldline worldline_from_geodesic(std::shared_ptr<const DenseSolution> geodesic) {
  if (!geodesic) throw Error(ErrorKind::InvalidInput, "worldline_from_geodesic: null solution");
  Worldline w;
  w.kind = WorldlineKind::Lightlike;
  w.position = [geodesic](double s) { return geodesic->position(s); };
  w.velocity = [geodesic](double s) { return geodesic->velocity(s); };
  w.s_min = std::min(geodesic->s_begin(), geodesic->s_end());
  w.s_max = std::max(geodesic->s_begin(), geodesic->s_end());
  return w;
}

Worldline worldline_comoving(std::shared_ptr<const FrameField> frames, const Vec3& x,
                             const IntegratorTolerances& tol) {
  if (!frames) throw Error(ErrorKind::InvalidInput, "worldline_comoving: null frame field");
  if (x.norm() == 0.0) throw Error(ErrorKind::Domain, "worldline_comoving: x = 0 is excluded");
  Worldline w;
  w.kind = WorldlineKind::Timelike;
  w.position = [frames, x, tol](double s) {
    return kinematic_observer_map(*frames, ObservedEvent(s, x), tol).coords;
  };
  w.velocity = [frames, x, tol](double s) {
    const MapWithJacobian m = kinematic_map_with_jacobian(*frames, ObservedEvent(s, x), tol);
    return Vec4(frames->curve().c() * m.jacobian.col(0));
  };
  w.s_min = frames->tau_min();
  w.s_max = frames->tau_max();
  return w;
}

namespace {

struct LocalState {
  Vec4 y;      // (c tau, x)
  Vec4 ydot;   // dy/ds
  double rho;  // d sigma / d s
  bool spacelike;
};

std::optional<LocalState> local_state(const FrameField& frames, const Worldline& w, double s,
                                      const Vec4& guess, const SearchConfig& cfg,
                                      const IntegratorTolerances& tol) {
  const Vec4 target = w.position(s);
  auto pre = refine_preimage(frames, target, guess, cfg, tol);
  if (!pre) return std::nullopt;
  const double c = frames.curve().c();
  const ObservedEvent p = pre->event();
  const MapWithJacobian m = kinematic_map_with_jacobian(frames, p, tol);
  const Vec4 wv = w.velocity(s);
  LocalState ls;
  ls.y = p.coords(c);
  ls.ydot = Eigen::FullPivLU<Mat4>(m.jacobian).solve(wv);
  ls.rho = 1.0;
  ls.spacelike = false;
  if (w.kind == WorldlineKind::Timelike) {
    const double n2 = frames.curve().chart().metric_at(m.image).norm2(wv);
    if (n2 > kDefaultCausalTol * c * c) {
      ls.rho = std::sqrt(n2) / c;
    } else {
      ls.spacelike = true;
    }
  }
  return ls;
}

}  // namespace

ObserveReport observe_curve(const FrameField& frames, const Worldline& worldline,
                            const std::vector<double>& s_samples, const ObserveOptions& opts,
                            const IntegratorTolerances& tol) {
  if (!worldline.position || !worldline.velocity)
    throw Error(ErrorKind::InvalidInput, "observe_curve: incomplete worldline");
  if (!(opts.h > 0.0)) throw Error(ErrorKind::InvalidInput, "observe_curve: stencil step must be > 0");
  const double c = frames.curve().c();
  const double h = opts.h;
  ObserveReport rep;

  std::optional<Vec4> prev_y;
  std::optional<Vec4> prev_ydot;
  double prev_s = 0.0;

  for (double s : s_samples) {
    if (!(s >= worldline.s_min && s <= worldline.s_max)) {
      rep.branch_lost = true;
      rep.diagnostics = "sample parameter outside the worldline interval";
      break;
    }
    RelativeMotionSample smp;
    smp.s = s;
    std::optional<Vec4> guess;
    if (prev_y) {
      guess = *prev_y + (*prev_ydot) * (s - prev_s);
      if (!refine_preimage(frames, worldline.position(s), *guess, opts.search, tol)) guess = *prev_y;
    }

    std::optional<LocalState> st;
    if (guess) st = local_state(frames, worldline, s, *guess, opts.search, tol);
    if (!st) {
      const InversionResult inv =
          invert_observer_map(frames, Event(frames.curve().chart().id(), worldline.position(s)),
                              opts.search, tol);
      if (inv.preimages.empty()) {
        rep.branch_lost = true;
        rep.diagnostics = inv.origin_excluded ? "worldline meets the observer" : "no preimage continues the branch";
        break;
      }
      // closest to the previous sample, or the nearest image for the first one
      const Vec4 ref = prev_y ? *prev_y : Vec4::Zero();
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t i = 0; i < inv.preimages.size(); ++i) {
        const Preimage& p = inv.preimages[i];
        const double dist = prev_y ? max_abs(Vec4(c * p.tau, p.x[0], p.x[1], p.x[2]) - ref) : p.x.norm();
        d.emplace_back(dist, i);
      }
      std::sort(d.begin(), d.end());
      if (d.size() > 1 && (prev_y ? d[1].first - d[0].first <= opts.search.merge_tol : true))
        smp.ambiguous = true;
      const Preimage& best = inv.preimages[d[0].second];
      st = local_state(frames, worldline, s, Vec4(c * best.tau, best.x[0], best.x[1], best.x[2]),
                       opts.search, tol);
      if (!st) {
        rep.branch_lost = true;
        rep.diagnostics = "preimage could not be refined";
        break;
      }
    }

    smp.tau = st->y[0] / c;
    smp.x = st->y.tail<3>();
    smp.not_an_observer = st->spacelike;
    smp.proper_rate = st->rho;
    const double dtau_ds = st->ydot[0] / c;
    smp.tau_dot = dtau_ds / st->rho;

    // five-point stencil in s for dv/ds and d tau_dot / ds
    int center = 2;
    if (s - 2 * h < worldline.s_min) center = 0;
    else if (s + 2 * h > worldline.s_max) center = 4;
    std::array<double, 5> tdot{};
    std::array<Vec3, 5> vel{};
    bool stencil_ok = true;
    for (int k = 0; k < 5 && stencil_ok; ++k) {
      const double off = (k - center) * h;
      LocalState sk;
      if (k == center) {
        sk = *st;
      } else {
        auto o = local_state(frames, worldline, s + off, st->y + st->ydot * off, opts.search, tol);
        if (!o) {
          stencil_ok = false;
          break;
        }
        sk = *o;
      }
      const double dt = sk.ydot[0] / c;
      tdot[static_cast<std::size_t>(k)] = dt / sk.rho;
      vel[static_cast<std::size_t>(k)] = sk.ydot.tail<3>() / dt;
    }
    if (std::abs(dtau_ds) > 1e-300) smp.v = st->ydot.tail<3>() / dtau_ds;
    else smp.v = Vec3::Constant(kNaN);
    if (stencil_ok) {
      Vec3 dv_ds;
      for (int i = 0; i < 3; ++i) {
        std::array<double, 5> f{};
        for (int k = 0; k < 5; ++k) f[static_cast<std::size_t>(k)] = vel[static_cast<std::size_t>(k)][i];
        dv_ds[i] = stencil_derivative(f, h, center);
      }
      smp.dv_dtau = dv_ds / dtau_ds;
      smp.tau_ddot = stencil_derivative(tdot, h, center) / st->rho;
    } else {
      smp.dv_dtau = Vec3::Constant(kNaN);
      smp.tau_ddot = kNaN;
    }
    smp.time_inconsistent = worldline.kind != WorldlineKind::Lightlike && !smp.not_an_observer &&
                            !(smp.tau_dot > 0.0);
    rep.samples.push_back(smp);
    prev_y = st->y;
    prev_ydot = st->ydot;
    prev_s = s;
  }
  return rep;
}

Mat4 pullback_metric_alpha(const FrameField& frames, const ObservedEvent& p,
                           const IntegratorTolerances& tol) {
  const MapWithJacobian m = kinematic_map_with_jacobian(frames, p, tol);
  const Metric4 g = frames.curve().chart().metric_at(m.image);
  return m.jacobian.transpose() * g.g * m.jacobian;
}

double tau_dot(const Mat4& alpha, const Vec3& v, double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidInput, "tau_dot: c must be > 0");
  if (!alpha.allFinite() || !v.allFinite()) throw Error(ErrorKind::InvalidInput, "tau_dot: non-finite input");
  const Vec3 a0 = alpha.block<1, 3>(0, 1).transpose();
  const double rad = alpha(0, 0) + 2.0 * a0.dot(v) / c + v.dot(alpha.block<3, 3>(1, 1) * v) / (c * c);
  if (!(rad > 0.0)) throw Error(ErrorKind::Superluminal, "tau_dot: radicand is not positive");
  return 1.0 / std::sqrt(rad);
}

}  // namespace obsplit
