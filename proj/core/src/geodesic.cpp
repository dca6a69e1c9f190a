#include "obsplit/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "obsplit/errors.hpp"

namespace obsplit {

namespace {

enum class SlotKind { Transport, JacobiField, JacobiDerivative };

State pack_initial(const GeodesicIVP& ivp, const std::vector<Vec4>& carried) {
  State y(8 + 4 * static_cast<Eigen::Index>(carried.size()));
  y.segment<4>(0) = ivp.start.coords;
  y.segment<4>(4) = ivp.velocity;
  for (std::size_t i = 0; i < carried.size(); ++i) y.segment<4>(8 + 4 * static_cast<Eigen::Index>(i)) = carried[i];
  return y;
}

// Geodesic plus carried fields. Jacobi slots come in (J, nabla J) pairs.
DenseSolution integrate_augmented(const Chart& chart, const GeodesicIVP& ivp, double s_end,
                                  const std::vector<SlotKind>& kinds,
                                  const std::vector<Vec4>& carried,
                                  const IntegratorTolerances& tol) {
  if (!ivp.velocity.allFinite() || !ivp.start.coords.allFinite())
    throw Error(ErrorKind::InvalidInput, "geodesic: non-finite initial data");
  if (!std::isfinite(s_end)) throw Error(ErrorKind::InvalidInput, "geodesic: non-finite end parameter");
  if (!chart.contains(ivp.start.coords))
    throw Error(ErrorKind::OutOfChart, "geodesic: start event outside chart " + chart.id());

  const bool needs_curvature =
      !chart.is_flat() && std::any_of(kinds.begin(), kinds.end(),
                                      [](SlotKind k) { return k == SlotKind::JacobiField; });
  const double h = tol.fd_step;

  OdeRhs rhs = [&chart, &kinds, needs_curvature, h](double, const State& y, State& dy) {
    const Vec4 k = y.segment<4>(0);
    const Vec4 u = y.segment<4>(4);
    const Christoffels G = chart.christoffels_at(k, h);
    dy.segment<4>(0) = u;
    dy.segment<4>(4) = -contract(G, u, u);
    CurvatureSample cs;
    if (needs_curvature) cs = chart.riemann_ricci_at(k, h);
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const Eigen::Index off = 8 + 4 * static_cast<Eigen::Index>(i);
      const Vec4 v = y.segment<4>(off);
      switch (kinds[i]) {
        case SlotKind::Transport:
          dy.segment<4>(off) = -contract(G, u, v);
          break;
        case SlotKind::JacobiField: {
          const Vec4 p = y.segment<4>(off + 4);
          dy.segment<4>(off) = p - contract(G, u, v);
          Vec4 curv = Vec4::Zero();
          if (needs_curvature) {
            for (int a = 0; a < 4; ++a)
              for (int l = 0; l < 4; ++l) curv[a] += u[l] * v.dot(cs.riemann[a][l] * u);
          }
          dy.segment<4>(off + 4) = -contract(G, u, p) - curv;
          ++i;  // derivative slot handled here
          break;
        }
        case SlotKind::JacobiDerivative:
          break;
      }
    }
  };
  OdeAdmissible admissible = [&chart](const State& y) {
    return chart.contains(y.segment<4>(0));
  };

  const double s0 = 0.0;
  DenseTrajectory traj = integrate_dopri5(rhs, pack_initial(ivp, carried), s0, s_end, tol.ode(), admissible);
  if (s_end != s0 && traj.empty()) {
    if (traj.status() == OdeStatus::LeftDomain)
      throw Error(ErrorKind::EmptySolution, "geodesic: leaves chart " + chart.id() + " immediately");
    throw Error(ErrorKind::StepUnderflow, "geodesic: no step could be taken");
  }
  if (traj.status() == OdeStatus::StepUnderflow || traj.status() == OdeStatus::MaxSteps)
    throw Error(ErrorKind::StepUnderflow,
                std::string("geodesic: integration stalled (") + to_string(traj.status()) + ")");
  return DenseSolution(chart.id(), ivp, s_end, std::move(traj), carried.size());
}

}  // namespace

DenseSolution::DenseSolution(std::string chart_id, GeodesicIVP ivp, double s_requested,
                             DenseTrajectory trajectory, std::size_t carried_slots)
    : chart_id_(std::move(chart_id)),
      ivp_(std::move(ivp)),
      s_requested_(s_requested),
      traj_(std::move(trajectory)),
      slots_(carried_slots) {}

Vec4 DenseSolution::position(double s) const { return traj_.evaluate(s).segment<4>(0); }
Vec4 DenseSolution::velocity(double s) const { return traj_.evaluate(s).segment<4>(4); }

Vec4 DenseSolution::carried(double s, std::size_t slot) const {
  if (slot >= slots_) throw Error(ErrorKind::InvalidInput, "DenseSolution: no such carried slot");
  return traj_.evaluate(s).segment<4>(8 + 4 * static_cast<Eigen::Index>(slot));
}

Vec4 DenseSolution::end_position() const { return traj_.final_state().segment<4>(0); }
Vec4 DenseSolution::end_velocity() const { return traj_.final_state().segment<4>(4); }
Vec4 DenseSolution::end_carried(std::size_t slot) const {
  if (slot >= slots_) throw Error(ErrorKind::InvalidInput, "DenseSolution: no such carried slot");
  return traj_.final_state().segment<4>(8 + 4 * static_cast<Eigen::Index>(slot));
}

DenseSolution integrate_geodesic(const Chart& chart, const GeodesicIVP& ivp, double s_end,
                                 const IntegratorTolerances& tol) {
  if (ivp.velocity.cwiseAbs().maxCoeff() == 0.0)
    throw Error(ErrorKind::InvalidInput, "integrate_geodesic: zero initial velocity");
  return integrate_augmented(chart, ivp, s_end, {}, {}, tol);
}

Event exp_map(const Chart& chart, const Event& q, const Vec4& k, const IntegratorTolerances& tol) {
  if (!k.allFinite()) throw Error(ErrorKind::InvalidInput, "exp_map: non-finite vector");
  if (!chart.contains(q.coords)) throw Error(ErrorKind::OutOfChart, "exp_map: base point outside chart");
  if (k.cwiseAbs().maxCoeff() == 0.0) return Event(chart.id(), q.coords);
  DenseSolution sol;
  try {
    sol = integrate_augmented(chart, GeodesicIVP{q, k}, 1.0, {}, {}, tol);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptySolution || e.kind() == ErrorKind::StepUnderflow)
      throw Error(ErrorKind::NotInExpDomain, std::string("exp_map: ") + e.what());
    throw;
  }
  if (!sol.reached_end())
    throw Error(ErrorKind::NotInExpDomain, "exp_map: geodesic leaves the chart before s = 1");
  return Event(chart.id(), sol.end_position());
}

DenseSolution parallel_transport(const Chart& chart, const DenseSolution& along, const Vec4& v0,
                                 const IntegratorTolerances& tol) {
  return integrate_augmented(chart, along.ivp(), along.s_end(), {SlotKind::Transport}, {v0}, tol);
}

DenseSolution parallel_transport_frame(const Chart& chart, const DenseSolution& along,
                                       const Mat4& frame, const IntegratorTolerances& tol) {
  std::vector<SlotKind> kinds(4, SlotKind::Transport);
  std::vector<Vec4> init;
  for (int i = 0; i < 4; ++i) init.emplace_back(frame.col(i));
  return integrate_augmented(chart, along.ivp(), along.s_end(), kinds, init, tol);
}

JacobiBundle integrate_jacobi_fields(const Chart& chart, const GeodesicIVP& ivp, double s_end,
                                     std::span<const JacobiInitial> init,
                                     const IntegratorTolerances& tol) {
  std::vector<SlotKind> kinds;
  std::vector<Vec4> carried;
  for (const auto& f : init) {
    kinds.push_back(SlotKind::JacobiField);
    kinds.push_back(SlotKind::JacobiDerivative);
    carried.push_back(f.j);
    carried.push_back(f.dj);
  }
  return JacobiBundle(integrate_augmented(chart, ivp, s_end, kinds, carried, tol), init.size());
}

JacobiSolution integrate_jacobi(const Chart& chart, const DenseSolution& geodesic, const Vec4& j0,
                                const Vec4& dj0, const IntegratorTolerances& tol) {
  const JacobiInitial f{j0, dj0};
  return JacobiSolution(integrate_jacobi_fields(chart, geodesic.ivp(), geodesic.s_end(),
                                                std::span<const JacobiInitial>(&f, 1), tol));
}

Vec4 exp_differential(const Chart& chart, const Event& q, const Vec4& k, const Vec4& base_dir,
                      const Vec4& fiber_dir, const IntegratorTolerances& tol) {
  const JacobiInitial f{base_dir, fiber_dir};
  JacobiBundle b;
  try {
    b = integrate_jacobi_fields(chart, GeodesicIVP{q, k}, 1.0, std::span<const JacobiInitial>(&f, 1), tol);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptySolution || e.kind() == ErrorKind::StepUnderflow)
      throw Error(ErrorKind::NotInExpDomain, std::string("exp_differential: ") + e.what());
    throw;
  }
  if (!b.geodesic().reached_end())
    throw Error(ErrorKind::NotInExpDomain, "exp_differential: geodesic leaves the chart before s = 1");
  return b.end_field(0);
}

double conjugate_determinant(const JacobiBundle& bundle, double s) {
  const State y = bundle.geodesic().trajectory().evaluate(s);
  Mat4 m;
  for (int i = 0; i < 3; ++i) m.col(i) = y.segment<4>(8 + 8 * i);
  m.col(3) = y.segment<4>(4);
  return m.determinant() / (s * s * s);
}

ConjugateScan detect_conjugate(const Chart& chart, const Event& q, const Vec4& k, double s_max,
                               int grid_n, const IntegratorTolerances& tol) {
  ConjugateScan scan;
  if (grid_n < 2 || !(s_max > 0.0)) {
    scan.resolution_warning = true;
    return scan;
  }

  // Three coordinate directions complementing K; the K direction itself gives
  // the radial field s gamma'(s), represented by the last determinant column.
  const Metric4 g = chart.metric_at(q.coords);
  int skip = 0;
  double best = -1.0;
  for (int i = 0; i < 4; ++i) {
    const double w = std::abs(k[i]) * std::sqrt(std::abs(g.g(i, i)));
    if (w > best) {
      best = w;
      skip = i;
    }
  }
  std::vector<JacobiInitial> init;
  for (int i = 0; i < 4; ++i) {
    if (i == skip) continue;
    JacobiInitial f;
    f.dj = Vec4::Unit(i);
    init.push_back(f);
  }

  JacobiBundle bundle;
  try {
    bundle = integrate_jacobi_fields(chart, GeodesicIVP{q, k}, s_max, init, tol);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::StepUnderflow) throw;
    scan.truncated = true;
    return scan;
  }
  const double s_hi = bundle.geodesic().s_end();
  scan.s_reached = s_hi;
  scan.truncated = !bundle.geodesic().reached_end();
  if (!(s_hi > 0.0)) return scan;

  Mat4 w0;
  for (int i = 0; i < 3; ++i) w0.col(i) = init[static_cast<std::size_t>(i)].dj;
  w0.col(3) = k;
  const double ref = std::abs(w0.determinant());
  const double near_zero = 1e-8 * ref;

  auto det = [&bundle](double s) { return conjugate_determinant(bundle, s); };

  std::vector<double> grid(static_cast<std::size_t>(grid_n));
  std::vector<double> vals(grid.size());
  for (int i = 0; i < grid_n; ++i) {
    grid[static_cast<std::size_t>(i)] = s_hi * static_cast<double>(i + 1) / grid_n;
    vals[static_cast<std::size_t>(i)] = det(grid[static_cast<std::size_t>(i)]);
  }

  const double s_tol = 1e-12 * s_hi;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double a = grid[i];
    double b = grid[i + 1];
    double fa = vals[i];
    const double fb = vals[i + 1];
    if (fa == 0.0) {
      scan.values.push_back(a);
      continue;
    }
    if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
      while (b - a > s_tol) {
        const double m = 0.5 * (a + b);
        const double fm = det(m);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      scan.values.push_back(0.5 * (a + b));
    } else if (i > 0 && std::abs(vals[i]) < std::abs(vals[i - 1]) &&
               std::abs(vals[i]) <= std::abs(vals[i + 1]) &&
               (vals[i - 1] < 0.0) == (vals[i] < 0.0)) {
      // local minimum of |D| without a sign change: golden-section refine
      double lo = grid[i - 1];
      double hi = grid[i + 1];
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = hi - phi * (hi - lo);
      double x2 = lo + phi * (hi - lo);
      double f1 = std::abs(det(x1));
      double f2 = std::abs(det(x2));
      while (hi - lo > s_tol) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - phi * (hi - lo);
          f1 = std::abs(det(x1));
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + phi * (hi - lo);
          f2 = std::abs(det(x2));
        }
      }
      const double sm = 0.5 * (lo + hi);
      if (std::abs(det(sm)) <= near_zero) scan.values.push_back(sm);
    }
  }
  std::sort(scan.values.begin(), scan.values.end());
  return scan;
}

}  // namespace obsplit
