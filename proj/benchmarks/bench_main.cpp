#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include <obsplit/geodesic.hpp>
#include <obsplit/newtlimit.hpp>
#include <obsplit/observer.hpp>
#include <obsplit/splitting.hpp>

using namespace obsplit;

namespace {

ChartPtr schwarzschild() { return std::make_shared<const Chart>(Chart::schwarzschild(1.0)); }

std::shared_ptr<const FrameField> acc_rot_frames() {
  auto o = std::make_shared<const ObserverCurve>(make_uniformly_accelerated_observer(1.0));
  return std::make_shared<const FrameField>(
      rotating_frame(fermi_walker_transport(o, standard_frame(), 0.0, -6.0, 6.0), 1.0, 1));
}

std::shared_ptr<const FrameField> sr_frames() {
  auto chart = std::make_shared<const Chart>(Chart::minkowski());
  auto o = std::make_shared<const ObserverCurve>(
      make_inertial_observer(chart, Event(chart->id(), Vec4::Zero()), Vec4(1, 0, 0, 0), -40, 40));
  return std::make_shared<const FrameField>(fermi_walker_transport(o, standard_frame(), 0.0, -40, 40));
}

}  // namespace

static void BM_SchwarzschildOrbit(benchmark::State& state) {
  const auto chart = schwarzschild();
  const double r = 8.0, omega = std::sqrt(0.5 / (r * r * r));
  const double ut = 1.0 / std::sqrt(1.0 - 1.0 / r - r * r * omega * omega);
  const GeodesicIVP ivp{Event(chart->id(), Vec4(0, r, 1.5707963267948966, 0)), Vec4(ut, 0, 0, ut * omega)};
  const double s_end = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_geodesic(*chart, ivp, s_end));
}
BENCHMARK(BM_SchwarzschildOrbit)->Arg(10)->Arg(40)->Arg(80);

static void BM_KinematicMapWithJacobian(benchmark::State& state) {
  const auto fr = acc_rot_frames();
  const ObservedEvent p(0.5, Vec3(-0.25, 0.6, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(kinematic_map_with_jacobian(*fr, p));
}
BENCHMARK(BM_KinematicMapWithJacobian);

static void BM_InvertSr(benchmark::State& state) {
  const auto fr = sr_frames();
  SearchConfig cfg;
  cfg.tau_min = -20;
  cfg.tau_max = 20;
  cfg.box_min = Vec3::Constant(-8);
  cfg.box_max = Vec3::Constant(8);
  cfg.n_x = static_cast<int>(state.range(0));
  const Event target("minkowski", Vec4(5, 3, 4, 0));
  for (auto _ : state) benchmark::DoNotOptimize(invert_observer_map(*fr, target, cfg));
}
BENCHMARK(BM_InvertSr)->Arg(2)->Arg(3)->Arg(5);

static void BM_SrTauDotSeries(benchmark::State& state) {
  double u = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sr_tau_dot_series(u, 0.7));
    u = -u;
  }
}
BENCHMARK(BM_SrTauDotSeries);

static void BM_SeriesInverse(benchmark::State& state) {
  const Series2 f{1.0, 0.3, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(series_inv(series_mul(f, f)));
}
BENCHMARK(BM_SeriesInverse);
BENCHMARK_MAIN();
