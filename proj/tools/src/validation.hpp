#pragma once

// Invariant checks shared by `obsplit validate` and the acceptance suite.

#include <cstdint>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace obsplit::cli {

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

/// max |g(v, v) - g(v0, v0)| over the geodesic, relative to sum_i |g_ii| v0_i^2.
double geodesic_norm_drift(const Chart& chart, const GeodesicIVP& ivp, double s_end, int samples = 64,
                           const IntegratorTolerances& tol = {});

/// Largest Gram residual of the frame over its proper-time range.
double frame_gram_drift(const FrameField& frames, int samples = 101);

/// max |g(J, gamma') - g(dJ0, gamma'0) s - g(J0, gamma'0)| along the geodesic,
/// relative to (|J0| + |dJ0| |s_end|) |gamma'0| in the weighted norm above.
double jacobi_affinity_residual(const Chart& chart, const GeodesicIVP& ivp, double s_end, const Vec4& j0,
                                const Vec4& dj0, int samples = 64, const IntegratorTolerances& tol = {});

struct CurvatureCheck {
  double ricci_max = 0.0;
  /// max |Gamma_fd - Gamma_analytic| / max(1, max |Gamma_analytic|)
  double christoffel_max = 0.0;
  int points = 0;
};

/// Ricci-flatness and Christoffel agreement at `n` interior points around `center`.
CurvatureCheck curvature_check(const Chart& chart, const Vec4& center, int n = 20,
                               double fd_step = kDefaultFdStep);

struct JacobianCheck {
  double max_rel_error = 0.0;
  int evaluated = 0;
  int skipped = 0;
};

/// Jacobi-field Jacobian against central differences at `n` seeded random
/// points with |x| in [0.2, 1] max_radius.
JacobianCheck jacobian_fd_check(const FrameField& frames, std::uint64_t seed, int n, double max_radius,
                                double fd_h = 1e-5, const IntegratorTolerances& tol = {});

/// Full invariant suite for a scenario.
std::vector<Check> run_validation(const Scenario& s, std::uint64_t seed);

}  // namespace obsplit::cli
