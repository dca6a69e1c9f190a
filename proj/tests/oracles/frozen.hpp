#pragma once

// Generated by tests/oracles/derive.py; do not edit.

namespace oracle {

inline constexpr double kSchwGammaR_tt_r2 = 0.062500000000000000000;
inline constexpr double kSchwRiemann_t_rtr_r2 = 0.25000000000000000000;
// Gamma^k_ij at (0.3, 7.5, 1.1, 0.3), R = 1, index 16k + 4i + j
inline constexpr double kSchwGammaB[64] = {0, 0.010256410256410256410, 0, 0, 0.010256410256410256410, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.0077037037037037037037, 0, 0, 0, 0, -0.010256410256410256410, 0, 0, 0, 0, -6.5000000000000000000, 0, 0, 0, 0, -5.1626286310798735527, 0, 0, 0, 0, 0, 0, 0.13333333333333333333, 0, 0, 0.13333333333333333333, 0, 0, 0, 0, 0, -0.40424820190979509215, 0, 0, 0, 0, 0, 0, 0, 0.13333333333333333333, 0, 0, 0, 0.50896810523906440719, 0, 0.13333333333333333333, 0.50896810523906440719, 0};
inline constexpr double kStaticAccelR_r10 = 0.0050000000000000000000;
inline constexpr double kStaticAccelMag_r10 = 0.0052704627669472988867;
// kinematic map (tau, x1, x2, x3) -> kappa with accelerated FW frames rotated about axis 1
inline constexpr double kAccRotMap[24] = {-1.5000000000000000000, 0.50000000000000000000, 0.20000000000000000000, -0.70000000000000000000, -5.2715111007900921348, 4.4091431193631000947, -0.68409905028929751964, -0.24901503848820292325, 0.50000000000000000000, -0.25000000000000000000, 0.60000000000000000000, 0.40000000000000000000, -0.46980168748046124218, -0.55198925731687083410, 0.33477932169254242956, 0.63868834791867088661, 1.8000000000000000000, 0.30000000000000000000, -0.50000000000000000000, 0.10000000000000000000, 1.9864206510308909249, 1.2991013467966105611, 0.016216284258724009005, -0.50964402490840629880};
inline constexpr double kAccRotJacobian[16] = {0.44801074268312916590, 0.89046147141682537166, -0.88647879821538722410, -0.59098586547692481607, -0.46980168748046124218, 1.2983164077907826835, -0.40965706220256455590, -0.27310470813504303727, -0.63868834791867088661, 0, 0.87758256189037271612, -0.47942553860420300027, 0.33477932169254242956, 0, 0.47942553860420300027, 0.87758256189037271612};
inline constexpr double kRotNormAt_w1_x2_05 = 0.75000000000000000000;
inline constexpr double kSrTauDotSeries_u03_v07[3] = {1.0000000000000000000, 0.21000000000000000000, 0.28910000000000000000};
inline constexpr double kSrTauDotRadialHalf = 0.70710678118654752440;
inline constexpr double kSrRatioSeries[3] = {0, 0.078696339527282958871, -0.047351576442593694230};
inline constexpr double kSrInvTauDot2Series[3] = {1.0000000000000000000, 0.59346029517670304899, -0.12195121951219512195};
inline constexpr double kGeneralTauDotSeries[3] = {1.0000000000000000000, -0.11000000000000000000, 0.34815000000000000000};
inline constexpr double kLimitForce[3] = {-0.0011064034556951043989, 0.0072022025630114413248, -0.023610751181849238858};
// SR inertial body, c = 1, s = 1: tau, x, tau_dot, tau_ddot, v, dv/dtau
inline constexpr double kSrBody[12] = {4.1731021928983173320, 2.9599579337340243836, 1.0200210331329878082, 0.51001051656649390410, 0.97173450453012630704, 0.00039246659467699595783, -0.041206796794086885062, 0.020603398397043442531, 0.010301699198521721265, 0.000017126803108863686527, -8.5634015544318432635e-6, -4.2817007772159216317e-6};

}  // namespace oracle
