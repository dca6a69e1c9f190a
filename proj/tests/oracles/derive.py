#!/usr/bin/env python3
"""Symbolic reference values for the test suite.

Run from the repository root:
    python3 tests/oracles/derive.py > tests/oracles/frozen.hpp
"""

import sympy as sp

out = []


def emit(name, value):
    out.append(f"inline constexpr double {name} = {sp.N(value, 20)};")


def emit_array(name, values):
    body = ", ".join(str(sp.N(v, 20)) for v in values)
    out.append(f"inline constexpr double {name}[{len(values)}] = {{{body}}};")


# Schwarzschild in (ct, r, theta, phi)
ct, r, th, ph, R = sp.symbols("ct r theta phi R", real=True)
X = [ct, r, th, ph]
f = 1 - R / r
g = sp.diag(f, -1 / f, -r**2, -r**2 * sp.sin(th) ** 2)
ginv = g.inv()
Gam = [[[sp.simplify(sum(ginv[k, m] * (sp.diff(g[m, i], X[j]) + sp.diff(g[m, j], X[i]) - sp.diff(g[i, j], X[m]))
                         for m in range(4)) / 2) for j in range(4)] for i in range(4)] for k in range(4)]


def riemann(k, l, i, j):
    # R^k_{l i j} = d_i Gamma^k_{j l} - d_j Gamma^k_{i l} + Gamma^k_{i m} Gamma^m_{j l} - Gamma^k_{j m} Gamma^m_{i l}
    e = sp.diff(Gam[k][j][l], X[i]) - sp.diff(Gam[k][i][l], X[j])
    e += sum(Gam[k][i][m] * Gam[m][j][l] - Gam[k][j][m] * Gam[m][i][l] for m in range(4))
    return sp.simplify(e)


pt_a = {ct: 0, r: 2, th: sp.pi / 2, ph: 0, R: 1}
emit("kSchwGammaR_tt_r2", Gam[1][0][0].subs(pt_a))
emit("kSchwRiemann_t_rtr_r2", riemann(0, 1, 0, 1).subs(pt_a))

pt_b = {ct: sp.Rational(3, 10), r: sp.Rational(15, 2), th: sp.Rational(11, 10), ph: sp.Rational(3, 10), R: 1}
vals = []
for k in range(4):
    for i in range(4):
        for j in range(4):
            vals.append(Gam[k][i][j].subs(pt_b))
out.append("// Gamma^k_ij at (0.3, 7.5, 1.1, 0.3), R = 1, index 16k + 4i + j")
emit_array("kSchwGammaB", vals)

# static observer proper acceleration, A^r = Gamma^r_tt (u^t)^2 with u^t = c / sqrt(f)
c = sp.symbols("c", positive=True)
a_r = sp.simplify(Gam[1][0][0] * c**2 / f)
pt_c = {r: 10, R: 1, c: 1}
emit("kStaticAccelR_r10", a_r.subs(pt_c))
emit("kStaticAccelMag_r10", sp.sqrt(a_r**2 / f).subs(pt_c))

# accelerated + rotating observer map, a = c = omega = 1
tau, x1, x2, x3 = sp.symbols("tau x1 x2 x3", real=True)
rho = sp.sqrt(x1**2 + x2**2 + x3**2)
phi_acc = sp.Matrix([
    sp.sinh(tau) - rho * sp.cosh(tau) + x1 * sp.sinh(tau),
    sp.cosh(tau) - 1 - rho * sp.sinh(tau) + x1 * sp.cosh(tau),
    x2 * sp.cos(tau) - x3 * sp.sin(tau),
    x2 * sp.sin(tau) + x3 * sp.cos(tau),
])
acc_pts = [(sp.Rational(-3, 2), sp.Rational(1, 2), sp.Rational(1, 5), sp.Rational(-7, 10)),
           (sp.Rational(1, 2), sp.Rational(-1, 4), sp.Rational(3, 5), sp.Rational(2, 5)),
           (sp.Rational(9, 5), sp.Rational(3, 10), sp.Rational(-1, 2), sp.Rational(1, 10))]
out.append("// kinematic map (tau, x1, x2, x3) -> kappa with accelerated FW frames rotated about axis 1")
vals = []
for p in acc_pts:
    vals += list(p) + list(phi_acc.subs({tau: p[0], x1: p[1], x2: p[2], x3: p[3]}))
emit_array("kAccRotMap", vals)
# d phi / d(c tau) and d phi / dx at the second point, row-major
J = phi_acc.jacobian([tau, x1, x2, x3])
p = acc_pts[1]
emit_array("kAccRotJacobian", list(J.subs({tau: p[0], x1: p[1], x2: p[2], x3: p[3]})))
# causal character of d/d tau for the comoving curve with a = 0: sign flips at omega^2 ((x2)^2 + (x3)^2) = c^2
w = sp.symbols("omega", positive=True)
phi_rot = sp.Matrix([tau - rho, x1, x2 * sp.cos(w * tau) - x3 * sp.sin(w * tau), x2 * sp.sin(w * tau) + x3 * sp.cos(w * tau)])
dt = phi_rot.diff(tau)
norm_dt = sp.simplify(dt[0] ** 2 - dt[1] ** 2 - dt[2] ** 2 - dt[3] ** 2)
emit("kRotNormAt_w1_x2_05", norm_dt.subs({w: 1, x1: 0, x2: sp.Rational(1, 2), x3: 0, tau: 0}))

# SR clock rate tau_dot(eps) = ((1 - eps u v)^2 - eps^2 v^2)^(-1/2)
eps, u, v = sp.symbols("epsilon u v", real=True)
td = ((1 - eps * u * v) ** 2 - eps**2 * v**2) ** sp.Rational(-1, 2)
ser = sp.series(td, eps, 0, 3).removeO()
emit_array("kSrTauDotSeries_u03_v07", [ser.coeff(eps, k).subs({u: sp.Rational(3, 10), v: sp.Rational(7, 10)}) for k in range(3)])
emit("kSrTauDotRadialHalf", td.subs({eps: 1, u: -1, v: sp.Rational(1, 2)}))

# tau_ddot / tau_dot^2 = (d tau_dot / d tau) / tau_dot along x(tau) with velocity v and acceleration a
xs = sp.Matrix(sp.symbols("X1:4", real=True))
vs = sp.Matrix(sp.symbols("V1:4", real=True))
acc = sp.Matrix(sp.symbols("A1:4", real=True))
xn = sp.sqrt(xs.dot(xs))
xh = xs / xn
tdx = ((1 - eps * xh.dot(vs)) ** 2 - eps**2 * vs.dot(vs)) ** sp.Rational(-1, 2)
dtd = sum(sp.diff(tdx, xs[i]) * vs[i] + sp.diff(tdx, vs[i]) * acc[i] for i in range(3))
ratio = dtd / tdx
num = {xs[0]: 3, xs[1]: 1, xs[2]: sp.Rational(1, 2), vs[0]: sp.Rational(-2, 5), vs[1]: sp.Rational(1, 5),
       vs[2]: sp.Rational(1, 10), acc[0]: sp.Rational(1, 20), acc[1]: sp.Rational(-3, 100), acc[2]: sp.Rational(1, 50)}
rser = sp.series(ratio.subs(num), eps, 0, 3).removeO()
emit_array("kSrRatioSeries", [rser.coeff(eps, k) for k in range(3)])
inv2 = sp.series((1 / tdx**2).subs(num), eps, 0, 3).removeO()
emit_array("kSrInvTauDot2Series", [sp.expand(inv2).coeff(eps, k) for k in range(3)])

# general alpha clock-rate series
al = sp.Matrix([[1, sp.Rational(1, 5), sp.Rational(-1, 10), 0],
                [sp.Rational(1, 5), -1, sp.Rational(1, 10), 0],
                [sp.Rational(-1, 10), sp.Rational(1, 10), -sp.Rational(6, 5), sp.Rational(1, 5)],
                [0, 0, sp.Rational(1, 5), -1]])
vv = sp.Matrix([sp.Rational(3, 10), sp.Rational(-1, 2), sp.Rational(2, 5)])
rad = al[0, 0] + 2 * eps * sum(al[0, a + 1] * vv[a] for a in range(3)) + eps**2 * (vv.T * al[1:, 1:] * vv)[0]
gser = sp.series(rad ** sp.Rational(-1, 2), eps, 0, 3).removeO()
emit_array("kGeneralTauDotSeries", [gser.coeff(eps, k) for k in range(3)])

# zeroth-order limit force for a c-free alpha(tau, x) obeying both limit conditions
T = sp.symbols("T", real=True)
Y = sp.Matrix(sp.symbols("Y1:4", real=True))
fpot = sp.Rational(1, 10) * Y[0] ** 2 + sp.Rational(1, 20) * Y[1] * Y[2]
alpha = sp.zeros(4, 4)
alpha[0, 0] = 1
for a in range(3):
    alpha[0, a + 1] = alpha[a + 1, 0] = sp.diff(fpot, Y[a])
for a in range(3):
    for b in range(3):
        alpha[a + 1, b + 1] = (-(1 + sp.Rational(1, 10) * Y[0] ** 2 + sp.Rational(1, 20) * T) if a == b else 0) + \
            (sp.Rational(1, 50) * Y[a] * Y[b])
ainv = alpha.inv()
vel = sp.Matrix([sp.Rational(1, 5), sp.Rational(-1, 10), sp.Rational(3, 10)])
force = []
for cc in range(1, 4):
    term1 = sum(ainv[cc, b] * sp.diff(alpha[a, b], T) * vel[a - 1] for a in range(1, 4) for b in range(1, 4))
    term2 = 0
    for l in range(4):
        for a in range(1, 4):
            for b in range(1, 4):
                t = sp.diff(alpha[l, a], Y[b - 1]) + sp.diff(alpha[l, b], Y[a - 1])
                if l > 0:
                    t -= sp.diff(alpha[a, b], Y[l - 1])
                term2 += ainv[cc, l] * t * vel[a - 1] * vel[b - 1]
    force.append(-(term1 + term2 / 2))
lpt = {T: sp.Rational(1, 2), Y[0]: sp.Rational(6, 5), Y[1]: sp.Rational(-1, 2), Y[2]: sp.Rational(7, 10)}
emit_array("kLimitForce", [sp.simplify(fc.subs(lpt)) for fc in force])

# SR inertial body seen by the inertial observer at the origin: kappa(s) = (0, y0) + s gamma (c, w)
cc_, s_ = sp.symbols("c s", positive=True)
y0 = sp.Matrix([3, 1, sp.Rational(1, 2)])
wv = sp.Matrix([sp.Rational(-1, 25), sp.Rational(1, 50), sp.Rational(1, 100)])
gam = 1 / sp.sqrt(1 - wv.dot(wv) / cc_**2)
xpos = y0 + s_ * gam * wv
k0 = s_ * gam * cc_
tau_s = (k0 + sp.sqrt(xpos.dot(xpos))) / cc_
tdot = sp.diff(tau_s, s_)
tddot = sp.diff(tdot, s_)
vel_tau = xpos.diff(s_) / tdot
acc_tau = vel_tau.diff(s_) / tdot
sub = {cc_: 1, s_: 1}
out.append("// SR inertial body, c = 1, s = 1: tau, x, tau_dot, tau_ddot, v, dv/dtau")
emit_array("kSrBody", [tau_s.subs(sub)] + list(xpos.subs(sub)) + [tdot.subs(sub), tddot.subs(sub)] +
           list(vel_tau.subs(sub)) + list(acc_tau.subs(sub)))

print("#pragma once")
print()
print("// Generated by tests/oracles/derive.py; do not edit.")
print()
print("namespace oracle {")
print()
for line in out:
    print(line)
print()
print("}  // namespace oracle")
