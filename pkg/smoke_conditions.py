import math
import time

import numpy as np
from scipy.optimize import brentq

from vpwaves.model import Marginal, PlasmaParams, TrappedMarginal
from vpwaves.sagdeev import SagdeevPotential, SyntheticPotential, v_infinity
from vpwaves import conditions as C

t0 = time.time()
params = PlasmaParams(e_plus=1.0, e_minus=1.0, q_plus=1.0, q_minus=1.0, alpha=0.0)
s2 = math.sqrt(2.0)
h = 1.0 / (2.0 * s2)

g_plus = Marginal.piecewise([(-2 * s2, -s2, h), (s2, 2 * s2, h)])
g_minus = Marginal.piecewise(
    [(-1.9 * s2, -s2, h), (-0.1 * s2, 0.1 * s2, h), (s2, 1.9 * s2, h)]
)

pot_probe = SagdeevPotential.solitary(g_plus, g_minus, 1.0, params)
print("rho_inf(0)      =", pot_probe.dv(0.0), "(want |.|<=1e-14)")
print("rho_inf(1/100)  =", pot_probe.dv(0.01), "(want >0)")
print("rho_inf(1)      =", pot_probe.dv(1.0), "(want -0.7936950)")

beta0 = brentq(lambda p: float(pot_probe.dv(p)), 0.01, 1.0, xtol=1e-15)
vinf = lambda p: float(v_infinity(g_plus, g_minus, params, p))
beta1 = brentq(vinf, beta0, 1.0, xtol=1e-15)
print("beta0 =", beta0, " dv(beta0) =", pot_probe.dv(beta0))
print("beta1 =", beta1, " V(beta1)  =", vinf(beta1))

pot = SagdeevPotential.solitary(g_plus, g_minus, beta1, params)
rep = C.check_exists(pot)
print("solitary verdict:", rep.verdict, "failed:", rep.failed)
print("  tails:", rep.tail_class_at_0, rep.tail_class_at_amplitude)
print("  quasi_neutral:", rep.quasi_neutral, " symmetry:", rep.symmetry_ok)
u = C.classify_uniqueness(pot)
print("uniqueness:", u.classification, " beta_star:", u.beta_star, " beta_sharp:", u.beta_sharp)
print("  details:", u.details)

# failing case: amplitude below the V=0 crossing leaves V(beta)>0
pot_bad = SagdeevPotential.solitary(g_plus, g_minus, beta1 / 2.0, params)
rep_bad = C.check_exists(pot_bad)
print("half-amplitude verdict:", rep_bad.verdict, "failed:", rep_bad.failed)

print("t(2.5) = %.2fs" % (time.time() - t0))

# shock reference family
for phil in (0.5, 1.0, 2.0):
    r = math.sqrt(params.q_plus * phil)
    rm = math.sqrt(params.q_minus * phil)
    hp = 1.0 / (2.0 * params.e_plus * math.sqrt(params.q_plus))
    hm = 1.0 / (2.0 * params.e_minus * math.sqrt(params.q_minus))
    gl_plus = Marginal.piecewise([(-1.5 * r, -r, hp), (r, 1.5 * r, hp)])
    gr_plus = Marginal.piecewise([(-0.5 * r, 0.5 * r, hp)])
    gl_minus = Marginal.piecewise([(-0.5 * rm, 0.5 * rm, hm)])
    gr_minus = Marginal.piecewise([(-1.5 * rm, -rm, hm), (rm, 1.5 * rm, hm)])
    spot = SagdeevPotential.shock(gl_plus, gr_minus, phil, params)
    srep = C.check_exists(spot)
    mids = spot.v(phil / 2.0)
    sym = abs(spot.v(0.3 * phil) - spot.v(0.7 * phil))
    print(f"shock phil={phil}: {srep.verdict} failed={srep.failed} "
          f"V(mid)={float(mids):.6g} sym_defect={float(sym):.2e}")
    print("   masses:", gl_plus.mass(), math.sqrt(phil) / 2.0)
    print("   matching:", C.check_shock_matching(gl_plus, gr_plus, gl_minus, gr_minus, params, phil))
    print("   alpha:", C.compute_alpha(gl_plus, gr_plus))
    print("   tails:", srep.tail_class_at_0, srep.tail_class_at_amplitude)

# wave train, unit tau and beta
beta, tau = 1.0, 1.0
hplus = Marginal.piecewise([(-math.sqrt(2 * tau), math.sqrt(2 * tau), 1.0 / (2 * math.sqrt(2)))])
hminus = Marginal.piecewise([
    (-math.sqrt(2 * (beta + tau)), -math.sqrt(2 * beta), 1.0 / (2 * math.sqrt(2))),
    (math.sqrt(2 * beta), math.sqrt(2 * (beta + tau)), 1.0 / (2 * math.sqrt(2))),
])
tpot = SagdeevPotential.train(hplus, hminus, beta, params)
trep = C.check_exists(tpot)
print("train verdict:", trep.verdict, "failed:", trep.failed)
print("  tails:", trep.tail_class_at_0, trep.tail_class_at_amplitude)

# synthetic calibration potentials
for c in (1e-3, 1.0, 1e3):
    q = SyntheticPotential(lambda p, c=c: c * p * p, lambda p, c=c: 2 * c * p, 1.0)
    l = SyntheticPotential(lambda p, c=c: c * p, lambda p, c=c: c * np.ones_like(np.asarray(p, dtype=float)), 1.0)
    print(f"c={c}: quad -> {C.classify_tail(q, 'zero').classification}, "
          f"linear -> {C.classify_tail(l, 'zero').classification}")

# beta_sharp toys
print("beta_sharp(-phi, 1) =", C.beta_sharp(lambda p: -np.asarray(p, dtype=float), 1.0))
print("beta_sharp(+phi, 1) =", C.beta_sharp(lambda p: np.asarray(p, dtype=float), 1.0))
print("beta_sharp(V_inf, inf, cap) =", C.beta_sharp(
    lambda p: v_infinity(g_plus, g_minus, params, p), math.inf, scan_hi=3.7))

# alpha from moment-bearing end states
ga = Marginal.piecewise([(0.0, 1.0, 1.0)])
gb = Marginal.piecewise([(1.0, 3.0, 1.0)])
print("alpha (nondegenerate):", C.compute_alpha(ga, gb), "(want (4-0.5)/(2-1)=3.5)")
try:
    C.compute_alpha(ga, Marginal.piecewise([(2.0, 3.0, 1.0)]))
    print("inconsistent alpha: NO ERROR (bad)")
except ValueError as e:
    print("inconsistent alpha raises:", e)

print("quasineutral equal masses:", C.check_quasineutral(g_plus, g_minus, params))
print("total %.2fs" % (time.time() - t0))
