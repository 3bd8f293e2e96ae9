"""Smoke checks for profile.py against closed forms and reference setups."""
import math
import io
import numpy as np

from vpwaves.model import Marginal, PlasmaParams, TrappedMarginal
from vpwaves.sagdeev import SagdeevPotential, SyntheticPotential
from vpwaves.profile import (
    x_of_phi, period, build_solitary, build_shock, build_train,
    profile_to_csv, load_profile_csv,
)

ok = True

def check(name, cond, detail=""):
    global ok
    flag = "PASS" if cond else "FAIL"
    if not cond:
        ok = False
    print(f"{flag}  {name}  {detail}")


# (a) synthetic x_of_phi: V = k^2 phi^2 / 2 -> X = (1/k) ln(phi_start/phi)
k = 0.7
beta = 0.4
pot_q = SyntheticPotential(
    v=lambda p: 0.5 * k * k * np.asarray(p) ** 2,
    dv=lambda p: k * k * np.asarray(p),
    amplitude=beta,
)
phi_t, x_t = x_of_phi(pot_q, beta / 2, 0.0, eps_tail=1e-6)
exact = (1.0 / k) * np.log((beta / 2) / phi_t)
err = np.max(np.abs(x_t - exact))
check("x_of_phi quadratic-zero log profile", err < 1e-8, f"err={err:.3e}")

# V = c (beta - phi) / 2 (simple zero at beta): X from beta to beta/2
c = 1.3
pot_s = SyntheticPotential(
    v=lambda p: 0.5 * c * (beta - np.asarray(p)),
    dv=lambda p: -0.5 * c * np.ones_like(np.asarray(p, dtype=float)),
    amplitude=beta,
)
phi_t, x_t = x_of_phi(pot_s, beta, beta / 2, eps_tail=1e-6)
exact = 2.0 * np.sqrt((beta - phi_t) / c)
err = np.max(np.abs(x_t - exact))
check("x_of_phi simple-zero sqrt profile", err < 1e-8, f"err={err:.3e}")

e_phi, e_x = x_of_phi(pot_s, 0.2, 0.2)
check("x_of_phi equal endpoints -> empty", e_phi.size == 0 and e_x.size == 0)

# (b) period: V = phi (beta - phi) / 2 has gamma = 2 pi for any beta
pot_p = SyntheticPotential(
    v=lambda p: 0.5 * np.asarray(p) * (beta - np.asarray(p)),
    dv=lambda p: 0.5 * beta - np.asarray(p, dtype=float),
    amplitude=beta,
    kind="train",
)
gam = period(pot_p)
check("period of half-harmonic well = 2 pi", abs(gam - 2 * math.pi) < 1e-8,
      f"gamma={gam!r}")

# (c) solitary build on the two-species reference setup
params0 = PlasmaParams(e_plus=1.0, e_minus=1.0, q_plus=1.0, q_minus=1.0, alpha=0.0)
r2 = math.sqrt(2.0)
g_plus = Marginal.piecewise([
    (-2 * r2, -r2, 1 / (2 * r2)),
    (r2, 2 * r2, 1 / (2 * r2)),
])
g_minus = Marginal.piecewise([
    (-1.9 * r2, -r2, 1 / (2 * r2)),
    (-0.1 * r2, 0.1 * r2, 1 / (2 * r2)),
    (r2, 1.9 * r2, 1 / (2 * r2)),
])
beta1 = 0.39636204668909386
pot_sol = SagdeevPotential.solitary(g_plus, g_minus, beta1, params0)
prof = build_solitary(pot_sol, points_per_branch=1501)
n = prof.X_grid.size
mid = n // 2
check("solitary Phi(0) = amplitude", prof.Phi[mid] == beta1)
check("solitary even", np.max(np.abs(prof.Phi - prof.Phi[::-1])) == 0.0)
dec = np.all(np.diff(prof.Phi[mid:]) < 0)
check("solitary strictly decreasing right of crest", bool(dec))
check("solitary X strictly increasing", bool(np.all(np.diff(prof.X_grid) > 0)))
# tail log-linear: Phi ~ C exp(-sqrt(rho'(0)) X); fit last decade
tail = slice(int(0.8 * n), n - 1)
slopes = np.diff(np.log(prof.Phi[tail])) / np.diff(prof.X_grid[tail])
check("solitary tail log-linear", np.std(slopes) < 5e-3 * abs(np.mean(slopes)),
      f"mean={np.mean(slopes):.6f} std={np.std(slopes):.2e}")
# Poisson residual away from kink crossings of V' (sqrt kinks make the
# local FD error O(h^(1/2)); the verifier excludes those neighborhoods)
h = prof.X_grid[1] - prof.X_grid[0]
lap = (prof.Phi[2:] - 2 * prof.Phi[1:-1] + prof.Phi[:-2]) / h**2
rhs = np.asarray(pot_sol.dv(prof.Phi[1:-1]), float)
scale = max(1.0, np.max(np.abs(rhs)))
res = np.abs(lap - rhs) / scale
keep = np.ones(res.size, bool)
for kk in pot_sol.kinks():
    keep &= np.abs(prof.Phi[1:-1] - kk.phi) > 30 * h * np.max(np.abs(prof.dPhi))
keep[mid - 2:mid + 1] = False
worst = np.max(res[keep])
check("solitary Poisson FD residual small", worst < 5e-6, f"res={worst:.3e}")
near = np.max(res[~keep])
check("solitary Poisson FD kink zone bounded", near < 5e-3, f"res={near:.3e}")

# (d) shock builds, three amplitudes
def shock_setup(phi_l):
    s = math.sqrt(phi_l)
    gl_p = Marginal.piecewise([(-1.5 * s, -s, 0.5), (s, 1.5 * s, 0.5)])
    gr_m = Marginal.piecewise([(-1.5 * s, -s, 0.5), (s, 1.5 * s, 0.5)])
    return gl_p, gr_m


for phi_l in (0.5, 1.0, 2.0):
    gl_p, gr_m = shock_setup(phi_l)
    pot_sh = SagdeevPotential.shock(gl_p, gr_m, phi_l, params0)
    pr = build_shock(pot_sh, points_per_branch=1201)
    i0 = int(np.flatnonzero(pr.X_grid == 0.0)[0])
    check(f"shock {phi_l} Phi(0) = amplitude/2", pr.Phi[i0] == phi_l / 2)
    # point symmetry about the anchor
    klim = min(i0, pr.X_grid.size - 1 - i0)
    sym = np.max(np.abs(pr.Phi[i0 - klim:i0 + klim + 1]
                        + pr.Phi[i0 - klim:i0 + klim + 1][::-1] - phi_l))
    check(f"shock {phi_l} point symmetric", sym < 1e-8, f"defect={sym:.3e}")
    mono = np.all(np.diff(pr.Phi) < 0)
    check(f"shock {phi_l} strictly decreasing", bool(mono))

# (e) train beta = tau = 1
tau = 1.0
beta_t = 1.0
sq2 = math.sqrt(2.0)
h_plus = Marginal.piecewise([(-sq2 * math.sqrt(tau), sq2 * math.sqrt(tau), 1 / (2 * sq2))])
h_minus = Marginal.piecewise([
    (-sq2 * math.sqrt(beta_t + tau), -sq2 * math.sqrt(beta_t), 1 / (2 * sq2)),
    (sq2 * math.sqrt(beta_t), sq2 * math.sqrt(beta_t + tau), 1 / (2 * sq2)),
])
pot_tr = SagdeevPotential.train(h_plus, h_minus, beta_t, params0)
prt = build_train(pot_tr, points_per_branch=1501)
m = prt.X_grid.size // 2
check("train Phi(0) = 0", prt.Phi[0] == 0.0)
check("train Phi(gamma/2) = beta", prt.Phi[m] == beta_t)
check("train Phi(gamma) = 0", prt.Phi[-1] == 0.0)
mir = np.max(np.abs(prt.Phi - prt.Phi[::-1]))
check("train mirror symmetric", mir == 0.0, f"defect={mir:.3e}")
gam_q = period(pot_tr)
check("train builder period vs quadrature", abs(prt.period - gam_q) < 1e-8 * gam_q,
      f"build={prt.period!r} quad={gam_q!r}")
# energy identity at nodes is exact by construction; check FD energy interiorly
hh = prt.X_grid[1] - prt.X_grid[0]
dmid = (prt.Phi[1:] - prt.Phi[:-1]) / hh
vmid = np.asarray(pot_tr.v(0.5 * (prt.Phi[1:] + prt.Phi[:-1])), float)
eres = np.abs(0.5 * dmid**2 - vmid)
inner = eres[50:-50]
check("train FD energy residual interior", np.max(inner) < 2e-5,
      f"max={np.max(inner):.3e}")

# (f) CSV round trip
buf = io.StringIO()
profile_to_csv(prt, buf)
buf.seek(0)
back = load_profile_csv(buf)
check("csv kind preserved", back.kind == "train")
check("csv X exact", np.array_equal(back.X_grid, prt.X_grid))
check("csv Phi exact", np.array_equal(back.Phi, prt.Phi))
check("csv dPhi exact", np.array_equal(back.dPhi, prt.dPhi))
check("csv period preserved", back.period == prt.period)
vv = np.asarray(back.pot.v(prt.Phi[::37]), float)
vref = np.asarray(pot_tr.v(prt.Phi[::37]), float)
dv_err = np.max(np.abs(vv - vref)) / max(1.0, np.max(np.abs(vref)))
check("csv tabulated V close", dv_err < 1e-6, f"err={dv_err:.3e}")

print("ALL OK" if ok else "FAILURES PRESENT")
