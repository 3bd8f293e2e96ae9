"""Smoke checks for reconstruction.py on the reference setups."""
import dataclasses
import io
import math
import numpy as np

from vpwaves.model import Marginal, PlasmaParams, TrappedMarginal
from vpwaves.sagdeev import SagdeevPotential
from vpwaves.profile import build_solitary, build_shock, build_train
from vpwaves import reconstruction as R

ok = True

def check(name, cond, detail=""):
    global ok
    flag = "PASS" if cond else "FAIL"
    if not cond:
        ok = False
    print(f"{flag}  {name}  {detail}")


params0 = PlasmaParams(e_plus=1.0, e_minus=1.0, q_plus=1.0, q_minus=1.0, alpha=0.0)
r2 = math.sqrt(2.0)
g_plus = Marginal.piecewise([(-2*r2, -r2, 1/(2*r2)), (r2, 2*r2, 1/(2*r2))])
g_minus = Marginal.piecewise([
    (-1.9*r2, -r2, 1/(2*r2)), (-0.1*r2, 0.1*r2, 1/(2*r2)), (r2, 1.9*r2, 1/(2*r2)),
])
beta1 = 0.39636204668909386
pot_sol = SagdeevPotential.solitary(g_plus, g_minus, beta1, params0)
prof_sol = build_solitary(pot_sol, points_per_branch=1501)
bundle_sol = R.marginal_bundle(pot_sol)

# reconstruct basics
dist_m = R.reconstruct(prof_sol, bundle_sol, "minus", x_stride=8)
check("minus dist shapes", dist_m.values.shape == (dist_m.X_grid.size, dist_m.xi1_grid.size))
check("minus nonneg", float(np.min(dist_m.values)) >= 0.0)
# tail slice approximates the end-state marginal
tail_vals = dist_m.values[0]
end_vals = np.asarray(g_minus(dist_m.xi1_grid), float)
trapezoid = getattr(np, "trapezoid", np.trapz)
l1 = trapezoid(np.abs(tail_vals - end_vals), dist_m.xi1_grid)
check("minus tail = end state (L1)", l1 < 5e-3, f"l1={l1:.3e}")

# plus species needs the trapped key
try:
    R.reconstruct(prof_sol, {"plus": g_plus, "minus": g_minus, "params": params0}, "plus")
    check("missing trapped -> error", False)
except ValueError as e:
    check("missing trapped -> error", "trapped" in str(e))

dist_p = R.reconstruct(prof_sol, bundle_sol, "plus", x_stride=8)
check("plus nonneg", float(np.min(dist_p.values)) >= 0.0)
mid = dist_p.X_grid.size // 2
crest = dist_p.values[mid]
# G = 0 here: trapped band empty at crest
band = np.abs(dist_p.xi1_grid) < math.sqrt(2 * beta1) - 1e-9
check("crest band zero when G=0", float(np.max(crest[band])) == 0.0)

# characteristics on all three kinds
mis_m = R.verify_characteristics(dist_m, prof_sol, "minus", 2000)
mis_p = R.verify_characteristics(dist_p, prof_sol, "plus", 2000)
check("solitary characteristics minus", mis_m <= 1e-8, f"{mis_m:.3e}")
check("solitary characteristics plus", mis_p <= 1e-8, f"{mis_p:.3e}")

# density recovery
err_m = R.density_recovery_error(prof_sol, bundle_sol, "minus")
err_p = R.density_recovery_error(prof_sol, bundle_sol, "plus")
check("solitary density recovery minus", err_m <= 1e-8, f"{err_m:.3e}")
check("solitary density recovery plus", err_p <= 1e-8, f"{err_p:.3e}")

# verifiers
res = R.verify_poisson(prof_sol, None, 1e-6)
check("solitary verify_poisson pot path", res < 1e-6, f"{res:.3e}")
res_m = R.verify_poisson(prof_sol, bundle_sol, 1e-6)
check("solitary verify_poisson marginal path", res_m < 1e-6, f"{res_m:.3e}")
neu = R.verify_neutrality(prof_sol)
check("solitary neutrality", neu < 1e-4, f"{neu:.3e}")
er = R.fd_energy_residual(prof_sol)
check("solitary fd energy", er < 1e-5, f"{er:.3e}")
prof_half = build_solitary(pot_sol, points_per_branch=751)
er_half = R.fd_energy_residual(prof_half)
check("fd energy refines >= 3x", er_half / er >= 3.0, f"ratio={er_half/er:.2f}")

# injected fault detection
phi_bad = prof_sol.Phi.copy()
phi_bad[900] += 1e-3
prof_bad = dataclasses.replace(prof_sol, Phi=phi_bad)
res_bad = R.verify_poisson(prof_bad, None, 1e-6)
check("poisson detects injected fault", res_bad > 1e-2, f"{res_bad:.3e}")

# shock: maps and reconstruction
phil = 1.0
s = math.sqrt(phil)
gl_p = Marginal.piecewise([(-1.5*s, -s, 0.5), (s, 1.5*s, 0.5)])
gr_p = Marginal.piecewise([(-0.5*s, 0.5*s, 0.5)])
gl_m = Marginal.piecewise([(-0.5*s, 0.5*s, 0.5)])
gr_m = Marginal.piecewise([(-1.5*s, -s, 0.5), (s, 1.5*s, 0.5)])
pot_sh = SagdeevPotential.shock(gl_p, gr_m, phil, params0)
prof_sh = build_shock(pot_sh, points_per_branch=1201)
bundle_sh = R.marginal_bundle(pot_sh)

mapped_r = R.shock_endstate_map(gl_p, params0, phil, "l_to_r", "plus")
grid = np.linspace(-2.0, 2.0, 4001)
diff = np.max(np.abs(np.asarray(mapped_r(grid), float) - np.asarray(gr_p(grid), float)))
check("ion l_to_r reproduces right state", diff == 0.0, f"max diff={diff:.3e}")

mapped_l = R.shock_endstate_map(gr_m, params0, phil, "r_to_l", "minus")
diff_m = np.max(np.abs(np.asarray(mapped_l(grid), float) - np.asarray(gl_m(grid), float)))
check("electron r_to_l reproduces left state", diff_m == 0.0, f"max diff={diff_m:.3e}")

# round trip off the band
back = R.shock_endstate_map(mapped_r, params0, phil, "r_to_l", "plus")
outer = np.abs(grid) > math.sqrt(2 * phil) + 1e-12
rt = np.max(np.abs(np.asarray(back(grid[outer]), float) - np.asarray(gl_p(grid[outer]), float)))
check("ion round trip off band", rt == 0.0, f"max diff={rt:.3e}")
# zero in, zero out
z = Marginal.piecewise([(-1.0, 1.0, 0.0)])
zm = R.shock_endstate_map(z, params0, phil, "l_to_r", "plus")
check("zero maps to zero", float(np.max(np.abs(np.asarray(zm(grid), float)))) == 0.0)
# asymmetric band -> error
bad = Marginal.piecewise([(0.1, 0.5, 1.0)])
try:
    R.shock_endstate_map(bad, params0, phil, "l_to_r", "plus")
    check("asymmetry rejected", False)
except ValueError:
    check("asymmetry rejected", True)

dist_shp = R.reconstruct(prof_sh, bundle_sh, "plus", x_stride=8)
dist_shm = R.reconstruct(prof_sh, bundle_sh, "minus", x_stride=8)
check("shock plus nonneg", float(np.min(dist_shp.values)) >= 0.0)
mis_sp = R.verify_characteristics(dist_shp, prof_sh, "plus", 2000)
check("shock characteristics plus", mis_sp <= 1e-8, f"{mis_sp:.3e}")
err_sp = R.density_recovery_error(prof_sh, bundle_sh, "plus")
err_sm = R.density_recovery_error(prof_sh, bundle_sh, "minus")
check("shock density recovery plus", err_sp <= 1e-8, f"{err_sp:.3e}")
check("shock density recovery minus", err_sm <= 1e-8, f"{err_sm:.3e}")
prof_sh_fine = build_shock(pot_sh, points_per_branch=8001)
res_sh = R.verify_poisson(prof_sh_fine, bundle_sh, 1e-6)
check("shock verify_poisson (fine)", res_sh < 1e-6, f"{res_sh:.3e}")
neu_sh = R.verify_neutrality(prof_sh_fine)
check("shock neutrality", neu_sh < 1e-6, f"{neu_sh:.3e}")
# far-right slice agrees with the mapped end state
idx_r = -1
slice_r = dist_shp.values[idx_r]
ref_r = np.asarray(mapped_r(dist_shp.xi1_grid), float)
l1_r = trapezoid(np.abs(slice_r - ref_r), dist_shp.xi1_grid)
check("shock far-right slice = mapped state", l1_r < 5e-3, f"l1={l1_r:.3e}")

# train
tau = 1.0
beta_t = 1.0
sq2 = math.sqrt(2.0)
h_plus = Marginal.piecewise([(-sq2, sq2, 1/(2*sq2))])
h_minus = Marginal.piecewise([
    (-sq2*math.sqrt(2.0), -sq2, 1/(2*sq2)), (sq2, sq2*math.sqrt(2.0), 1/(2*sq2)),
])
pot_tr = SagdeevPotential.train(h_plus, h_minus, beta_t, params0)
prof_tr = build_train(pot_tr, points_per_branch=1501)
bundle_tr = R.marginal_bundle(pot_tr)
dist_tp = R.reconstruct(prof_tr, bundle_tr, "plus", x_stride=8)
dist_tm = R.reconstruct(prof_tr, bundle_tr, "minus", x_stride=8)
check("train plus nonneg", float(np.min(dist_tp.values)) >= 0.0)
mis_tp = R.verify_characteristics(dist_tp, prof_tr, "plus", 2000)
mis_tm = R.verify_characteristics(dist_tm, prof_tr, "minus", 2000)
check("train characteristics plus", mis_tp <= 1e-8, f"{mis_tp:.3e}")
check("train characteristics minus", mis_tm <= 1e-8, f"{mis_tm:.3e}")
err_tp = R.density_recovery_error(prof_tr, bundle_tr, "plus")
err_tm = R.density_recovery_error(prof_tr, bundle_tr, "minus")
check("train density recovery plus", err_tp <= 1e-8, f"{err_tp:.3e}")
check("train density recovery minus", err_tm <= 1e-8, f"{err_tm:.3e}")
neu_tr = R.verify_neutrality(prof_tr)
check("train neutrality (coarse grid)", neu_tr < 1e-6, f"{neu_tr:.3e}")
res_tr = R.verify_poisson(prof_tr, None, 1e-6)
check("train verify_poisson", res_tr < 1e-6, f"{res_tr:.3e}")

# csv + json exports
buf = io.StringIO()
small = R.reconstruct(prof_sol, bundle_sol, "minus", x_stride=400, n_xi=101)
R.phase_to_csv(small, buf)
lines = buf.getvalue().splitlines()
check("phase csv header", lines[3] == "X,xi1,F")
check("phase csv rows", len(lines) == 4 + small.X_grid.size * small.xi1_grid.size)
summary = R.phase_summary_json(small)
check("summary slices", len(summary["slices"]) == small.X_grid.size)
masses = [s["l1"] for s in summary["slices"]]
# trapezoid across the box jumps is first order in the coarse xi spacing
check("summary mass near end-state mass", abs(masses[0] - g_minus.mass()) < 5e-2,
      f"{masses[0]:.6f} vs {g_minus.mass():.6f}")

print("ALL OK" if ok else "FAILURES PRESENT")
