"""Command-line front end: JSON configs in, CSV and JSON artifacts out.

Subcommands map onto the library layers. ``check`` evaluates the
existence conditions for a configured wave and prints the report,
``solve`` builds the wave and writes its profile, phase tables, and
verification report, ``family`` emits companion waves around a base
wave, ``example`` runs a built-in reference case, and ``oracle``
cross-checks the density operators against direct midpoint sums.

Exit codes: 0 success, 2 a wave condition fails, 3 bad input, 4 a
numerical routine gives up. Everything comes from the config file and
the flags; no environment variables are read.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .cases import shock_case, solitary_case, train_case
from .conditions import (
    ConditionError,
    check_exists,
    check_shock_matching,
    classify_uniqueness,
    compute_alpha,
)
from .densities import (
    DEFAULT_QUADRATURE,
    QuadratureSettings,
    rho_minus,
    rho_plus_inf,
    rho_plus_trapped,
    rho_shock_plus,
)
from .families import (
    boltzmann_train_match,
    rescale_to_period,
    solitary_inject_case_b,
    solitary_inject_case_c,
    solitary_perturb,
    train_box_family,
)
from .model import BoltzmannParams, Marginal, PlasmaParams, TrappedMarginal
from .profile import (
    build_shock,
    build_solitary,
    build_train,
    load_profile_csv,
    profile_to_csv,
)
from .reconstruction import (
    density_recovery_error,
    fd_energy_residual,
    marginal_bundle,
    phase_summary_json,
    phase_to_csv,
    reconstruct,
    verify_characteristics,
    verify_neutrality,
    verify_poisson,
)
from .sagdeev import SagdeevPotential

__all__ = ["main", "run"]

OK = 0
CONDITION_FAILURE = 2
INPUT_ERROR = 3
NUMERICAL_FAILURE = 4

_CONFIG_HELP = """\
config file layout (JSON, versioned):

  {
    "schema": 1,
    "params": {"e_plus": 1.0, "e_minus": 1.0, "q_plus": 1.0,
               "q_minus": 1.0, "alpha": 0.0, "n": 1,
               "boltzmann": {"rho": ..., "kappa": ...}},
    "wave": {
      "kind": "solitary" | "shock" | "train",
      "beta": ...,                  solitary/train crest value
      "phi_l": ...,                 shock left end state
      "marginals": { ... }
    },
    "settings": {"rel_tol": 1e-10, "abs_tol": 1e-13,
                 "max_subdivisions": 200, "points_per_branch": 2001,
                 "table_n": 800, "eps_tail": 1e-6},
    "family": {"taus": [...], "count": ..., "gamma": ...,
               "beta_sharp": ..., "beta_star": ...}
  }

Every block except "schema" and "wave" is optional and defaults to the
values shown. Marginal specs take one of three shapes:

  {"kind": "piecewise", "pieces": [[lo, hi, height], ...]}
  {"kind": "maxwellian", "mass": ..., "center": ..., "kappa": ...}
  {"kind": "tabulated", "knots": [...], "values": [...]}

solitary/train waves name their marginals g_plus, g_minus, and
optionally g_trapped (must vanish at and below the frame speed).
shock waves name four: left_plus, right_plus, left_minus, right_minus.
"""


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}"
        ) from exc
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: top level must be a JSON object")
    if cfg.get("schema") != 1:
        raise ValueError(f'{path}: expected "schema": 1, got {cfg.get("schema")!r}')
    return cfg


def _params_from(cfg: dict) -> PlasmaParams:
    raw = dict(cfg.get("params", {}))
    boltzmann = raw.pop("boltzmann", None)
    try:
        if boltzmann is not None:
            boltzmann = BoltzmannParams(**boltzmann)
        return PlasmaParams(boltzmann=boltzmann, **raw)
    except TypeError as exc:
        raise ValueError(f"params block: {exc}") from exc


def _settings_from(cfg: dict) -> tuple[QuadratureSettings, dict]:
    """Split the settings block into quadrature tolerances and build knobs."""
    raw = dict(cfg.get("settings", {}))
    build = {k: raw.pop(k) for k in ("points_per_branch", "table_n", "eps_tail")
             if k in raw}
    try:
        quad = QuadratureSettings(**raw) if raw else DEFAULT_QUADRATURE
    except TypeError as exc:
        raise ValueError(f"settings block: {exc}") from exc
    return quad, build


def _marginal_from(spec, where: str) -> Marginal:
    if not isinstance(spec, dict):
        raise ValueError(f"{where}: expected a marginal spec object")
    try:
        return Marginal.from_dict(spec)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{where}: {exc}") from exc


def _positive_number(wave: dict, key: str) -> float:
    value = wave.get(key)
    if not (isinstance(value, (int, float)) and not isinstance(value, bool)
            and math.isfinite(value) and value > 0):
        raise ValueError(f"wave.{key} must be a positive finite number")
    return float(value)


def _assemble(cfg: dict, params: PlasmaParams, quad: QuadratureSettings):
    """Build the configured potential. Returns (kind, pot, info)."""
    wave = cfg.get("wave")
    if not isinstance(wave, dict):
        raise ValueError('config needs a "wave" object')
    kind = wave.get("kind")
    margs = wave.get("marginals") or {}

    if kind in ("solitary", "train"):
        g_plus = _marginal_from(margs.get("g_plus"), "wave.marginals.g_plus")
        g_minus = _marginal_from(margs.get("g_minus"), "wave.marginals.g_minus")
        trapped = None
        if margs.get("g_trapped") is not None:
            inner = _marginal_from(margs["g_trapped"], "wave.marginals.g_trapped")
            trapped = TrappedMarginal(inner, params.alpha)
        beta = _positive_number(wave, "beta")
        maker = SagdeevPotential.solitary if kind == "solitary" else SagdeevPotential.train
        pot = maker(g_plus, g_minus, beta, params, g_trapped=trapped, settings=quad)
        return kind, pot, {"amplitude": beta}

    if kind == "shock":
        named = {
            key: _marginal_from(margs.get(key), f"wave.marginals.{key}")
            for key in ("left_plus", "right_plus", "left_minus", "right_minus")
        }
        phi_l = _positive_number(wave, "phi_l")
        pot = SagdeevPotential.shock(named["left_plus"], named["right_minus"],
                                     phi_l, params, settings=quad)
        return kind, pot, {"amplitude": phi_l, "marginals": named}

    raise ValueError(f'wave.kind must be "solitary", "shock", or "train", got {kind!r}')


def _build_profile(kind: str, pot, quad: QuadratureSettings, build: dict):
    if kind == "solitary":
        return build_solitary(pot, quad, **build)
    if kind == "shock":
        # shock kinks sit mid-profile; the masked field check needs a
        # finer grid than the other kinds before any nodes survive
        build = {"points_per_branch": 4001, **build}
        return build_shock(pot, quad, **build)
    # periodic profiles have no asymptotic tail to truncate
    return build_train(pot, quad, **{k: v for k, v in build.items() if k != "eps_tail"})


# ---------------------------------------------------------------------------
# output plumbing


def _write_atomic(path: str, emit) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            emit(fh)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _write_json(path: str, payload) -> None:
    _write_atomic(path, lambda fh: fh.write(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"))


def _wave_outputs(out_dir: str, profile) -> dict:
    """Write profile and phase CSVs; return residual and round-trip blocks.

    The round-trip block re-ingests the profile CSV as tabulated data and
    re-runs the verifiers that only need the potential, recording both
    sets of residuals side by side.
    """
    bundle = marginal_bundle(profile.pot)
    residuals = {
        "poisson": float(verify_poisson(profile, bundle)),
        "energy": float(fd_energy_residual(profile)),
        "neutrality": float(verify_neutrality(profile)),
    }
    phase = {}
    # thin the phase table to plotting resolution; characteristic values
    # are exact pushforwards, so the verifier does not need a dense grid
    stride = max(1, (profile.X_grid.size - 1) // 200)
    for species in ("plus", "minus"):
        dist = reconstruct(profile, bundle, species, n_xi=401, x_stride=stride)
        residuals[f"characteristics_{species}"] = float(
            verify_characteristics(dist, profile))
        residuals[f"density_recovery_{species}"] = float(
            density_recovery_error(profile, bundle, species))
        _write_atomic(os.path.join(out_dir, f"phase_{species}.csv"),
                      lambda fh, d=dist: phase_to_csv(d, fh))
        phase[species] = phase_summary_json(dist)
    residuals["max"] = max(residuals.values())

    csv_path = os.path.join(out_dir, "profile.csv")
    _write_atomic(csv_path, lambda fh: profile_to_csv(profile, fh))

    original = {
        "poisson": residuals["poisson"],
        "energy": residuals["energy"],
        "neutrality": residuals["neutrality"],
    }
    reloaded = load_profile_csv(csv_path)
    redone = {
        "poisson": float(verify_poisson(reloaded, bundle)),
        "energy": float(fd_energy_residual(reloaded)),
        "neutrality": float(verify_neutrality(reloaded)),
    }
    roundtrip = {
        "original": original,
        "reloaded": redone,
        "within_10x": all(redone[k] <= 10.0 * original[k] + 1e-12 for k in original),
    }
    return {
        "residuals": residuals,
        "phase": phase,
        "roundtrip": roundtrip,
        "files": ["profile.csv", "phase_plus.csv", "phase_minus.csv", "report.json"],
    }


# ---------------------------------------------------------------------------
# subcommands


def _cmd_check(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(cfg)
    quad, _ = _settings_from(cfg)
    kind, pot, info = _assemble(cfg, params, quad)
    report = check_exists(pot)
    payload = report.to_dict()
    ok = report.exists
    if kind == "shock":
        m = info["marginals"]
        matched = check_shock_matching(m["left_plus"], m["right_plus"],
                                       m["left_minus"], m["right_minus"],
                                       params, info["amplitude"])
        speed = compute_alpha(m["left_plus"], m["right_plus"])
        payload["matching"] = {
            "end_states": bool(matched),
            "speed_equation": speed if isinstance(speed, str) else float(speed),
        }
        ok = ok and matched
    elif kind == "solitary" and report.exists:
        payload["uniqueness"] = classify_uniqueness(pot).to_dict()
    print(json.dumps(payload, indent=2, sort_keys=True))
    return OK if ok else CONDITION_FAILURE


def _cmd_solve(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(cfg)
    quad, build = _settings_from(cfg)
    kind, pot, info = _assemble(cfg, params, quad)
    report = check_exists(pot)
    if not report.exists:
        raise ConditionError(report)
    profile = _build_profile(kind, pot, quad, build)
    os.makedirs(args.out, exist_ok=True)
    payload = {
        "kind": kind,
        "amplitude": profile.amplitude,
        "period": profile.period,
        "half_width": profile.L,
        "conditions": report.to_dict(),
    }
    payload.update(_wave_outputs(args.out, profile))
    _write_json(os.path.join(args.out, "report.json"), payload)
    print(json.dumps({"out": args.out, "kind": kind,
                      "amplitude": profile.amplitude,
                      "residual_max": payload["residuals"]["max"]},
                     sort_keys=True))
    return OK


def _cmd_example(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.which == "s2.5":
        setup, _, _, report = solitary_case()
        profile = build_solitary(setup.pot)
    elif args.which == "s3.3":
        setup, report = shock_case(args.phi_l)
        profile = build_shock(setup.pot, points_per_branch=4001)
    else:
        _, profile, report = train_case(beta=args.beta, tau=args.tau)
    payload = dict(report)
    payload.update(_wave_outputs(args.out, profile))
    _write_json(os.path.join(args.out, "report.json"), payload)
    print(json.dumps({"out": args.out, "kind": payload["kind"],
                      "amplitude": payload["amplitude"]}, sort_keys=True))
    return OK


def _family_members(args, cfg: dict, params: PlasmaParams,
                    quad: QuadratureSettings) -> list:
    fam = cfg.get("family") or {}
    if not isinstance(fam, dict):
        raise ValueError('"family" must be an object')

    if args.kind == "boltzmann-match":
        gamma = args.gamma if args.gamma is not None else fam.get("gamma")
        if gamma is None:
            raise ValueError(
                "boltzmann-match needs a target period (family.gamma or --gamma)")
        count = args.count if args.count is not None else fam.get("count", 3)
        return boltzmann_train_match(params, float(gamma), int(count), settings=quad)

    if args.kind == "train-box":
        # the box constructor makes its own marginals from the crest value
        wave = cfg.get("wave")
        if not isinstance(wave, dict) or wave.get("kind") != "train":
            raise ValueError('train-box needs wave.kind "train"')
        beta = _positive_number(wave, "beta")
        taus = args.tau or fam.get("taus") or [1.0]
        members = [train_box_family(params, beta, float(t), settings=quad)
                   for t in taus]
        gamma = args.gamma if args.gamma is not None else fam.get("gamma")
        if gamma is not None:
            members = [rescale_to_period(m, float(gamma), settings=quad)
                       for m in members]
        return members

    kind, pot, info = _assemble(cfg, params, quad)

    if kind != "solitary":
        raise ValueError(f'{args.kind} needs wave.kind "solitary"')

    if args.kind == "perturb":
        if pot.g_trapped is None:
            raise ValueError("perturb needs a wave with a trapped population")
        # reshaping fractions must stay below one half
        taus = args.tau or fam.get("taus") or [0.1, 0.2, 0.3]
        return [solitary_perturb(pot.g_trapped, info["amplitude"], params,
                                 float(t), settings=quad)
                for t in taus]

    # the injection constructors work on the trapped-free potential
    report = check_exists(pot)
    if not report.exists:
        raise ConditionError(report)
    verdict = classify_uniqueness(pot)
    wanted = "nonunique_b" if args.kind == "inject-b" else "nonunique_c"
    if verdict.classification != wanted:
        raise ValueError(
            f"wave classifies as {verdict.classification}; {args.kind} needs {wanted}")
    beta_sharp = float(fam.get("beta_sharp", verdict.beta_sharp))
    beta_star = float(fam.get("beta_star", verdict.beta_star))
    count = args.count if args.count is not None else fam.get("count", 1)
    if not (isinstance(count, int) and count >= 1):
        raise ValueError("count must be a positive integer")
    margin0 = float(fam.get("beta", info["amplitude"]))
    maker = solitary_inject_case_b if args.kind == "inject-b" else solitary_inject_case_c
    members = []
    for i in range(count):
        # thirds keep successive pull margins off the halving grid the
        # constructor itself retreats along, so amplitudes stay distinct
        members.append(maker(pot, margin0 / 3.0 ** i, beta_sharp, beta_star,
                             params, settings=quad))
    return members


def _cmd_family(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(cfg)
    quad, _ = _settings_from(cfg)
    members = _family_members(args, cfg, params, quad)
    payload = {"schema": 1, "kind": args.kind,
               "members": [m.to_dict() for m in members]}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "members.json"), payload)
        print(json.dumps({"kind": args.kind, "count": len(members),
                          "amplitudes": [m.amplitude for m in members],
                          "out": args.out}, sort_keys=True))
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return OK


# ---------------------------------------------------------------------------
# brute-force oracle

# the cutoff and band kernels flatten under s = sqrt(u^2 - c): the integral
# becomes a plain integral of g(alpha + sqrt(s^2 + c)) ds, so a midpoint sum
# converges normally; the excision pad drops only an O(pad) sliver


def _midpoint(f, a: float, b: float, n: int, chunk: int = 2_000_000) -> float:
    if b <= a:
        return 0.0
    h = (b - a) / n
    total = 0.0
    done = 0
    while done < n:
        k = min(chunk, n - done)
        idx = np.arange(done, done + k, dtype=np.float64)
        total += float(np.sum(f(a + (idx + 0.5) * h)))
        done += k
    return total * h


def _brute_free(g: Marginal, alpha: float, c: float, n: int) -> float:
    lo, hi = g.quad_support()
    return _midpoint(
        lambda u: g(alpha + u) * np.abs(u) / np.sqrt(u * u + c),
        lo - alpha, hi - alpha, n)


def _brute_cutoff(g: Marginal, alpha: float, c: float, n: int,
                  pad: float = 1e-9) -> float:
    lo, hi = g.quad_support()
    root = math.sqrt(max(c, 0.0))
    total = 0.0
    for sign in (-1.0, 1.0):
        # in s, the side [root, edge] becomes [0, sqrt(edge^2 - c)]
        edge = (hi - alpha) if sign > 0 else (alpha - lo)
        if edge <= root:
            continue
        s_max = math.sqrt(edge * edge - c)
        total += _midpoint(
            lambda s: g(alpha + sign * np.sqrt(s * s + c)), pad, s_max, n)
    return total


def _brute_band(G, params: PlasmaParams, beta: float, phi: float, n: int,
                pad: float = 1e-9) -> float:
    lo = 2.0 * params.q_plus * (beta - phi)
    hi = 2.0 * params.q_plus * beta
    if hi <= lo:
        return 0.0
    s_max = math.sqrt(hi - lo)
    # both velocity signs of a bound orbit carry the same marginal value
    return 2.0 * _midpoint(
        lambda s: G(params.alpha + np.sqrt(s * s + lo)), pad, s_max, n)


def _cmd_oracle(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(cfg)
    quad, _ = _settings_from(cfg)
    kind, pot, info = _assemble(cfg, params, quad)
    amp = info["amplitude"]
    phis = [amp * (j + 0.5) / args.samples for j in range(args.samples)]
    n = args.points

    pairs = {}
    if kind == "shock":
        m = info["marginals"]
        pairs["ion_density"] = (
            lambda phi: rho_shock_plus(m["left_plus"], params, amp, phi, quad),
            lambda phi: _brute_cutoff(m["left_plus"], params.alpha,
                                      2.0 * params.q_plus * (amp - phi), n))
        pairs["electron_density"] = (
            lambda phi: rho_minus(m["right_minus"], params, phi, quad),
            lambda phi: _brute_cutoff(m["right_minus"], params.alpha,
                                      2.0 * params.q_minus * phi, n))
    else:
        pairs["free_ion_density"] = (
            lambda phi: rho_plus_inf(pot.g_plus, params, phi, quad),
            lambda phi: _brute_free(pot.g_plus, params.alpha,
                                    2.0 * params.q_plus * phi, n))
        pairs["electron_density"] = (
            lambda phi: rho_minus(pot.g_minus, params, phi, quad),
            lambda phi: _brute_cutoff(pot.g_minus, params.alpha,
                                      2.0 * params.q_minus * phi, n))
        if pot.g_trapped is not None:
            pairs["trapped_ion_density"] = (
                lambda phi: rho_plus_trapped(pot.g_trapped, params, amp, phi, quad),
                lambda phi: _brute_band(pot.g_trapped, params, amp, phi, n))

    ops = {}
    all_ok = True
    for name, (fast, brute) in pairs.items():
        worst = 0.0
        for phi in phis:
            got = float(fast(phi))
            want = brute(phi)
            worst = max(worst, abs(got - want) / max(abs(want), 1e-9))
        ops[name] = {"max_rel_err": worst, "ok": worst <= args.tol}
        all_ok = all_ok and ops[name]["ok"]
    print(json.dumps({"kind": kind, "points": n, "phi_samples": phis,
                      "tol": args.tol, "ops": ops, "ok": all_ok},
                     indent=2, sort_keys=True))
    return OK if all_ok else NUMERICAL_FAILURE


# ---------------------------------------------------------------------------
# dispatch


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vpwaves",
        description="Traveling-wave construction and verification for "
                    "two-species kinetic plasmas.",
        epilog=_CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate the existence conditions, "
                                     "print the report JSON")
    p.add_argument("config")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("solve", help="build the wave; write profile.csv, "
                                     "phase CSVs, and report.json")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("family", help="emit companion waves around the "
                                      "configured base wave")
    p.add_argument("config")
    p.add_argument("--kind", required=True,
                   choices=["perturb", "inject-b", "inject-c", "train-box",
                            "boltzmann-match"])
    p.add_argument("--out")
    p.add_argument("--tau", type=float, action="append",
                   help="repeatable; overrides family.taus")
    p.add_argument("--gamma", type=float, help="target period")
    p.add_argument("--count", type=int, help="number of members")
    p.set_defaults(func=_cmd_family)

    p = sub.add_parser("example", help="run a built-in reference case")
    p.add_argument("which", choices=["s2.5", "s3.3", "train"])
    p.add_argument("--out", required=True)
    p.add_argument("--phi-l", dest="phi_l", type=float, default=1.0,
                   help="shock end state for s3.3 (default 1.0)")
    p.add_argument("--beta", type=float, default=1.0,
                   help="train crest value (default 1.0)")
    p.add_argument("--tau", type=float, default=1.0,
                   help="train box half-width energy (default 1.0)")
    p.set_defaults(func=_cmd_example)

    p = sub.add_parser("oracle", help="compare density operators against "
                                      "direct midpoint sums")
    p.add_argument("config")
    p.add_argument("--points", type=int, default=4_000_000,
                   help="midpoint sample count (default 4e6)")
    p.add_argument("--samples", type=int, default=8,
                   help="potential values tested per operator (default 8)")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="relative tolerance (default 1e-6)")
    p.set_defaults(func=_cmd_oracle)

    return parser


def run(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return OK if code == 0 else INPUT_ERROR
    try:
        return args.func(args)
    except ConditionError as exc:
        print(json.dumps(exc.report.to_dict(), indent=2, sort_keys=True),
              file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return CONDITION_FAILURE
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_FAILURE


def main() -> None:
    sys.exit(run(sys.argv[1:]))
