"""Command-line front end: recover, bounds, oracle, sweep, selftest, gen.

Exit codes: 0 success, 2 configuration/validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Optional

import numpy as np

from .ensembles import (GAUSSIAN, UNIT_SPHERE, NonnegUniform, ProblemInstance,
                        RelativeBounded, SymmetricUniform, gen_instance,
                        make_approx_at_angle, read_instance, write_instance)
from .experiments import (AT_ANGLE, SweepConfig, default_m_grid, run_sweep, selftest)
from .initializers import (RANDOM, SPECTRAL, TRUNCATED_SPECTRAL, InitializerConfig,
                           random_init, reserve_prefix, spectral_init)
from .linalg import COMPLEX, REAL
from .oracles import coverage_mc, regions_brute_force, uniqueness_check
from .solvers import (SolverConfig, gerchberg_saxton, rre, signal_from_dual,
                      solve_basis_pursuit, solve_phasemax)
from . import theory


def _pairs(entries: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in entries]


def _write_json(path: Optional[str], payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _parse_noise(text: Optional[str]):
    if text is None or text == "none":
        return None
    try:
        kind, level_text = text.split(":", 1)
        level = float(level_text)
    except ValueError as exc:
        raise ValueError(f"noise must look like kind:level, got {text!r}") from exc
    if kind == "nonneg":
        return NonnegUniform(level)
    if kind == "symmetric":
        return SymmetricUniform(level)
    if kind == "relative":
        return RelativeBounded(level)
    raise ValueError(f"unknown noise kind {kind!r} (nonneg, symmetric, relative)")


def _parse_field(text: str) -> str:
    if text not in (REAL, COMPLEX):
        raise ValueError(f"field must be 'real' or 'complex', got {text!r}")
    return text


def _parse_m_grid(text: str) -> tuple[int, ...]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("m-grid must be lo:hi:step or a comma list")
        lo, hi, step = (int(p) for p in parts)
        if step < 1 or hi < lo:
            raise ValueError("m-grid must satisfy lo <= hi and step >= 1")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(p) for p in text.split(","))


def _anchor_for(instance, kind: str, init_m: Optional[int], seed: int):
    """Build an anchor for the recover command; returns (instance, ensemble)
    where the ensemble excludes any reserved prefix."""
    ensemble = instance.ensemble
    if kind == RANDOM:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x0A46]))
        return instance.with_xhat(random_init(ensemble.n, ensemble.field, rng))
    cfg = InitializerConfig(kind=kind)
    if init_m:
        head, tail = reserve_prefix(ensemble, init_m)
        anchor = spectral_init(head, cfg).x
        kept = ProblemInstance(ensemble=tail, xhat=instance.xhat,
                               truth=instance.truth, alpha=instance.alpha)
        return kept.with_xhat(anchor)
    return instance.with_xhat(spectral_init(ensemble, cfg).x)


def _cmd_recover(args) -> int:
    instance = read_instance(args.instance)
    if args.init is not None:
        instance = _anchor_for(instance, args.init, args.init_m, args.seed)
    cfg = SolverConfig(max_iters=args.max_iters, tol_objective=args.tol)
    t0 = time.perf_counter()
    payload: dict = {"method": args.method}
    if args.method == "phasemax":
        res = solve_phasemax(instance, cfg)
        payload.update({
            "x_star": _pairs(res.x_star.entries),
            "objective": res.objective,
            "iterations": res.iterations,
            "converged": res.converged,
            "residuals": {"max_constraint_violation": res.max_constraint_violation},
            "rre": res.rre,
            "success": res.success,
        })
    elif args.method == "bp":
        dual = solve_basis_pursuit(instance.ensemble, instance.xhat, cfg)
        x = signal_from_dual(instance.ensemble, dual.z)
        err = success = None
        if instance.truth is not None:
            err = rre(x, instance.truth, phase_align=False)
            success = bool(err < 1e-5)
        payload.update({
            "x_star": _pairs(x.entries),
            "z": _pairs(dual.z),
            "objective": dual.l1_norm,
            "iterations": dual.iterations,
            "converged": dual.converged,
            "residuals": {"equality_residual": dual.residual, "duality_gap": dual.gap},
            "rre": err,
            "success": success,
        })
    else:
        res = gerchberg_saxton(instance.ensemble, instance.xhat, cfg,
                               truth=instance.truth)
        payload.update({
            "x_star": _pairs(res.x_star.entries),
            "objective": res.objective,
            "iterations": res.iterations,
            "converged": res.converged,
            "residuals": {"max_magnitude_misfit": res.max_constraint_violation},
            "rre": res.rre,
            "success": res.success,
        })
    payload["wall_ms"] = (time.perf_counter() - t0) * 1000.0
    _write_json(args.out, payload)
    return 0


def _bound_payload(bound: theory.TheoryBound) -> dict:
    return {"value": bound.value, "valid": bound.valid, "params": bound.params,
            "formula_id": bound.formula_id}


def _cmd_bounds(args) -> int:
    fid = args.formula
    if fid == "thm1":
        bound = theory.phasemax_success_bound(args.m, args.n, args.alpha, COMPLEX)
        payload = _bound_payload(bound)
    elif fid == "thm4":
        bound = theory.phasemax_success_bound(args.m, args.n, args.alpha, REAL)
        payload = _bound_payload(bound)
    elif fid == "lem3":
        payload = _bound_payload(theory.neighbor_cover_bound(args.m, args.n, args.alpha))
    elif fid == "thm5":
        if args.m_d is None or args.ell_d is None:
            raise ValueError("thm5 needs --m-d and --ell-d")
        payload = _bound_payload(theory.nonuniform_bound(args.m_d, args.n, args.alpha,
                                                         args.ell_d))
    elif fid == "lem4":
        if args.phi is None:
            raise ValueError("lem4 needs --phi (radians)")
        bound, trace = theory.small_caps_cover_bound(args.m, args.n, args.phi)
        payload = _bound_payload(bound)
        payload["trace"] = vars(trace)
    else:  # noise
        if args.instance is None or args.epsilon is None:
            raise ValueError("noise needs --instance and --epsilon")
        instance = read_instance(args.instance)
        ens = instance.ensemble
        bh_sq = ens.b**2 - ens.eta
        if np.any(bh_sq <= 0):
            raise ValueError("instance does not expose positive clean magnitudes")
        angle = args.angle
        if angle is None:
            if instance.truth is None:
                raise ValueError("no truth in instance; pass --angle explicitly")
            from .linalg import angle_between
            angle = angle_between(instance.truth, instance.xhat)
        nb = theory.noise_error_bound(ens.m, ens.n, angle, np.sqrt(bh_sq), ens.eta,
                                      args.epsilon)
        payload = _bound_payload(nb.probability)
        payload.update({"error_bound": nb.error_bound, "s": nb.s, "r": nb.r,
                        "theta": nb.theta, "phi": nb.phi, "trace": vars(nb.trace)})
    _write_json(args.out, payload)
    return 0


def _cmd_oracle(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.oracle_cmd == "regions":
        brute = regions_brute_force(args.n, args.k, rng, samples=args.samples)
        payload = {"n": args.n, "k": args.k, "samples": args.samples,
                   "brute": brute, "formula": theory.regions_count(args.n, args.k)}
    elif args.oracle_cmd == "cover":
        theta = math.radians(args.theta_deg)
        freq = coverage_mc(args.n, args.m, theta, args.trials, rng)
        payload = {"n": args.n, "m": args.m, "theta_deg": args.theta_deg,
                   "trials": args.trials, "empirical": freq}
        if abs(theta - math.pi / 2) < 1e-12:
            payload["formula"] = theory.halfsphere_cover_prob(args.m, args.n)
    else:  # unique
        instance = read_instance(args.instance)
        if instance.truth is None:
            raise ValueError("uniqueness check needs an instance with a truth signal")
        report = uniqueness_check(instance.ensemble, instance.truth, instance.xhat,
                                  directions=args.directions)
        payload = {
            "nontrivial": report.nontrivial,
            "objective_value": report.objective_value,
            "generic_directions_tried": report.generic_directions_tried,
            "witness": None if report.witness is None else _pairs(report.witness.entries),
        }
    _write_json(getattr(args, "out", None), payload)
    return 0


def _cmd_sweep(args) -> int:
    base: dict = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            base = json.load(fh)
    n = args.n if args.n is not None else int(base.get("n", 100))
    field = _parse_field(args.field if args.field is not None else base.get("field", COMPLEX))
    if args.beta_deg is not None:
        beta_deg = [float(x) for x in args.beta_deg.split(",")]
    else:
        beta_deg = [float(x) for x in base.get("beta_deg", [25.0, 36.0, 45.0])]
    if args.m_grid is not None:
        m_grid = _parse_m_grid(args.m_grid)
    elif "m_grid" in base:
        raw = base["m_grid"]
        m_grid = _parse_m_grid(raw) if isinstance(raw, str) else tuple(int(v) for v in raw)
    else:
        m_grid = default_m_grid(n)
    noise = _parse_noise(args.noise if args.noise is not None else base.get("noise"))
    cfg = SweepConfig(
        n=n,
        field=field,
        beta_list=tuple(math.radians(d) for d in beta_deg),
        m_grid=m_grid,
        trials_per_cell=args.trials if args.trials is not None else int(base.get("trials", 100)),
        method=args.method if args.method is not None else base.get("method", "phasemax"),
        anchor=args.init if args.init is not None else base.get("init", AT_ANGLE),
        init_m=args.init_m if args.init_m is not None else base.get("init_m"),
        noise_model=noise,
        seed=args.seed if args.seed is not None else int(base.get("seed", 0)),
        workers=args.workers if args.workers is not None else int(base.get("workers", 1)),
        ensemble_kind=args.kind if args.kind is not None else base.get("kind", UNIT_SPHERE),
    )
    table = run_sweep(cfg, out_csv=args.out)
    if args.out is None:
        print(table.to_csv(), end="")
    return 0


def _cmd_selftest(args) -> int:
    report = selftest()
    if args.out is not None:
        _write_json(args.out, report)
    return 0 if report["ok"] else 1


def _cmd_gen(args) -> int:
    noise = _parse_noise(args.noise)
    kind = GAUSSIAN if args.kind == "gaussian" else UNIT_SPHERE
    instance = gen_instance(args.n, args.m, field=_parse_field(args.field), kind=kind,
                            noise=noise, seed=args.seed, truth_norm=args.truth_norm)
    if args.beta_deg is not None:
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, 0x0A46]))
        xhat = make_approx_at_angle(instance.truth, math.radians(args.beta_deg), rng)
        instance = instance.with_xhat(xhat)
    write_instance(instance, args.out)
    print(f"wrote {args.out} (n={args.n}, m={args.m}, field={args.field})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasemax",
        description="Convex phase retrieval: solvers, bounds, geometric oracles, sweeps.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_rec = sub.add_parser("recover", help="solve one instance file")
    p_rec.add_argument("--instance", required=True)
    p_rec.add_argument("--method", choices=("phasemax", "bp", "gs"), default="phasemax")
    p_rec.add_argument("--init", choices=(RANDOM, SPECTRAL, TRUNCATED_SPECTRAL),
                       default=None, help="replace the stored anchor")
    p_rec.add_argument("--init-m", type=int, default=None,
                       help="reserve this many leading measurements for the anchor")
    p_rec.add_argument("--seed", type=int, default=0)
    p_rec.add_argument("--max-iters", type=int, default=50000)
    p_rec.add_argument("--tol", type=float, default=1e-9)
    p_rec.add_argument("--out", default=None)
    p_rec.set_defaults(fn=_cmd_recover)

    p_b = sub.add_parser("bounds", help="evaluate a closed-form bound")
    p_b.add_argument("--formula", required=True,
                     choices=("thm1", "thm4", "thm5", "lem3", "lem4", "noise"))
    p_b.add_argument("--m", type=float, default=0.0)
    p_b.add_argument("--n", type=float, default=0.0)
    p_b.add_argument("--alpha", type=float, default=0.0)
    p_b.add_argument("--phi", type=float, default=None, help="cap half-angle, radians")
    p_b.add_argument("--m-d", dest="m_d", type=float, default=None)
    p_b.add_argument("--ell-d", dest="ell_d", type=float, default=None)
    p_b.add_argument("--instance", default=None)
    p_b.add_argument("--epsilon", type=float, default=None)
    p_b.add_argument("--angle", type=float, default=None,
                     help="angle(truth, anchor) in radians for the noise formula")
    p_b.add_argument("--out", default=None)
    p_b.set_defaults(fn=_cmd_bounds)

    p_o = sub.add_parser("oracle", help="independent geometric checks")
    osub = p_o.add_subparsers(dest="oracle_cmd", required=True)
    p_or = osub.add_parser("regions", help="brute-force region count")
    p_or.add_argument("--n", type=int, required=True)
    p_or.add_argument("--k", type=int, required=True)
    p_or.add_argument("--samples", type=int, default=1_000_000)
    p_or.add_argument("--seed", type=int, default=0)
    p_or.add_argument("--out", default=None)
    p_oc = osub.add_parser("cover", help="Monte Carlo cap covering")
    p_oc.add_argument("--n", type=int, required=True)
    p_oc.add_argument("--m", type=int, required=True)
    p_oc.add_argument("--trials", type=int, default=100_000)
    p_oc.add_argument("--theta-deg", type=float, default=90.0)
    p_oc.add_argument("--seed", type=int, default=0)
    p_oc.add_argument("--out", default=None)
    p_ou = osub.add_parser("unique", help="cone-based uniqueness certificate")
    p_ou.add_argument("--instance", required=True)
    p_ou.add_argument("--directions", type=int, default=4)
    p_ou.add_argument("--seed", type=int, default=0)
    p_ou.add_argument("--out", default=None)
    p_o.set_defaults(fn=_cmd_oracle)

    p_s = sub.add_parser("sweep", help="Monte Carlo phase-transition sweep")
    p_s.add_argument("--config", default=None, help="JSON config; flags override")
    p_s.add_argument("--n", type=int, default=None)
    p_s.add_argument("--field", default=None)
    p_s.add_argument("--beta-deg", default=None, help="comma list of angles in degrees")
    p_s.add_argument("--m-grid", default=None, help="lo:hi:step or comma list")
    p_s.add_argument("--trials", type=int, default=None)
    p_s.add_argument("--method", choices=("phasemax", "bp", "gs"), default=None)
    p_s.add_argument("--init", choices=(AT_ANGLE, RANDOM, SPECTRAL, TRUNCATED_SPECTRAL),
                     default=None)
    p_s.add_argument("--init-m", type=int, default=None)
    p_s.add_argument("--noise", default=None, help="kind:level (nonneg, symmetric, relative)")
    p_s.add_argument("--kind", choices=(UNIT_SPHERE, GAUSSIAN), default=None)
    p_s.add_argument("--seed", type=int, default=None)
    p_s.add_argument("--workers", type=int, default=None)
    p_s.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    p_s.set_defaults(fn=_cmd_sweep)

    p_t = sub.add_parser("selftest", help="reduced-scale invariant suite")
    p_t.add_argument("--out", default=None, help="write the JSON report here")
    p_t.set_defaults(fn=_cmd_selftest)

    p_g = sub.add_parser("gen", help="generate an instance file")
    p_g.add_argument("--n", type=int, required=True)
    p_g.add_argument("--m", type=int, required=True)
    p_g.add_argument("--field", default=COMPLEX)
    p_g.add_argument("--kind", choices=("sphere", "gaussian"), default="sphere")
    p_g.add_argument("--noise", default=None)
    p_g.add_argument("--seed", type=int, default=0)
    p_g.add_argument("--beta-deg", type=float, default=None,
                     help="draw the anchor at this angle from the truth")
    p_g.add_argument("--truth-norm", type=float, default=1.0)
    p_g.add_argument("--out", required=True)
    p_g.set_defaults(fn=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
