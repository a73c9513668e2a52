"""Monte Carlo sweep harness: phase-transition curves vs the closed-form
bound, Wilson intervals, CSV emission, and a reduced-scale selftest."""

from __future__ import annotations

import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional

import numpy as np

from .ensembles import UNIT_SPHERE, ProblemInstance, gen_instance, make_approx_at_angle
from .initializers import (RANDOM, SPECTRAL, TRUNCATED_SPECTRAL, InitializerConfig,
                           random_init, reserve_prefix, spectral_init)
from .linalg import COMPLEX, REAL, Field
from .oracles import caps_cover_sphere, regions_brute_force, uniqueness_check
from .solvers import (SolverConfig, gerchberg_saxton, recover_phases_from_dual, rre,
                      signal_from_phases, solve_basis_pursuit, solve_phasemax)
from . import theory

AT_ANGLE = "at-angle"
_ANCHORS = (AT_ANGLE, RANDOM, SPECTRAL, TRUNCATED_SPECTRAL)
_METHODS = ("phasemax", "bp", "gs")

_SEED_MASK = (1 << 63) - 1
_ANCHOR_KEY = 0x0A46


def default_m_grid(n: int) -> tuple[int, ...]:
    """4n to 14n in steps of n/2 (the flagship transition window)."""
    step = max(1, n // 2)
    return tuple(range(4 * n, 14 * n + 1, step))


@dataclass(frozen=True)
class SweepConfig:
    n: int = 100
    field: Field = COMPLEX
    beta_list: tuple[float, ...] = tuple(math.radians(d) for d in (25.0, 36.0, 45.0))
    m_grid: tuple[int, ...] = ()
    trials_per_cell: int = 100
    method: str = "phasemax"
    anchor: str = AT_ANGLE
    init: InitializerConfig = dc_field(default_factory=InitializerConfig)
    init_m: Optional[int] = None  # reserve a measurement prefix for the anchor
    noise_model: object = None
    seed: int = 0
    workers: int = 1
    ensemble_kind: str = UNIT_SPHERE
    solver: Optional[SolverConfig] = None  # None: sweep-scale tolerances

    def __post_init__(self):
        if not self.m_grid:
            object.__setattr__(self, "m_grid", default_m_grid(self.n))
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        object.__setattr__(self, "beta_list", tuple(float(b) for b in self.beta_list))
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be at least 1")
        if not self.beta_list:
            raise ValueError("beta_list must be nonempty")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if self.anchor not in _ANCHORS:
            raise ValueError(f"anchor must be one of {_ANCHORS}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class TrialRecord:
    cell: tuple[float, int]  # (beta radians, m)
    seed: int
    rre: float
    success: bool
    iterations: int
    wall_ms: float
    converged: bool


@dataclass(frozen=True)
class SweepRow:
    beta_deg: float
    m: int
    trials: int
    successes: int
    rate: float
    wilson_lo: float
    wilson_hi: float
    theory_bound: float


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]

    CSV_HEADER = "beta_deg,m,trials,successes,rate,wilson_lo,wilson_hi,theory_bound"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(
                f"{r.beta_deg:.17g},{r.m},{r.trials},{r.successes},"
                f"{r.rate:.17g},{r.wilson_lo:.17g},{r.wilson_hi:.17g},{r.theory_bound:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SweepTable":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].strip() != cls.CSV_HEADER:
            raise ValueError("unrecognized table header")
        rows = []
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 8:
                raise ValueError(f"malformed row: {ln!r}")
            rows.append(SweepRow(
                beta_deg=float(parts[0]), m=int(parts[1]), trials=int(parts[2]),
                successes=int(parts[3]), rate=float(parts[4]), wilson_lo=float(parts[5]),
                wilson_hi=float(parts[6]), theory_bound=float(parts[7])))
        return cls(rows=tuple(rows))


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial rate."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def alpha_of_beta(beta: float) -> float:
    """Anchor quality alpha = 1 - (2/pi) * beta."""
    return 1.0 - 2.0 * beta / math.pi


def _sweep_solver_cfg(cfg: SweepConfig) -> SolverConfig:
    """Per-method solver settings when the config leaves them unset. Sweep
    tolerances sit two orders below the success threshold in signal error,
    which keeps verdicts identical to tighter runs at a fraction of the cost."""
    if cfg.solver is not None:
        return cfg.solver
    if cfg.method == "gs":
        return SolverConfig(max_iters=600, tol_objective=1e-9)
    return SolverConfig(tol_feasibility=None, tol_objective=1e-6)


def _child_seed(seed: int, beta_idx: int, m_idx: int, trial: int) -> int:
    ss = np.random.SeedSequence([seed & _SEED_MASK, beta_idx, m_idx, trial])
    return int(ss.generate_state(1, np.uint64)[0]) & _SEED_MASK


def _anchor_instance(cfg: SweepConfig, instance: ProblemInstance, beta: float,
                     child_seed: int) -> ProblemInstance:
    """Replace the generated anchor according to the anchor policy."""
    if cfg.anchor == AT_ANGLE:
        rng = np.random.default_rng(np.random.SeedSequence([child_seed, _ANCHOR_KEY]))
        xhat = make_approx_at_angle(instance.truth, beta, rng)
        return instance.with_xhat(xhat)
    if cfg.anchor == RANDOM:
        rng = np.random.default_rng(np.random.SeedSequence([child_seed, _ANCHOR_KEY]))
        return instance.with_xhat(random_init(cfg.n, cfg.field, rng))
    init = cfg.init
    if cfg.anchor == SPECTRAL and init.kind != SPECTRAL:
        init = InitializerConfig(kind=SPECTRAL, power_iters=init.power_iters,
                                 power_tol=init.power_tol,
                                 truncation_factor=init.truncation_factor,
                                 scale_to=init.scale_to)
    if cfg.anchor == TRUNCATED_SPECTRAL and init.kind != TRUNCATED_SPECTRAL:
        init = InitializerConfig(kind=TRUNCATED_SPECTRAL, power_iters=init.power_iters,
                                 power_tol=init.power_tol,
                                 truncation_factor=init.truncation_factor,
                                 scale_to=init.scale_to)
    if cfg.init_m:
        head, tail = reserve_prefix(instance.ensemble, cfg.init_m)
        anchor = spectral_init(head, init).x
        kept = ProblemInstance(ensemble=tail, xhat=instance.xhat, truth=instance.truth,
                               alpha=instance.alpha)
        return kept.with_xhat(anchor)
    anchor = spectral_init(instance.ensemble, init).x
    return instance.with_xhat(anchor)


def run_trial(cfg: SweepConfig, cell: tuple[float, int], trial_index: int) -> TrialRecord:
    """One seeded draw-and-solve at a (beta, m) cell. The child seed is a
    pure function of (seed, beta index, m index, trial index), so records are
    identical regardless of scheduling."""
    beta, m = cell
    beta_idx = cfg.beta_list.index(beta)
    m_idx = cfg.m_grid.index(m)
    child = _child_seed(cfg.seed, beta_idx, m_idx, trial_index)
    t0 = time.perf_counter()
    instance = gen_instance(cfg.n, m, field=cfg.field, kind=cfg.ensemble_kind,
                            noise=cfg.noise_model, seed=child)
    instance = _anchor_instance(cfg, instance, beta, child)
    scfg = _sweep_solver_cfg(cfg)
    if cfg.method == "phasemax":
        res = solve_phasemax(instance, scfg)
        err, iterations, converged = res.rre, res.iterations, res.converged
    elif cfg.method == "bp":
        dual = solve_basis_pursuit(instance.ensemble, instance.xhat, scfg)
        y = recover_phases_from_dual(dual.z, instance.ensemble.b)
        x = signal_from_phases(instance.ensemble, y)
        err = rre(x, instance.truth, phase_align=False)
        iterations, converged = dual.iterations, dual.converged
    else:
        res = gerchberg_saxton(instance.ensemble, instance.xhat, scfg,
                               truth=instance.truth)
        err, iterations, converged = res.rre, res.iterations, res.converged
    wall_ms = (time.perf_counter() - t0) * 1000.0
    return TrialRecord(cell=(beta, m), seed=child, rre=float(err),
                       success=bool(err < 1e-5), iterations=iterations,
                       wall_ms=wall_ms, converged=converged)


def _trial_task(args: tuple) -> TrialRecord:
    cfg, cell, trial_index = args
    return run_trial(cfg, cell, trial_index)


def run_sweep(cfg: SweepConfig, out_csv: Optional[str] = None) -> SweepTable:
    """Run every (beta, m, trial) task, aggregate per cell, and attach the
    closed-form bound at alpha(beta). Aggregation is a fold keyed by cell, so
    the table does not depend on completion order or worker count."""
    tasks = [((beta, m), t)
             for beta in cfg.beta_list for m in cfg.m_grid
             for t in range(cfg.trials_per_cell)]
    records: dict[tuple[float, int], list[TrialRecord]] = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = pool.map(_trial_task, [(cfg, cell, t) for cell, t in tasks],
                               chunksize=8)
            for rec in results:
                records.setdefault(rec.cell, []).append(rec)
    else:
        for cell, t in tasks:
            rec = run_trial(cfg, cell, t)
            records.setdefault(rec.cell, []).append(rec)
    rows = []
    for beta in cfg.beta_list:
        for m in cfg.m_grid:
            recs = records.get((beta, m), [])
            trials = len(recs)
            successes = sum(r.success for r in recs)
            rate = successes / trials
            lo, hi = wilson_interval(successes, trials)
            bound = theory.phasemax_success_bound(m, cfg.n, alpha_of_beta(beta), cfg.field)
            rows.append(SweepRow(beta_deg=math.degrees(beta), m=m, trials=trials,
                                 successes=successes, rate=rate, wilson_lo=lo,
                                 wilson_hi=hi, theory_bound=bound.value))
    table = SweepTable(rows=tuple(rows))
    if out_csv is not None:
        with open(out_csv, "w", encoding="utf-8") as fh:
            fh.write(table.to_csv())
    return table


# ---------------------------------------------------------------------------
# selftest


def _check_regions(rng) -> tuple[bool, str]:
    for n, k in ((2, 3), (2, 5), (3, 4)):
        want = theory.regions_count(n, k)
        got = regions_brute_force(n, k, rng, samples=200_000)
        if got != want:
            return False, f"regions({n},{k}): brute {got} != formula {want}"
    return True, "region counts match on (2,3),(2,5),(3,4)"


def _check_halfsphere_identity(rng) -> tuple[bool, str]:
    for n in range(1, 9):
        for m in range(1, 17):
            lhs = theory.halfsphere_cover_prob_exact(m, n)
            rhs = 1 - Fraction(theory.regions_count(n, m), 2**m)
            if lhs != rhs:
                return False, f"identity fails at n={n}, m={m}"
    return True, "p_cover = 1 - r(n,m)/2^m exactly for n<=8, m<=16"


def _check_coverage_mc(rng) -> tuple[bool, str]:
    trials = 3000
    hits = 0
    for _ in range(trials):
        centers = rng.standard_normal((3, 2))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        hits += caps_cover_sphere(centers, math.pi / 2, rng)
    p = theory.halfsphere_cover_prob(3, 2)
    se = math.sqrt(p * (1 - p) / trials)
    ok = abs(hits / trials - p) <= 4 * se
    return ok, f"coverage freq {hits / trials:.4f} vs {p:.4f} (4SE = {4 * se:.4f})"


def _check_duality(rng) -> tuple[bool, str]:
    instance = gen_instance(6, 40, seed=11)
    instance = _anchor_instance(SweepConfig(n=6, m_grid=(40,)), instance,
                                math.radians(25.0), 11)
    res = solve_phasemax(instance)
    dual = solve_basis_pursuit(instance.ensemble, instance.xhat)
    gap = abs(res.objective - dual.l1_norm) / max(1.0, dual.l1_norm)
    if gap > 1e-4:
        return False, f"duality gap {gap:.2e} > 1e-4"
    y = recover_phases_from_dual(dual.z, instance.ensemble.b)
    x = signal_from_phases(instance.ensemble, y)
    cross = rre(x, res.x_star, phase_align=False)
    ok = cross < 1e-6
    return ok, f"objective gap {gap:.2e}, route agreement RRE {cross:.2e}"


def _check_phase_recovery(rng) -> tuple[bool, str]:
    instance = gen_instance(5, 30, seed=7)
    instance = _anchor_instance(SweepConfig(n=5, m_grid=(30,)), instance,
                                math.radians(20.0), 7)
    dual = solve_basis_pursuit(instance.ensemble, instance.xhat)
    y = recover_phases_from_dual(dual.z, instance.ensemble.b)
    want = instance.ensemble.measure(instance.truth)
    big = np.abs(dual.z) > 1e-6
    dev = float(np.max(np.abs(y[big] - want[big]))) if big.any() else 0.0
    ok = dev < 1e-3
    return ok, f"max phase-lift deviation {dev:.2e} on {int(big.sum())} active entries"


def _check_uniqueness(rng) -> tuple[bool, str]:
    inst_small = gen_instance(2, 1, seed=3)
    rep_small = uniqueness_check(inst_small.ensemble, inst_small.truth, inst_small.xhat)
    if not rep_small.nontrivial:
        return False, "m=1 cone unexpectedly trivial"
    inst_big = gen_instance(4, 60, seed=3)
    inst_big = _anchor_instance(SweepConfig(n=4, m_grid=(60,)), inst_big,
                                math.radians(15.0), 3)
    rep_big = uniqueness_check(inst_big.ensemble, inst_big.truth, inst_big.xhat)
    ok = not rep_big.nontrivial
    return ok, f"m=1 nontrivial, m=15n trivial={not rep_big.nontrivial}"


def _bound_identity(success_bound) -> tuple[bool, str]:
    m, n, alpha = 800.0, 100.0, 0.6
    got = success_bound(m, n, alpha, COMPLEX).value
    want = 1.0 - math.exp(-((alpha * m - 4.0 * n) ** 2) / (2.0 * m))
    real_got = success_bound(m, n, alpha, REAL).value
    real_want = 1.0 - math.exp(-((alpha * m - 2.0 * n) ** 2) / (2.0 * m))
    ok = abs(got - want) < 1e-12 and abs(real_got - real_want) < 1e-12
    return ok, f"complex {got:.6f} vs {want:.6f}; real {real_got:.6f} vs {real_want:.6f}"


def _check_hoeffding(rng) -> tuple[bool, str]:
    for m in (10, 30, 60):
        for n in (1, m // 4, m // 2):
            for p_num in (1, 2, 3):
                p = Fraction(p_num, 4)
                exact = theory.binomial_tail_exact(m, n, p)
                bound = theory.hoeffding_tail(m, n, float(p))
                if float(exact) > bound + 1e-12:
                    return False, f"tail({m},{n},{p}) = {float(exact):.3g} > {bound:.3g}"
    return True, "exact binomial tails below the exponential bound on the grid"


def _check_cos_brackets(rng) -> tuple[bool, str]:
    for n in (2, 10, 200):
        for fld in (REAL, COMPLEX):
            exact, lo, hi = theory.expected_abs_cos(n, fld)
            if not lo <= exact <= hi:
                return False, f"bracket fails at n={n} {fld}"
    return True, "cosine moment sits inside its brackets"


def _check_init_equivalence(rng) -> tuple[bool, str]:
    ensemble = gen_instance(6, 48, seed=21).ensemble
    plain = spectral_init(ensemble, InitializerConfig(kind=SPECTRAL))
    trunc = spectral_init(ensemble, InitializerConfig(kind=TRUNCATED_SPECTRAL,
                                                      truncation_factor=1e12))
    dev = float(np.linalg.norm(plain.x.entries - trunc.x.entries))
    ok = dev < 1e-12
    return ok, f"huge truncation factor matches plain spectral to {dev:.1e}"


def selftest(success_bound=None) -> dict:
    """Reduced-scale invariant suite. Prints one pass/fail line per item and
    returns a JSON-ready report; success_bound is injectable so a doctored
    bound is caught by the identity check."""
    if success_bound is None:
        success_bound = theory.phasemax_success_bound
    rng = np.random.default_rng(2026)
    items = [
        ("region-counts", lambda: _check_regions(rng)),
        ("halfsphere-identity", lambda: _check_halfsphere_identity(rng)),
        ("coverage-mc", lambda: _check_coverage_mc(rng)),
        ("duality", lambda: _check_duality(rng)),
        ("phase-recovery", lambda: _check_phase_recovery(rng)),
        ("uniqueness-oracle", lambda: _check_uniqueness(rng)),
        ("bound-identity", lambda: _bound_identity(success_bound)),
        ("hoeffding-dominance", lambda: _check_hoeffding(rng)),
        ("cosine-brackets", lambda: _check_cos_brackets(rng)),
        ("initializer-equivalence", lambda: _check_init_equivalence(rng)),
    ]
    report = {"ok": True, "items": []}
    for name, fn in items:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"exception: {exc!r}"
        report["items"].append({"name": name, "ok": bool(ok), "detail": detail})
        report["ok"] = report["ok"] and bool(ok)
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return report
