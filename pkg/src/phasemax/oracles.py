"""Independent geometric ground-truth checkers.

Three oracles validate the closed-form theory from the outside: a linear
feasibility check for uniqueness of the recovery program's solution, Monte
Carlo sphere-covering experiments, and brute-force counting of the regions
cut by random hyperplanes. The small dense LP solver they need lives here
too, so the oracles carry no dependency on the rest of the stack.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .linalg import COMPLEX, REAL, Signal, phase
from .ensembles import MeasurementEnsemble


# ---------------------------------------------------------------------------
# small dense LP: minimize c@x, a_ub@x <= b_ub, a_eq@x = b_eq, x >= 0


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray]
    value: Optional[float]


def _pivot(t: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    t[row] /= t[row, col]
    colvals = t[:, col].copy()
    colvals[row] = 0.0
    t -= np.outer(colvals, t[row])
    basis[row] = col


def _bland_step(t: np.ndarray, basis: np.ndarray, ncols: int, tol: float) -> str:
    """One simplex pivot on tableau t (objective in last row). Bland's rule."""
    cost = t[-1, :ncols]
    enter = -1
    for j in range(ncols):
        if cost[j] < -tol:
            enter = j
            break
    if enter < 0:
        return "optimal"
    rows = t.shape[0] - 1
    best, leave = np.inf, -1
    for i in range(rows):
        aij = t[i, enter]
        if aij > tol:
            ratio = t[i, -1] / aij
            if ratio < best - 1e-15 or (abs(ratio - best) <= 1e-15 and
                                        (leave < 0 or basis[i] < basis[leave])):
                best, leave = ratio, i
    if leave < 0:
        return "unbounded"
    _pivot(t, basis, leave, enter)
    return "pivoted"


def solve_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None,
             tol: float = 1e-9, max_pivots: int = 20000) -> LpResult:
    """Two-phase dense tableau simplex with Bland anti-cycling."""
    c = np.asarray(c, dtype=float).reshape(-1)
    k = c.size
    rows = []
    rhs = []
    kinds = []  # "le" or "eq"
    if a_ub is not None and len(a_ub):
        a_ub = np.asarray(a_ub, dtype=float).reshape(-1, k)
        rows.extend(a_ub)
        rhs.extend(np.asarray(b_ub, dtype=float).reshape(-1))
        kinds.extend(["le"] * a_ub.shape[0])
    if a_eq is not None and len(a_eq):
        a_eq = np.asarray(a_eq, dtype=float).reshape(-1, k)
        rows.extend(a_eq)
        rhs.extend(np.asarray(b_eq, dtype=float).reshape(-1))
        kinds.extend(["eq"] * a_eq.shape[0])
    p = len(rows)
    if p == 0:
        # unconstrained over x >= 0: bounded iff c >= 0
        if np.all(c >= -tol):
            return LpResult("optimal", np.zeros(k), 0.0)
        return LpResult("unbounded", None, None)
    a = np.vstack(rows)
    b = np.asarray(rhs, dtype=float)

    # orient all rhs nonnegative; flipped "le" rows get a surplus column
    flip = b < 0
    a[flip] *= -1.0
    b = np.abs(b)
    slack_sign = np.zeros(p)
    for i, kind in enumerate(kinds):
        if kind == "le":
            slack_sign[i] = -1.0 if flip[i] else 1.0

    nslack = int(np.count_nonzero(slack_sign))
    need_artificial = [slack_sign[i] <= 0.0 for i in range(p)]
    nart = sum(need_artificial)
    ncols = k + nslack + nart

    t = np.zeros((p + 1, ncols + 1))
    t[:p, :k] = a
    t[:p, -1] = b
    basis = np.full(p, -1, dtype=int)
    js, ja = k, k + nslack
    for i in range(p):
        if slack_sign[i] != 0.0:
            t[i, js] = slack_sign[i]
            if slack_sign[i] > 0.0:
                basis[i] = js
            js += 1
        if need_artificial[i]:
            t[i, ja] = 1.0
            basis[i] = ja
            ja += 1

    # phase 1: drive the artificial variables to zero
    if nart:
        for i in range(p):
            if basis[i] >= k + nslack:
                t[-1] -= t[i]
        t[-1, k + nslack:ncols] = 0.0
        for _ in range(max_pivots):
            step = _bland_step(t, basis, k + nslack, tol)
            if step != "pivoted":
                break
        if -t[-1, -1] > 1e-7:
            return LpResult("infeasible", None, None)
        for i in range(p):  # pivot residual artificials out of the basis
            if basis[i] >= k + nslack:
                piv = next((j for j in range(k + nslack) if abs(t[i, j]) > tol), None)
                if piv is not None:
                    _pivot(t, basis, i, piv)

    # phase 2 objective
    t[-1, :] = 0.0
    t[-1, :k] = c
    t[:, k + nslack:ncols] = 0.0  # retire artificial columns
    for i in range(p):
        if basis[i] < k + nslack and t[-1, basis[i]] != 0.0:
            t[-1] -= t[-1, basis[i]] * t[i]
    for _ in range(max_pivots):
        step = _bland_step(t, basis, k + nslack, tol)
        if step == "optimal":
            x = np.zeros(ncols)
            for i in range(p):
                x[basis[i]] = t[i, -1]
            return LpResult("optimal", x[:k], float(c @ x[:k]))
        if step == "unbounded":
            return LpResult("unbounded", None, None)
    raise RuntimeError("simplex failed to terminate within max_pivots")


def _box_lp_max(g: np.ndarray, w_le: Optional[np.ndarray],
                w_eq: Optional[np.ndarray]) -> tuple[float, np.ndarray]:
    """Maximize g@v subject to w_le@v <= 0, w_eq@v = 0, v in [-1,1]^d."""
    d = g.size
    # substitute u = v + 1 >= 0, u <= 2
    a_ub = [np.eye(d)]
    b_ub = [np.full(d, 2.0)]
    if w_le is not None and len(w_le):
        a_ub.append(w_le)
        b_ub.append(w_le @ np.ones(d))
    a_eq, b_eq = None, None
    if w_eq is not None and len(w_eq):
        w_eq = np.atleast_2d(w_eq)
        a_eq = w_eq
        b_eq = w_eq @ np.ones(d)
    res = solve_lp(-g, np.vstack(a_ub), np.concatenate(b_ub), a_eq, b_eq)
    if res.status != "optimal":
        raise RuntimeError(f"box LP unexpectedly {res.status}")
    v = res.x - 1.0
    return float(g @ v), v


# ---------------------------------------------------------------------------
# uniqueness of the aligned solution (cone feasibility)


@dataclass(frozen=True)
class ConeFeasibilityReport:
    """Outcome of the descent-cone feasibility check.

    nontrivial=True means a nonzero direction delta exists with
    Im<delta,xhat> = 0, Re<delta,xhat> >= 0 and Re<a~_i,delta> <= 0 for all i,
    where a~_i = phase(<a_i,x0>) a_i; such a direction witnesses that the
    recovery program may move away from x0. nontrivial=False certifies
    uniqueness of the aligned solution.
    """

    nontrivial: bool
    witness: Optional[Signal]
    objective_value: float
    generic_directions_tried: int


def _embed_rows(vectors: np.ndarray, field: str) -> np.ndarray:
    """Real row embedding of Re<w, .> for complex (or real) row vectors w."""
    if field == REAL:
        return vectors.real.copy()
    return np.hstack([vectors.real, vectors.imag])


def uniqueness_check(ensemble: MeasurementEnsemble, truth: Signal, xhat: Signal,
                     directions: int = 4) -> ConeFeasibilityReport:
    """Decide by LP whether the failure cone contains a nonzero direction.

    The cone lives in real coordinates (dimension 2n complex, n real); each
    generic objective g and its negation are maximized over cone-and-box; any
    optimum above 1e-7 exhibits a witness. Deterministic: the generic
    directions derive from the ensemble seed.
    """
    if xhat.norm == 0.0:
        raise ValueError("xhat must be nonzero")
    field = ensemble.field
    n = ensemble.n
    d = n if field == REAL else 2 * n
    inner_products = ensemble.measure(truth)
    tilted = phase(inner_products)[:, None] * ensemble.vectors
    w_le = _embed_rows(tilted, field)  # Re<a~_i, delta> <= 0 rows
    h = _embed_rows(xhat.entries[None, :], field)[0]  # Re<delta,xhat> >= 0
    w_le_full = np.vstack([w_le, -h[None, :]])
    w_eq = None
    if field == COMPLEX:
        x = xhat.entries
        w_eq = np.hstack([x.imag, -x.real])[None, :]  # Im<delta,xhat> = 0

    rng = np.random.default_rng(np.random.SeedSequence([int(ensemble.seed) & (2**63 - 1), 0x51ED]))
    best_val, best_v, tried = 0.0, None, 0
    for _ in range(directions):
        g = rng.standard_normal(d)
        g /= np.linalg.norm(g)
        for sign in (1.0, -1.0):
            val, v = _box_lp_max(sign * g, w_le_full, w_eq)
            tried += 1
            if val > best_val:
                best_val, best_v = val, v
            if best_val > 1e-7:
                break
        if best_val > 1e-7:
            break

    if best_val <= 1e-7:
        return ConeFeasibilityReport(False, None, best_val, tried)
    v = best_v / np.linalg.norm(best_v)
    delta = v if field == REAL else v[:n] + 1j * v[n:]
    return ConeFeasibilityReport(True, Signal(delta, field), best_val, tried)


# ---------------------------------------------------------------------------
# sphere covering by caps


def _uniform_rows(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    a = rng.standard_normal((m, n))
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def caps_cover_sphere(centers: np.ndarray, theta: float,
                      rng: np.random.Generator, probes: int = 20000) -> bool:
    """Decide whether caps {p : <a_i,p> > cos(theta)} cover the real sphere.

    Probing gives exact rejections (an uncovered probe is a certificate);
    at theta = pi/2 a survivor goes to the exact LP emptiness test of the
    open intersection of the antipodal semispheres. For theta < pi/2 the
    decision is probe-only and `probes` is the accuracy parameter.
    """
    centers = np.asarray(centers, dtype=float)
    m, n = centers.shape
    cos_t = np.cos(theta)
    exact = abs(theta - np.pi / 2) <= 1e-12
    stage = min(probes, 512) if exact else probes
    p = rng.standard_normal((stage, n))
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    covered = (p @ centers.T > cos_t).any(axis=1)
    if not covered.all():
        return False
    if not exact:
        return True
    # exact decision: caps cover <=> no v with <a_i, v> < 0 for all i
    g = np.zeros(n + 1)
    g[-1] = 1.0  # maximize the margin t
    w_le = np.hstack([centers, np.ones((m, 1))])  # <a_i,v> + t <= 0
    val, _ = _box_lp_max(g, w_le, None)
    return val <= 1e-9


def coverage_mc(n: int, m: int, theta: float, trials: int,
                rng: np.random.Generator,
                sampler: Optional[Callable[[np.random.Generator, int, int], np.ndarray]] = None,
                probes: int = 20000) -> float:
    """Fraction of independent experiments in which m fresh random caps of
    half-angle theta cover the real unit sphere S^{n-1}.

    `sampler(rng, m, n)` overrides the uniform cap-center draw (it must
    return unit-norm rows); the default is uniform on the sphere.
    """
    if not 0.0 < theta <= np.pi / 2 + 1e-12:
        raise ValueError("theta must lie in (0, pi/2]")
    draw = sampler or _uniform_rows
    hits = 0
    for _ in range(trials):
        centers = draw(rng, m, n)
        if caps_cover_sphere(centers, theta, rng, probes):
            hits += 1
    return hits / trials


# ---------------------------------------------------------------------------
# brute-force region counting


def regions_brute_force(n: int, k: int, rng: np.random.Generator,
                        samples: int = 10**6) -> int:
    """Count regions cut from S^{n-1} by k random central hyperplanes.

    Counts distinct sign patterns (sign<a_i,p>)_i over sampled sphere points;
    never exceeds the true region count and reaches it with enough samples.
    """
    if n > 5 or k > 8:
        raise ValueError("brute-force regime is n <= 5, k <= 8")
    if n < 1 or k < 1:
        raise ValueError("n and k must be at least 1")
    normals = rng.standard_normal((k, n))
    weights = (1 << np.arange(k)).astype(np.uint32)
    seen: set = set()
    chunk = 200000
    remaining = samples
    while remaining > 0:
        took = min(chunk, remaining)
        p = rng.standard_normal((took, n))
        codes = ((p @ normals.T) > 0.0).astype(np.uint32) @ weights
        seen.update(np.unique(codes).tolist())
        remaining -= took
    return len(seen)
