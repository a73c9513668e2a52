"""Solvers: the convex anchored program (primal route), its l1 dual route
with phase recovery, and the alternating-projection baseline.

Both convex routes use the same first-order primal-dual splitting: one
application of the measurement operator and one of its adjoint per iteration,
a closed-form proximal step on each side, and over-relaxation. They differ
only in which side carries the nonsmooth term (disc projection vs complex
soft-thresholding), which makes them independent enough to cross-check each
other through strong duality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .ensembles import MeasurementEnsemble, ProblemInstance
from .linalg import REAL, Field, Signal, align, inner, phase

# magnitudes this small are flushed to zero: over-relaxation turns the exact
# zeros of the proximal steps into geometric decay, and letting that decay
# reach subnormal range slows every subsequent vector op by an order of
# magnitude on common hardware
_FLUSH = 1e-200


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 50000
    tol_feasibility: Optional[float] = None  # None: 1e-9 * max(b)
    tol_objective: float = 1e-9
    step_product_margin: float = 0.95
    operator_norm_iters: int = 100
    relaxation: float = 1.9
    check_every: int = 50

    def __post_init__(self):
        if self.tol_feasibility is not None and self.tol_feasibility <= 0:
            raise ValueError("tol_feasibility must be positive")
        if self.tol_objective <= 0:
            raise ValueError("tol_objective must be positive")
        if not 0.0 < self.step_product_margin < 1.0:
            raise ValueError("step_product_margin must lie in (0, 1)")
        if not 0.0 < self.relaxation < 2.0:
            raise ValueError("relaxation must lie in (0, 2)")
        if self.max_iters < 1 or self.operator_norm_iters < 1 or self.check_every < 1:
            raise ValueError("iteration counts must be at least 1")


@dataclass(frozen=True)
class RecoveryResult:
    x_star: Signal
    iterations: int
    max_constraint_violation: float
    objective: float
    converged: bool
    rre: Optional[float] = None
    success: Optional[bool] = None


@dataclass(frozen=True)
class DualSolution:
    z: np.ndarray  # length-m coefficients of the l1 program
    residual: float  # ||sum_i (z_i/b_i) a_i - xhat||_2
    l1_norm: float
    iterations: int
    converged: bool
    gap: float


def _as_field(entries: np.ndarray, field: Field) -> np.ndarray:
    if field == REAL:
        return entries.real.astype(np.complex128)
    return entries.astype(np.complex128)


def _soft_threshold(w: np.ndarray, radii) -> np.ndarray:
    """Proximal map of the (weighted) complex l1 norm: shrink magnitudes by
    radii, keep phases; also the Moreau complement of the disc projection."""
    mag = np.abs(w)
    factor = np.maximum(1.0 - radii / np.maximum(mag, 1e-300), 0.0)
    return w * factor


def operator_norm(forward: np.ndarray, iters: int, seed: int = 0x0B9A) -> float:
    """Largest singular value of the measurement matrix by power iteration
    on its Gram operator, with a deterministic start."""
    m, n = forward.shape
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    adjoint = forward.conj().T
    for _ in range(iters):
        w = adjoint @ (forward @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        new_est = math.sqrt(norm_w)
        v = w / norm_w
        if abs(new_est - est) <= 1e-12 * new_est:
            est = new_est
            break
        est = new_est
    return est


def _resolve_tols(cfg: SolverConfig, scale: float) -> float:
    if cfg.tol_feasibility is not None:
        return cfg.tol_feasibility
    return 1e-9 * scale if scale > 0 else 1e-15


def solve_phasemax(instance: ProblemInstance, cfg: Optional[SolverConfig] = None) -> RecoveryResult:
    """Maximize Re<x, xhat> over the intersection of discs |<a_i, x>| <= b_i.

    Primal-dual iteration: the primal step adds tau * xhat and retracts the
    adjoint of the dual variable; the dual step projects onto the product of
    discs via its Moreau complement (soft-thresholding at radii sigma * b_i)
    using the extrapolated primal image. All three tracked states (x, y, Mx)
    are then over-relaxed. Declared converged when the worst disc violation,
    the dual residual ||adjoint(y) - xhat||, and the relative primal-dual gap
    are all below tolerance.
    """
    cfg = cfg or SolverConfig()
    ensemble = instance.ensemble
    b = ensemble.b
    neg = np.flatnonzero(b < 0)
    if neg.size:
        i = int(neg[0])
        raise ValueError(f"disc radius b_{i} = {b[i]:g} is negative; no feasible point")
    xhat = instance.xhat.entries
    xhat_norm = float(np.linalg.norm(xhat))
    if xhat_norm == 0.0:
        raise ValueError("anchor xhat must be nonzero")

    forward = ensemble.forward_matrix()
    adjoint = forward.conj().T
    opnorm = operator_norm(forward, cfg.operator_norm_iters) * 1.001
    if opnorm == 0.0:
        opnorm = 1.0
    step = math.sqrt(cfg.step_product_margin) / opnorm
    tau = sigma = step
    rho = cfg.relaxation
    tol_feas = _resolve_tols(cfg, float(np.max(b)) if b.size else 0.0)
    tol_obj = cfg.tol_objective

    x = np.zeros(ensemble.n, dtype=np.complex128)
    y = np.zeros(ensemble.m, dtype=np.complex128)
    mx = np.zeros(ensemble.m, dtype=np.complex128)
    sigma_b = sigma * b

    converged = False
    iterations = 0
    viol = float(np.max(-b)) if b.size else 0.0
    for k in range(1, cfg.max_iters + 1):
        iterations = k
        adj_y = adjoint @ y
        x_cand = x + tau * (xhat - adj_y)
        mx_cand = forward @ x_cand
        w = y + sigma * (2.0 * mx_cand - mx)
        y_cand = _soft_threshold(w, sigma_b)
        x += rho * (x_cand - x)
        y += rho * (y_cand - y)
        mx += rho * (mx_cand - mx)
        y[np.abs(y) < _FLUSH] = 0.0
        if k % cfg.check_every == 0 or k == cfg.max_iters:
            viol = float(np.max(np.abs(mx) - b)) if b.size else 0.0
            dual_res = float(np.linalg.norm(adjoint @ y - xhat))
            primal = float(np.real(np.vdot(xhat, x)))
            dual = float(b @ np.abs(y))
            gap = abs(dual - primal) / max(1.0, abs(dual))
            if viol <= tol_feas and dual_res <= tol_obj * max(1.0, xhat_norm) and gap <= tol_obj:
                converged = True
                break

    x_sig = align(Signal(_as_field(x, ensemble.field), ensemble.field), instance.xhat)
    objective = float(np.real(inner(x_sig.entries, xhat)))
    err = success = None
    if instance.truth is not None:
        err = rre(x_sig, instance.truth, phase_align=False)
        success = bool(err < 1e-5)
    return RecoveryResult(
        x_star=x_sig,
        iterations=iterations,
        max_constraint_violation=viol,
        objective=objective,
        converged=converged,
        rre=err,
        success=success,
    )


def solve_basis_pursuit(ensemble: MeasurementEnsemble, xhat: Signal,
                        cfg: Optional[SolverConfig] = None) -> DualSolution:
    """Minimize ||z||_1 subject to sum_i (z_i / b_i) a_i = xhat.

    Same splitting as the primal route with the roles of the proximal steps
    exchanged: the primal step is complex soft-thresholding, the dual step is
    the shift by -sigma * xhat conjugate to the equality constraint. The
    equality constraint requires every b_i > 0.
    """
    cfg = cfg or SolverConfig()
    b = ensemble.b
    bad = np.flatnonzero(b <= 0)
    if bad.size:
        i = int(bad[0])
        raise ValueError(
            f"b_{i} = {b[i]:g} makes the magnitude matrix singular; use the primal route")
    xh = xhat.entries
    xh_norm = float(np.linalg.norm(xh))
    cols = ensemble.vectors.T / b  # column i is a_i / b_i
    cols_h = cols.conj().T
    opnorm = operator_norm(cols_h, cfg.operator_norm_iters) * 1.001
    if opnorm == 0.0:
        opnorm = 1.0
    step = math.sqrt(cfg.step_product_margin) / opnorm
    tau = sigma = step
    rho = cfg.relaxation
    tol_feas = cfg.tol_feasibility if cfg.tol_feasibility is not None else 1e-9 * max(1.0, xh_norm)
    tol_obj = cfg.tol_objective

    z = np.zeros(ensemble.m, dtype=np.complex128)
    v = np.zeros(ensemble.n, dtype=np.complex128)
    gz = np.zeros(ensemble.n, dtype=np.complex128)

    converged = False
    iterations = 0
    residual = xh_norm
    gap = math.inf
    for k in range(1, cfg.max_iters + 1):
        iterations = k
        z_cand = _soft_threshold(z - tau * (cols_h @ v), tau)
        gz_cand = cols @ z_cand
        v_cand = v + sigma * (2.0 * gz_cand - gz) - sigma * xh
        z += rho * (z_cand - z)
        v += rho * (v_cand - v)
        gz += rho * (gz_cand - gz)
        z[np.abs(z) < _FLUSH] = 0.0
        if k % cfg.check_every == 0 or k == cfg.max_iters:
            residual = float(np.linalg.norm(gz - xh))
            l1 = float(np.sum(np.abs(z)))
            cert = float(np.max(np.abs(cols_h @ v))) if ensemble.m else 0.0
            v_scaled = v / max(1.0, cert)
            dual_obj = -float(np.real(np.vdot(v_scaled, xh)))
            gap = abs(l1 - dual_obj) / max(1.0, l1)
            if residual <= tol_feas and gap <= tol_obj:
                converged = True
                break

    if ensemble.field == REAL:
        z = z.real.astype(np.complex128)
    return DualSolution(
        z=z,
        residual=residual,
        l1_norm=float(np.sum(np.abs(z))),
        iterations=iterations,
        converged=converged,
        gap=gap,
    )


def recover_phases_from_dual(z, b) -> np.ndarray:
    """Lift l1 coefficients back to full measurements: y_i = phase(z_i) b_i,
    with phase(0) = 1."""
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if z.size != b.size:
        raise ValueError("z and b must have equal length")
    return phase(z) * b


def signal_from_phases(ensemble: MeasurementEnsemble, y,
                       x0: Optional[Signal] = None) -> Signal:
    """Least-squares signal with the given measurements: minimize
    sum_i |<a_i, x> - y_i|^2, solved by conjugate-direction iterations on the
    normal equations to 1e-12 relative residual. Rank deficiency is not an
    error; it shows up as a large residual at the returned point."""
    if ensemble.m < ensemble.n:
        raise ValueError("need at least as many measurements as unknowns")
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    if y.size != ensemble.m:
        raise ValueError("y must have one entry per measurement")
    forward = ensemble.forward_matrix()
    adjoint = forward.conj().T
    rhs = adjoint @ y

    gram = LinearOperator(
        (ensemble.n, ensemble.n),
        matvec=lambda v: adjoint @ (forward @ v),
        dtype=np.complex128,
    )
    start = x0.entries if x0 is not None else None
    x, _ = cg(gram, rhs, x0=start, rtol=1e-12, atol=0.0, maxiter=20 * ensemble.n)
    return Signal(_as_field(np.asarray(x), ensemble.field), ensemble.field)


def signal_from_dual(ensemble: MeasurementEnsemble, z,
                     x0: Optional[Signal] = None,
                     live_tol: float = 1e-6) -> Signal:
    """Signal carried by l1 coefficients z.

    Only rows with |z_i| > live_tol pin a measurement phase (a zero
    coefficient leaves its phase free at an optimum, and the phase(0) = 1
    convention would feed a wrong measurement into the fit), so the
    least-squares reconstruction is restricted to the live rows. Falls back
    to all rows when fewer than n are live.
    """
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    if z.size != ensemble.m:
        raise ValueError("z must have one entry per measurement")
    live = np.abs(z) > live_tol
    if np.count_nonzero(live) < ensemble.n:
        live = np.ones(ensemble.m, dtype=bool)
    sub = MeasurementEnsemble(
        vectors=ensemble.vectors[live],
        b=ensemble.b[live],
        eta=ensemble.eta[live],
        field=ensemble.field,
        normalized=ensemble.normalized,
        seed=ensemble.seed,
    )
    y = recover_phases_from_dual(z[live], sub.b)
    return signal_from_phases(sub, y, x0)


def gerchberg_saxton(ensemble: MeasurementEnsemble, x_init: Signal,
                     cfg: Optional[SolverConfig] = None,
                     truth: Optional[Signal] = None) -> RecoveryResult:
    """Alternating projections: impose the measured magnitudes on the current
    measurement image, then project back by least squares. Stops when the
    relative change between iterates falls below tol_objective. Reported
    violation is the worst magnitude misfit; on a supplied truth the output
    is phase-aligned to it before the error is computed."""
    cfg = cfg or SolverConfig()
    b = ensemble.b
    x = x_init
    converged = False
    iterations = 0
    for k in range(1, cfg.max_iters + 1):
        iterations = k
        y = phase(ensemble.measure(x)) * b
        x_next = signal_from_phases(ensemble, y, x0=x)
        step = rre(x_next, x, phase_align=False) if x.norm > 0 else math.inf
        x = x_next
        if step < cfg.tol_objective:
            converged = True
            break
    misfit = float(np.max(np.abs(np.abs(ensemble.measure(x)) - b))) if b.size else 0.0
    err = success = None
    if truth is not None:
        x = align(x, truth)
        err = rre(x, truth, phase_align=False)
        success = bool(err < 1e-5)
    objective = float(np.linalg.norm(np.abs(ensemble.measure(x)) - b))
    return RecoveryResult(
        x_star=x,
        iterations=iterations,
        max_constraint_violation=misfit,
        objective=objective,
        converged=converged,
        rre=err,
        success=success,
    )


def rre(x: Signal, truth: Signal, phase_align: bool = False) -> float:
    """Relative reconstruction error ||truth - x||^2 / ||truth||^2, with the
    global phase of x matched to truth first when phase_align is set."""
    tnorm = truth.norm
    if tnorm == 0.0:
        raise ValueError("truth must be nonzero")
    xe = x.entries
    if phase_align:
        xe = xe * phase(inner(xe, truth.entries))
    return float(np.linalg.norm(truth.entries - xe) ** 2 / tnorm**2)
