"""Closed-form recovery bounds, covering laws, and initializer constants.

Probability bounds are returned as TheoryBound values: clamped to [0,1],
with a validity flag instead of exceptions, so sweeps that cross a validity
boundary report a vacuous 0 rather than crashing. Exact combinatorial
quantities use big-integer / rational arithmetic; the large-deviation terms
are evaluated in log-space to survive factors like (em)^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .linalg import COMPLEX, REAL, Field


@dataclass(frozen=True)
class TheoryBound:
    """A probability lower bound plus the parameters it was built from.

    valid=False means a precondition failed; the value is then reported as 0
    (vacuous) rather than raising, so grids can cross validity boundaries.
    """

    value: float
    valid: bool
    params: dict
    formula_id: str

    def __post_init__(self):
        if not self.valid:
            object.__setattr__(self, "value", 0.0)
        else:
            object.__setattr__(self, "value", float(min(1.0, max(0.0, self.value))))


@dataclass(frozen=True)
class AppendixBTrace:
    """Intermediate quantities of the small-caps covering bound."""

    epsilon_cos: float  # cos(phi)
    lambda_floor: float  # sin^{n-1}(phi)/sqrt(8n), the cap-mass floor used
    combinatorial_factor: float  # (em)^n sqrt(n-1) / (2n)^{n-1}
    exp_term: float  # exp(-lambda_floor * (m - n))
    hoeffding_term: float  # exp(-(m-2n+1)^2/(2m-2))


_EMPTY_TRACE = AppendixBTrace(0.0, 0.0, 0.0, 0.0, 0.0)


# ---------------------------------------------------------------------------
# exact combinatorics


def regions_count(n: int, k: int) -> int:
    """Number of regions k generic central hyperplanes cut from S^{n-1}:
    2 * sum_{i=0}^{n-1} C(k-1, i). Exact integer."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be at least 1")
    return 2 * sum(math.comb(k - 1, i) for i in range(n))


def halfsphere_cover_prob_exact(m_a: int, n: int) -> Fraction:
    """Probability that m_a random semispheres cover S^{n-1}, as a rational:
    1 - 2^{1-m_a} * sum_{k=0}^{n-1} C(m_a-1, k)."""
    if m_a < 1 or n < 1:
        raise ValueError("m_a and n must be at least 1")
    tail = sum(math.comb(m_a - 1, k) for k in range(n))
    return 1 - Fraction(tail, 2 ** (m_a - 1))


def halfsphere_cover_prob(m_a: int, n: int) -> float:
    return float(halfsphere_cover_prob_exact(m_a, n))


def binomial_tail_exact(m: int, n: int, p: Fraction) -> Fraction:
    """P(Bin(m, p) <= n) as an exact rational."""
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    q = 1 - p
    return sum(math.comb(m, k) * p**k * q ** (m - k) for k in range(min(n, m) + 1))


def hoeffding_tail(m: float, n: float, p: float) -> float:
    """Upper bound exp(-2(pm-n)^2/m) on P(Bin(m,p) <= n); 1 when pm <= n."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if m < 1:
        raise ValueError("m must be at least 1")
    t = p * m - n
    if t <= 0.0:
        return 1.0
    return float(math.exp(-2.0 * t * t / m))


# ---------------------------------------------------------------------------
# recovery bounds


def _gauss_bound(m: float, n: float, alpha: float, threshold: float,
                 formula_id: str, extra: Optional[dict] = None) -> TheoryBound:
    """Common 1 - exp(-(alpha*m - threshold*n)^2 / (2m)) shape."""
    params = {"m": float(m), "n": float(n), "alpha": float(alpha)}
    if extra:
        params.update(extra)
    valid = m > 0 and alpha * m > threshold * n
    value = 0.0
    if valid:
        if math.isinf(m):
            value = 1.0
        else:
            value = 1.0 - math.exp(-((alpha * m - threshold * n) ** 2) / (2.0 * m))
    return TheoryBound(value, valid, params, formula_id)


def neighbor_cover_bound(m: float, n: float, alpha: float) -> TheoryBound:
    """Covering bound for the alpha-neighborhood caps: 1 - exp(-(am-2n)^2/(2m)),
    valid when alpha*m > 2n."""
    return _gauss_bound(m, n, alpha, 2.0, "lem3")


def phasemax_success_bound(m: float, n: float, alpha: float, field: Field) -> TheoryBound:
    """Recovery guarantee: complex needs alpha*m > 4n, real alpha*m > 2n."""
    if field == COMPLEX:
        return _gauss_bound(m, n, alpha, 4.0, "thm1")
    if field == REAL:
        return _gauss_bound(m, n, alpha, 2.0, "thm4")
    raise ValueError(f"unknown field {field!r}")


def sphere_surface(n: float) -> float:
    """Surface measure s_n = 2 pi^n / Gamma(n) of S^{2n-1} (complex unit sphere)."""
    return float(math.exp(log_sphere_surface(n)))


def log_sphere_surface(n: float) -> float:
    if n <= 0:
        raise ValueError("n must be positive")
    return math.log(2.0) + n * math.log(math.pi) - float(gammaln(n))


def nonuniform_bound(m_d: float, n: float, alpha: float, ell_d: float) -> TheoryBound:
    """Success bound for a non-uniform measurement density with infimum ell_d:
    the m_d draws are worth m_u = floor(m_d * s_n * ell_d) uniform ones."""
    if ell_d < 0:
        raise ValueError("ell_d must be nonnegative")
    log_sn = log_sphere_surface(n)
    sn = float(math.exp(log_sn)) if log_sn < 700 else float("inf")
    params = {"m_D": float(m_d), "ell_D": float(ell_d), "s_n": sn}
    if ell_d == 0.0 or m_d <= 0:
        params.update({"m": 0.0, "m_U": 0.0, "n": float(n), "alpha": float(alpha)})
        return TheoryBound(0.0, False, params, "thm5")
    log_x = math.log(m_d) + log_sn + math.log(ell_d)
    if log_x > 700:
        m_u = float("inf")
    else:
        x = math.exp(log_x)
        m_u = math.floor(x + 1e-9 * max(1.0, x))  # guard roundoff at integer edges
    params["m_U"] = float(m_u)
    inner = _gauss_bound(m_u, n, alpha, 4.0, "thm5", extra=params)
    return inner


def small_caps_cover_bound(m: float, n: float, phi: float) -> tuple[TheoryBound, AppendixBTrace]:
    """Lower bound on the probability that m caps of half-angle phi cover
    S^{n-1}: 1 - (em)^n sqrt(n-1)/(2n)^{n-1} * exp(-sin^{n-1}(phi)(m-n)/sqrt(8n))
    * cos(phi) - exp(-(m-2n+1)^2/(2m-2)). Valid for n >= 9 and m > 2n.

    The product term is assembled in log-space; the trace reports each factor.
    """
    params = {"m": float(m), "n": float(n), "phi": float(phi)}
    valid = (n >= 9) and (m > 2 * n) and (0.0 < phi <= math.pi / 2 + 1e-12)
    if not (0.0 < phi <= math.pi / 2 + 1e-12) or n < 2 or m <= 1:
        return TheoryBound(0.0, False, params, "lem4"), _EMPTY_TRACE

    sin_phi = math.sin(phi)
    # the cosine factor vanishes at the semisphere limit; float cos(pi/2)
    # leaves ~6e-17 which the (em)^n factor would otherwise amplify
    cos_phi = max(0.0, math.cos(phi)) if phi < math.pi / 2 - 1e-12 else 0.0
    log_lambda_floor = (n - 1) * math.log(sin_phi) - 0.5 * math.log(8.0 * n) \
        if sin_phi > 0 else -math.inf
    lambda_floor = math.exp(log_lambda_floor)
    log_cf = n * (1.0 + math.log(m)) + 0.5 * math.log(n - 1) - (n - 1) * math.log(2.0 * n)
    decay = lambda_floor * (m - n)
    exp_term = math.exp(-decay) if decay < 745 else 0.0
    hoeffding_term = hoeffding_tail(m - 1.0, n - 1.0, 0.5) if m >= 2 else 1.0
    if cos_phi > 0.0:
        log_term1 = log_cf - decay + math.log(cos_phi)
        term1 = math.exp(log_term1) if log_term1 < 700 else math.inf
    else:
        term1 = 0.0
    value = 1.0 - term1 - hoeffding_term
    trace = AppendixBTrace(
        epsilon_cos=cos_phi,
        lambda_floor=lambda_floor,
        combinatorial_factor=math.exp(log_cf) if log_cf < 700 else math.inf,
        exp_term=exp_term,
        hoeffding_term=hoeffding_term,
    )
    return TheoryBound(value, valid, params, "lem4"), trace


@dataclass(frozen=True)
class NoiseErrorBound:
    """Noisy-recovery conclusion: an error radius and the covering probability
    with which it holds, plus the shrink pair (s, r) behind it."""

    error_bound: float  # epsilon + (1 - s) * ||x0||
    s: float
    r: float
    theta: float
    phi: float
    probability: TheoryBound
    trace: AppendixBTrace


def noise_error_bound(m: float, n: float, angle_x0_xhat: float, b_hat, eta,
                      epsilon: float, x0_norm: float = 1.0) -> NoiseErrorBound:
    """Error guarantee under bounded noise on the squared magnitudes.

    Nonnegative noise keeps the measured signal feasible: s = 1 and
    r = max eta_i / bhat_i. Mixed-sign noise shrinks the reference point by
    s^2 = min b_i^2 / bhat_i^2 and uses r = max zeta_i/(s bhat_i) with
    zeta_i = bhat_i^2 (1 - s^2) + eta_i. The radius epsilon must exceed r/2;
    the guarantee holds with the covering probability at dimension 2n and
    cap angle phi = arccos(r/(2 epsilon)) - angle(x0, xhat).
    """
    b_hat = np.asarray(b_hat, dtype=float).reshape(-1)
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if b_hat.size != eta.size:
        raise ValueError("b_hat and eta must have equal length")
    if np.any(b_hat <= 0.0):
        raise ValueError("clean magnitudes b_hat must be positive")
    bh_sq = b_hat**2
    if np.any(eta <= -bh_sq):
        i = int(np.argmax(eta <= -bh_sq))
        raise ValueError(f"eta_{i} = {eta[i]:g} does not exceed -bhat_{i}^2")
    if np.all(eta >= 0.0):
        s = 1.0
        r = float(np.max(eta / b_hat)) if eta.size else 0.0
    else:
        s = float(math.sqrt(np.min((bh_sq + eta) / bh_sq)))
        zeta = bh_sq * (1.0 - s * s) + eta
        r = float(np.max(zeta / (s * b_hat)))
    if epsilon <= r / 2.0:
        raise ValueError(f"epsilon must exceed r/2 = {r / 2.0:g}")
    theta = math.acos(r / (2.0 * epsilon))
    phi = theta - angle_x0_xhat
    probability, trace = small_caps_cover_bound(m, 2.0 * n, phi)
    params = dict(probability.params)
    params.update({
        "m": float(m), "n": float(n), "phi": float(phi), "r": r, "s": s,
        "epsilon": float(epsilon), "theta": theta, "angle": float(angle_x0_xhat),
    })
    probability = TheoryBound(probability.value, probability.valid, params, "noise")
    return NoiseErrorBound(
        error_bound=float(epsilon + (1.0 - s) * x0_norm),
        s=s,
        r=r,
        theta=theta,
        phi=phi,
        probability=probability,
        trace=trace,
    )


# ---------------------------------------------------------------------------
# initializer constants


def expected_abs_cos(n: int, field: Field) -> tuple[float, float, float]:
    """(exact, lower, upper) for E|cos angle(u, v)| of independent uniform
    unit vectors: Gamma(n/2)/(sqrt(pi) Gamma((n+1)/2)), bracketed by
    sqrt(2/(pi n)) and sqrt(2/(pi (n - 1/2))). Complex evaluates at 2n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    neff = n if field == REAL else 2 * n
    exact = float(math.exp(gammaln(neff / 2.0) - gammaln((neff + 1) / 2.0)) / math.sqrt(math.pi))
    lower = math.sqrt(2.0 / (math.pi * neff))
    upper = math.sqrt(2.0 / (math.pi * (neff - 0.5)))
    if not lower <= exact <= upper:
        raise AssertionError(f"cosine moment brackets violated at n={n} ({field})")
    return exact, lower, upper


def random_init_alpha_floor(n: int, field: Field) -> float:
    """Lower bound on E[alpha] for a uniformly random anchor: sqrt(8/(pi^3 n))
    in the real case, the same at 2n (= sqrt(4/(pi^3 n))) in the complex case."""
    if n < 1:
        raise ValueError("n must be at least 1")
    neff = n if field == REAL else 2 * n
    return math.sqrt(8.0 / (math.pi**3 * neff))


def random_init_measurement_threshold(n: int, field: Field) -> float:
    """Measurement count c * n^{3/2} above which a random anchor suffices:
    c = sqrt(pi^3/2) real, c = 2 sqrt(pi^3) complex."""
    if n < 1:
        raise ValueError("n must be at least 1")
    c = math.sqrt(math.pi**3 / 2.0) if field == REAL else 2.0 * math.sqrt(math.pi**3)
    return c * n**1.5
