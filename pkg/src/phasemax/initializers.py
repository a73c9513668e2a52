"""Anchor-vector construction: random, spectral, and truncated spectral."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ensembles import MeasurementEnsemble, sample_unit_sphere
from .linalg import Field, Signal

RANDOM = "random"
SPECTRAL = "spectral"
TRUNCATED_SPECTRAL = "trunc-spectral"

_KINDS = (RANDOM, SPECTRAL, TRUNCATED_SPECTRAL)

_SEED_MASK = (1 << 63) - 1
_START_KEY = 0x5BEC


@dataclass(frozen=True)
class InitializerConfig:
    kind: str = TRUNCATED_SPECTRAL
    power_iters: int = 200
    power_tol: float = 1e-10
    # keep rows with b_i^2 <= factor * mean(b^2); 9 clips magnitudes above
    # three times the root-mean-square, removing only the extreme tail (a
    # tighter cut discards the rows that carry the signal direction)
    truncation_factor: float = 9.0
    scale_to: Optional[float] = None  # None: sqrt(mean(b^2))

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.power_tol <= 0:
            raise ValueError("power_tol must be positive")
        if self.truncation_factor <= 0:
            raise ValueError("truncation_factor must be positive")
        if self.power_iters < 1:
            raise ValueError("power_iters must be at least 1")
        if self.scale_to is not None and self.scale_to <= 0:
            raise ValueError("scale_to must be positive when given")


@dataclass(frozen=True)
class SpectralResult:
    """Leading-eigenvector estimate plus power-iteration diagnostics."""

    x: Signal
    converged: bool
    iterations: int
    rayleigh_quotient: float


def random_init(n: int, field: Field, rng: np.random.Generator) -> Signal:
    """Anchor drawn uniformly from the unit sphere, blind to the measurements."""
    return sample_unit_sphere(n, field, rng)


def spectral_init(ensemble: MeasurementEnsemble, cfg: Optional[InitializerConfig] = None) -> SpectralResult:
    """Leading eigenvector of Y = (1/m) sum_i w_i b_i^2 a_i a_i^*.

    Weights are all-ones for the plain spectral kind; the truncated kind keeps
    only rows with b_i^2 <= truncation_factor * mean(b^2), which suppresses
    the heavy-tailed rows that dominate the unweighted Y. The eigenvector is
    found by power iteration on the implicit matvec (never forming Y), run
    until successive Rayleigh quotients agree to power_tol relatively, with a
    start vector derived from the ensemble seed so reruns are reproducible.
    Failure to separate eigenvalues within power_iters is reported through
    converged=False, not an exception.
    """
    if cfg is None:
        cfg = InitializerConfig()
    if cfg.kind == RANDOM:
        raise ValueError("spectral_init handles the spectral kinds; use random_init")
    b_sq = ensemble.b**2
    if cfg.kind == TRUNCATED_SPECTRAL:
        weights = (b_sq <= cfg.truncation_factor * np.mean(b_sq)).astype(float)
        if not np.any(weights > 0):
            raise ValueError("truncation removed every measurement; raise truncation_factor")
    else:
        weights = np.ones(ensemble.m)
    coeff = weights * b_sq / ensemble.m
    forward = ensemble.forward_matrix()
    back = ensemble.vectors.T  # sum_i c_i a_i

    def apply_y(v: np.ndarray) -> np.ndarray:
        return back @ (coeff * (forward @ v))

    rng = np.random.default_rng(np.random.SeedSequence([int(ensemble.seed) & _SEED_MASK, _START_KEY]))
    v = sample_unit_sphere(ensemble.n, ensemble.field, rng).entries
    rayleigh = float(np.real(np.vdot(v, apply_y(v))))
    converged = False
    iterations = 0
    for iterations in range(1, cfg.power_iters + 1):
        yv = apply_y(v)
        norm = np.linalg.norm(yv)
        if norm == 0.0:
            # v is in the nullspace of a degenerate Y; any direction is optimal
            converged = True
            break
        v = yv / norm
        new_rayleigh = float(np.real(np.vdot(v, apply_y(v))))
        if abs(new_rayleigh - rayleigh) <= cfg.power_tol * max(abs(new_rayleigh), abs(rayleigh)):
            rayleigh = new_rayleigh
            converged = True
            break
        rayleigh = new_rayleigh
    scale = cfg.scale_to if cfg.scale_to is not None else float(np.sqrt(np.mean(b_sq)))
    if scale < 0:
        raise ValueError("scale_to must be nonnegative")
    x = Signal(v * scale, ensemble.field)
    return SpectralResult(x=x, converged=converged, iterations=iterations, rayleigh_quotient=rayleigh)


def make_anchor(ensemble: MeasurementEnsemble, cfg: InitializerConfig,
                rng: Optional[np.random.Generator] = None) -> Signal:
    """Dispatch on cfg.kind; random kind draws from rng (required)."""
    if cfg.kind == RANDOM:
        if rng is None:
            raise ValueError("random kind needs an rng")
        return random_init(ensemble.n, ensemble.field, rng)
    return spectral_init(ensemble, cfg).x


def reserve_prefix(ensemble: MeasurementEnsemble, k: int) -> tuple[MeasurementEnsemble, MeasurementEnsemble]:
    """Split off the first k measurements (for initialization) from the rest
    (for recovery), so the anchor and the constraints use disjoint data."""
    if not 1 <= k < ensemble.m:
        raise ValueError(f"prefix size must be in [1, {ensemble.m - 1}], got {k}")

    def part(sl: slice) -> MeasurementEnsemble:
        return MeasurementEnsemble(
            vectors=ensemble.vectors[sl],
            b=ensemble.b[sl],
            eta=ensemble.eta[sl],
            field=ensemble.field,
            normalized=ensemble.normalized,
            seed=ensemble.seed,
        )

    return part(slice(None, k)), part(slice(k, None))
