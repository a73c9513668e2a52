"""Problem instances: true signals, measurement ensembles, noise, anchors.

A measurement is b_i^2 = |<a_i, x0>|^2 + eta_i. The anchor (approximation)
vector xhat pins the global phase: the truth stored on an instance is always
aligned with xhat, i.e. <truth, xhat> is real and nonnegative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .linalg import (
    COMPLEX,
    REAL,
    Field,
    Signal,
    align,
    angle_between,
    entries_of,
    phase,
)

UNIT_SPHERE = "unit-sphere"
GAUSSIAN = "gaussian"

_KINDS = (UNIT_SPHERE, GAUSSIAN)


# ---------------------------------------------------------------------------
# noise models


@dataclass(frozen=True)
class NonnegUniform:
    """eta_i uniform in [0, level*bhat_i]: nonnegative, ratio-bounded noise."""

    level: float

    def draw(self, bhat_sq: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.level < 0:
            raise ValueError("noise level must be nonnegative")
        bhat = np.sqrt(bhat_sq)
        return rng.uniform(0.0, 1.0, bhat.size) * self.level * bhat


@dataclass(frozen=True)
class SymmetricUniform:
    """eta_i uniform in [-level*bhat_i^2, +level*bhat_i^2], level < 1."""

    level: float

    def draw(self, bhat_sq: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if not 0 <= self.level < 1:
            raise ValueError("symmetric noise level must lie in [0, 1)")
        return rng.uniform(-1.0, 1.0, bhat_sq.size) * self.level * bhat_sq


@dataclass(frozen=True)
class RelativeBounded:
    """eta_i uniform in [-r*bhat_i^2, +r*bhat_i], bounded in both ratio
    conventions (eta_i/bhat_i <= r and eta_i > -bhat_i^2 for r < 1)."""

    r: float

    def draw(self, bhat_sq: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if not 0 <= self.r < 1:
            raise ValueError("relative noise bound must lie in [0, 1)")
        bhat = np.sqrt(bhat_sq)
        lo, hi = -self.r * bhat_sq, self.r * bhat
        return lo + rng.uniform(0.0, 1.0, bhat.size) * (hi - lo)


NoiseModel = Optional[Union[NonnegUniform, SymmetricUniform, RelativeBounded]]


def apply_noise(bhat_sq, noise_model: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Draw eta for clean squared magnitudes; all b_i^2 + eta_i must stay > 0."""
    bhat_sq = np.asarray(bhat_sq, dtype=float)
    if noise_model is None:
        return np.zeros_like(bhat_sq)
    eta = noise_model.draw(bhat_sq, rng)
    total = bhat_sq + eta
    bad = np.flatnonzero((total < 0.0) | ((total == 0.0) & (eta != 0.0)))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"noise drives b_{i}^2 = {total[i]:g} nonpositive")
    return eta


# ---------------------------------------------------------------------------
# core containers


@dataclass(frozen=True, eq=False)
class MeasurementEnsemble:
    """m measurement vectors (rows a_i), magnitudes b, noise eta, field tag."""

    vectors: np.ndarray  # (m, n) complex128, row i = a_i
    b: np.ndarray  # (m,) nonnegative
    eta: np.ndarray  # (m,)
    field: Field
    normalized: bool
    seed: int

    def __post_init__(self):
        a = np.array(self.vectors, dtype=np.complex128, copy=True)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("vectors must form a nonempty (m, n) array")
        b = np.array(self.b, dtype=float, copy=True).reshape(-1)
        eta = np.array(self.eta, dtype=float, copy=True).reshape(-1)
        if b.size != a.shape[0] or eta.size != a.shape[0]:
            raise ValueError("b and eta must have one entry per measurement vector")
        if np.any(b < 0):
            raise ValueError("magnitudes b must be nonnegative")
        if self.field == REAL and np.any(a.imag != 0.0):
            raise ValueError("real-field ensemble has complex measurement vectors")
        if self.normalized:
            norms = np.linalg.norm(a, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-12):
                raise ValueError("normalized flag set but some row is not unit-norm")
        for arr in (a, b, eta):
            arr.setflags(write=False)
        object.__setattr__(self, "vectors", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "eta", eta)

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def forward_matrix(self) -> np.ndarray:
        """Matrix M with (M x)_i = <a_i, x>; an (m, n) complex array."""
        return np.conj(self.vectors)

    def measure(self, x) -> np.ndarray:
        """Inner products <a_i, x> for all i."""
        return self.forward_matrix() @ entries_of(x)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Ensemble plus anchor xhat and (optionally) the aligned truth x0."""

    ensemble: MeasurementEnsemble
    xhat: Signal
    truth: Optional[Signal] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        if len(self.xhat) != self.ensemble.n:
            raise ValueError("xhat dimension does not match the ensemble")
        if self.truth is not None:
            if len(self.truth) != self.ensemble.n:
                raise ValueError("truth dimension does not match the ensemble")
            ip = np.vdot(self.truth.entries, self.xhat.entries)
            scale = self.truth.norm * self.xhat.norm
            if scale > 0 and abs(ip.imag) > 1e-9 * scale:
                raise ValueError("truth is not aligned with xhat")

    def with_xhat(self, xhat: Signal) -> "ProblemInstance":
        """Attach a new anchor; re-align truth to it and recompute alpha."""
        if self.truth is None:
            return replace(self, xhat=xhat, alpha=None)
        truth = align(self.truth, xhat)
        alpha = 1.0 - (2.0 / np.pi) * angle_between(truth, xhat)
        return ProblemInstance(self.ensemble, xhat, truth, alpha)


# ---------------------------------------------------------------------------
# sampling


def sample_unit_sphere(n: int, field: Field, rng: np.random.Generator) -> Signal:
    """Uniform point on the unit sphere of R^n or C^n."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if field == REAL:
        v = rng.standard_normal(n).astype(np.complex128)
    else:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    nrm = np.linalg.norm(v)
    while nrm == 0.0:  # probability zero, but keep the contract total
        v = rng.standard_normal(n) + (1j * rng.standard_normal(n) if field == COMPLEX else 0)
        nrm = np.linalg.norm(v)
    return Signal(v / nrm, field)


def _sample_rows(m: int, n: int, field: Field, kind: str, rng: np.random.Generator,
                 normalize: bool) -> np.ndarray:
    if field == REAL:
        a = rng.standard_normal((m, n)).astype(np.complex128)
    else:
        a = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2.0)
    if kind == UNIT_SPHERE or normalize:
        a /= np.linalg.norm(a, axis=1, keepdims=True)
    return a


def make_approx_at_angle(truth: Signal, beta: float, rng: np.random.Generator) -> Signal:
    """Anchor at an exact angle beta from truth, same norm, aligned with truth.

    Built as cos(beta)*t + sin(beta)*u with u unit and orthogonal to truth in
    the complex inner product; n=1 complex falls back to the R^2 isomorphism
    (u = j*t), where only the real part of <truth, result> is controlled.
    """
    if not 0.0 <= beta <= np.pi / 2 + 1e-15:
        raise ValueError("beta must lie in [0, pi/2]")
    t = truth.entries
    tn = np.linalg.norm(t)
    if tn == 0.0:
        raise ValueError("truth must be nonzero")
    if beta == 0.0:
        return Signal(t, truth.field)
    unit = t / tn
    if truth.n == 1:
        if truth.field == REAL:
            raise ValueError("no orthogonal direction exists for n=1 real")
        u = 1j * unit * (1.0 if rng.uniform() < 0.5 else -1.0)
    else:
        u = sample_unit_sphere(truth.n, truth.field, rng).entries
        u = u - unit * np.vdot(unit, u)
        un = np.linalg.norm(u)
        while un < 1e-12:  # resample the measure-zero collinear draw
            u = sample_unit_sphere(truth.n, truth.field, rng).entries
            u = u - unit * np.vdot(unit, u)
            un = np.linalg.norm(u)
        u /= un
    out = (np.cos(beta) * unit + np.sin(beta) * u) * tn
    if truth.field == REAL:
        out = out.real.astype(np.complex128)
    return Signal(out, truth.field)


def gen_instance(
    n: int,
    m: int,
    field: Field = COMPLEX,
    kind: str = UNIT_SPHERE,
    noise: NoiseModel = None,
    seed: int = 0,
    truth_norm: float = 1.0,
) -> ProblemInstance:
    """Sample a full problem instance, deterministically from the seed.

    Draw order: truth, measurement rows, noise, anchor. The anchor is a fresh
    random unit vector; attach a different policy with instance.with_xhat.
    Rows are unit-normalized for the unit-sphere kind and whenever noise is
    present (the noise ratios are defined against unit-norm rows).
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be at least 1")
    if kind not in _KINDS:
        raise ValueError(f"unknown ensemble kind {kind!r}")
    if truth_norm <= 0:
        raise ValueError("truth_norm must be positive")
    rng = np.random.default_rng(seed)
    truth = Signal(sample_unit_sphere(n, field, rng).entries * truth_norm, field)
    normalize = noise is not None
    a = _sample_rows(m, n, field, kind, rng, normalize)
    bhat_sq = np.abs(np.conj(a) @ truth.entries) ** 2
    eta = apply_noise(bhat_sq, noise, rng)
    b_sq = bhat_sq + eta
    bad = np.flatnonzero(b_sq < 0.0)
    if bad.size:
        raise ValueError(f"noise makes b_{int(bad[0])}^2 = {b_sq[bad[0]]:g} negative")
    ensemble = MeasurementEnsemble(
        vectors=a,
        b=np.sqrt(b_sq),
        eta=eta,
        field=field,
        normalized=(kind == UNIT_SPHERE) or normalize,
        seed=seed,
    )
    xhat = sample_unit_sphere(n, field, rng)
    truth = align(truth, xhat)
    alpha = 1.0 - (2.0 / np.pi) * angle_between(truth, xhat)
    return ProblemInstance(ensemble, xhat, truth, alpha)


# ---------------------------------------------------------------------------
# JSON instance files


def _pairs(arr: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in arr]


def _from_pairs(rows, what: str) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim < 2 or arr.shape[-1] != 2:
        raise ValueError(f"{what} must be a list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def instance_to_dict(instance: ProblemInstance) -> dict:
    ens = instance.ensemble
    out = {
        "n": ens.n,
        "m": ens.m,
        "field": ens.field,
        "seed": int(ens.seed),
        "A": [_pairs(row) for row in ens.vectors],
        "b": [float(v) for v in ens.b],
        "eta": [float(v) for v in ens.eta],
        "xhat": _pairs(instance.xhat.entries),
    }
    if instance.truth is not None:
        out["x0"] = _pairs(instance.truth.entries)
    return out


def instance_from_dict(data: dict) -> ProblemInstance:
    for key in ("n", "m", "field", "seed", "A", "b", "eta", "xhat"):
        if key not in data:
            raise ValueError(f"instance file is missing {key!r}")
    field = data["field"]
    if field not in (REAL, COMPLEX):
        raise ValueError(f"unknown field {field!r}")
    a = _from_pairs(data["A"], "A")
    if a.ndim != 2 or a.shape != (data["m"], data["n"]):
        raise ValueError("A has the wrong shape for the declared (m, n)")
    norms = np.linalg.norm(a, axis=1)
    ensemble = MeasurementEnsemble(
        vectors=a,
        b=np.asarray(data["b"], dtype=float),
        eta=np.asarray(data["eta"], dtype=float),
        field=field,
        normalized=bool(np.all(np.abs(norms - 1.0) <= 1e-12)),
        seed=int(data["seed"]),
    )
    xhat = Signal(_from_pairs(data["xhat"], "xhat"), field)
    truth = Signal(_from_pairs(data["x0"], "x0"), field) if "x0" in data else None
    alpha = None
    if truth is not None:
        alpha = 1.0 - (2.0 / np.pi) * angle_between(truth, xhat)
    return ProblemInstance(ensemble, xhat, truth, alpha)


def write_instance(instance: ProblemInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh)
        fh.write("\n")


def read_instance(path) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))
