"""Field-generic dense vector kernel: phase and alignment conventions.

The inner product is conjugate-linear in the first argument, <a,b> = a* b.
Real-field data lives in the same complex container with an enforced
zero-imaginary invariant, so every downstream operation is written once.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Literal, Sequence, Union

import numpy as np

Field = Literal["real", "complex"]

REAL: Field = "real"
COMPLEX: Field = "complex"

_FIELDS = (REAL, COMPLEX)

ArrayLike = Union["Signal", Sequence[complex], np.ndarray]


@dataclass(frozen=True, eq=False)
class Signal:
    """Dense length-n vector over R or C, stored as complex128.

    Immutable value type: the entry buffer is copied on construction and
    marked read-only.
    """

    entries: np.ndarray
    field: Field = COMPLEX

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.complex128, copy=True).reshape(-1)
        if arr.size < 1:
            raise ValueError("signal needs at least one entry")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("signal entries must be finite")
        if self.field not in _FIELDS:
            raise ValueError(f"unknown field {self.field!r}")
        if self.field == REAL and np.any(arr.imag != 0.0):
            raise ValueError("real-field signal has nonzero imaginary part")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    def __len__(self) -> int:
        return self.entries.size

    @property
    def n(self) -> int:
        return self.entries.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


def entries_of(x: ArrayLike) -> np.ndarray:
    """Raw complex128 view of a Signal or array-like."""
    if isinstance(x, Signal):
        return x.entries
    return np.asarray(x, dtype=np.complex128).reshape(-1)


def field_of(x: ArrayLike, default: Field = COMPLEX) -> Field:
    return x.field if isinstance(x, Signal) else default


def phase(z):
    """z/|z| for z != 0 and phase(0) = 1; works on scalars and arrays."""
    arr = np.asarray(z, dtype=np.complex128)
    mag = np.abs(arr)
    safe = np.where(mag > 0.0, mag, 1.0)
    out = np.where(mag > 0.0, arr / safe, 1.0 + 0.0j)
    if out.ndim == 0:
        return complex(out)
    return out


def inner(a: ArrayLike, b: ArrayLike) -> complex:
    """<a,b> = sum_k conj(a_k) b_k, conjugate-linear in the first slot."""
    va, vb = entries_of(a), entries_of(b)
    if va.size != vb.size:
        raise ValueError(f"dimension mismatch: {va.size} vs {vb.size}")
    return complex(np.vdot(va, vb))


def angle_between(x: ArrayLike, y: ArrayLike) -> float:
    """arccos(<x,y>_Re / (||x|| ||y||)) in [0, pi], cosine clamped to [-1,1]."""
    vx, vy = entries_of(x), entries_of(y)
    nx, ny = np.linalg.norm(vx), np.linalg.norm(vy)
    if nx == 0.0 or ny == 0.0:
        raise ValueError("angle_between requires nonzero vectors")
    cos = np.real(np.vdot(vx, vy)) / (nx * ny)
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def align(x: ArrayLike, ref: ArrayLike):
    """Rotate x by the global phase making <x,ref> real and nonnegative.

    Returns the same kind of object it was given (Signal in, Signal out).
    """
    vref = entries_of(ref)
    if np.linalg.norm(vref) == 0.0:
        raise ValueError("align requires a nonzero reference")
    vx = entries_of(x)
    omega = phase(np.vdot(vx, vref))
    rotated = omega * vx
    if isinstance(x, Signal):
        if x.field == REAL:
            rotated = rotated.real.astype(np.complex128)
        return Signal(rotated, x.field)
    return rotated


def norm(x: ArrayLike) -> float:
    return float(np.linalg.norm(entries_of(x)))
