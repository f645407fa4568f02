"""Small dense matrix kernels: commutators, a batched (6,6) Pade matrix
exponential with scaling and squaring, and flop accounting.

All kernels accept stacks of matrices with shape ``(..., p, p)``; the
integrators evaluate thousands of independent one-step flow maps at once.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

__all__ = [
    "FlopTally",
    "PADE_ORDER",
    "PADE_COEFFS",
    "commutator",
    "expm",
    "expm_flops",
    "eval_flops",
    "scheme_term_count",
    "SCHEME_LABELS",
]

PADE_ORDER = 6
# scaled 1-norm target before the rational approximation is applied
SCALE_THRESHOLD = 0.5


def _pade_coefficients(m):
    return tuple(
        Fraction(factorial(2 * m - k) * factorial(m),
                 factorial(2 * m) * factorial(k) * factorial(m - k))
        for k in range(m + 1)
    )


PADE_COEFFS = tuple(float(c) for c in _pade_coefficients(PADE_ORDER))


@dataclass
class FlopTally:
    """Running count of floating point operations, split by operation kind."""

    breakdown: Counter = field(default_factory=Counter)

    @property
    def count(self) -> int:
        return int(sum(self.breakdown.values()))

    def add(self, kind: str, flops) -> None:
        flops = int(flops)
        if flops < 0:
            raise ValueError("flop counts are non-negative")
        self.breakdown[kind] += flops

    def merge(self, other: "FlopTally") -> "FlopTally":
        self.breakdown.update(other.breakdown)
        return self

    def __repr__(self):
        return f"FlopTally(count={self.count}, breakdown={dict(self.breakdown)})"


def _check_square(a, name="a"):
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def commutator(a, b):
    """Return ``a @ b - b @ a`` (broadcast over leading axes)."""
    a = _check_square(a, "a")
    b = _check_square(b, "b")
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def _matmul_flops(p):
    return 2 * p ** 3 - p ** 2


def expm_flops(p, squarings=0):
    """Counted flops of one (6,6) Pade exponential of a p x p matrix.

    The nominal figure quoted for this approximation is ``6 p**3``; this
    counts the three powers, the two polynomial products, the LU solve and
    every squaring actually performed.
    """
    powers = 3 * _matmul_flops(p)           # A2, A4, A6
    poly = _matmul_flops(p) + 12 * p ** 2   # A @ (odd part), 7 scaled adds
    solve = (2 * p ** 3) // 3 + 2 * p ** 3  # LU + p right-hand sides
    return powers + poly + solve + squarings * _matmul_flops(p) + 2 * p ** 2


def expm(a, tally: FlopTally | None = None):
    """Matrix exponential by (6,6) Pade approximation with scaling and squaring.

    ``a`` may be a single matrix or a stack ``(..., p, p)``.  Each matrix is
    scaled by its own power of two so that the scaled 1-norm is at most 0.5.
    Raises ``FloatingPointError`` when squaring overflows.
    """
    a = _check_square(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("expm input has non-finite entries")
    p = a.shape[-1]
    batch = a.shape[:-2]
    flat = a.reshape((-1, p, p))
    norms = np.abs(flat).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.where(norms > SCALE_THRESHOLD,
                     np.ceil(np.log2(np.maximum(norms, 1e-300) / SCALE_THRESHOLD)), 0)
    s = s.astype(int)
    x = flat / np.ldexp(1.0, s)[:, None, None]

    c = PADE_COEFFS
    eye = np.eye(p)
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x4 @ x2
    u = x @ (c[1] * eye + c[3] * x2 + c[5] * x4)
    v = c[0] * eye + c[2] * x2 + c[4] * x4 + c[6] * x6
    r = np.linalg.solve(v - u, v + u)

    smax = int(s.max()) if s.size else 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(smax):
            idx = s > k
            if idx.all():
                r = r @ r
            else:
                r[idx] = r[idx] @ r[idx]
    if not np.all(np.isfinite(r)):
        bad = int(np.argmax(~np.isfinite(r).all(axis=(-2, -1))))
        raise FloatingPointError(
            f"expm overflow while squaring: 1-norm {norms[bad]:.3e}, "
            f"{s[bad]} squarings")
    if tally is not None:
        tally.add("expm", sum(expm_flops(p, int(k)) for k in s))
    return r.reshape(batch + (p, p))


# -- evaluation effort model -------------------------------------------------

SCHEME_LABELS = (
    "neumann-05", "neumann-1", "neumann-15",
    "magnus-05", "magnus-1", "magnus-15",
    "magnus-ua-1", "magnus-ua-15",
    "rk32-additive",
)


def scheme_term_count(scheme_label, d):
    """Number of path-dependent terms plus one precombined deterministic block.

    Counted from the term lists assembled by :mod:`stratflow.integrators`
    for a system with generic (non-commuting) diffusion matrices.
    """
    if scheme_label not in SCHEME_LABELS or scheme_label == "rk32-additive":
        raise KeyError(f"unknown flow-map scheme {scheme_label!r}")
    from .integrators import term_count

    return term_count(scheme_label, d)


def eval_flops(scheme_label, p, d=2):
    """Per-step evaluation cost ``c_M p**2 + c_E`` in flops.

    ``c_M`` counts scalar-matrix multiplications and matrix additions in the
    truncated expansion; ``c_E = 6 p**3`` is the nominal exponential cost and
    only applies to Magnus-type schemes.  The additive Runge-Kutta scheme
    evaluates the quadratic Riccati field ``2d + 1`` times.
    """
    if scheme_label not in SCHEME_LABELS:
        raise KeyError(f"unknown scheme {scheme_label!r}")
    if scheme_label == "rk32-additive":
        return (2 * d + 1) * (4 * p ** 3 + 6 * p ** 2) + 12 * d * p ** 2
    c_m = 2 * scheme_term_count(scheme_label, d) - 1
    c_e = 6 * p ** 3 if scheme_label.startswith("magnus") else 0
    return c_m * p ** 2 + c_e
