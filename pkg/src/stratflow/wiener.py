"""Seeded Brownian increments on a two-scale lattice.

Each path draws from its own Philox stream keyed on ``(seed, path)``.  The
stream position of increment ``k`` of component ``i`` is ``i * L + k``
(``L`` lattice points per component), so a path is reproducible no matter
how many paths are generated or in which order.  Uniforms are mapped to
normals by the inverse CDF.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

__all__ = ["WienerGrid", "generate", "generate_paths", "coarsen", "dump", "load"]

_HEADER = struct.Struct("<qdqqQ")


@dataclass(frozen=True)
class WienerGrid:
    """Increments of a d-dimensional Wiener path on ``N*Q`` equal subintervals.

    ``increments`` has shape ``(d, N*Q)`` for a single path, or
    ``(n_paths, d, N*Q)`` when built by :func:`generate_paths`.
    """

    d: int
    T: float
    N: int
    Q: int
    seed: int
    increments: np.ndarray
    paths: tuple = (0,)
    _sums: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        inc = self.increments
        if inc.shape[-2:] != (self.d, self.N * self.Q):
            raise ValueError(f"increments shape {inc.shape} does not match "
                             f"(d, N*Q) = ({self.d}, {self.N * self.Q})")
        inc.setflags(write=False)

    @property
    def dt(self) -> float:
        return self.T / (self.N * self.Q)

    @property
    def h(self) -> float:
        return self.T / self.N

    @property
    def L(self) -> int:
        return self.N * self.Q

    def lattice_sums(self, factor) -> np.ndarray:
        """Sums of ``factor`` adjacent lattice increments, shape ``(..., d, L/factor)``.

        Powers of two are built by repeated pairwise halving and cached, so
        every grid sharing this lattice sees bit-identical partial sums.
        """
        factor = int(factor)
        if factor < 1 or self.L % factor:
            raise ValueError(f"factor {factor} does not divide N*Q = {self.L}")
        if factor in self._sums:
            return self._sums[factor]
        if factor == 1:
            return self.increments
        if factor & (factor - 1) == 0:
            finer = self.lattice_sums(factor // 2)
            out = finer[..., 0::2] + finer[..., 1::2]
        else:
            inc = self.increments
            out = inc.reshape(inc.shape[:-1] + (self.L // factor, factor)).sum(-1)
        out.setflags(write=False)
        self._sums[factor] = out
        return out

    def with_steps(self, N) -> "WienerGrid":
        """The same lattice viewed with ``N`` evaluation steps (shares cached sums)."""
        N = int(N)
        if N < 1 or self.L % N:
            raise ValueError(f"{N} steps do not divide the lattice of {self.L}")
        return WienerGrid(self.d, self.T, N, self.L // N, self.seed, self.increments,
                          self.paths, self._sums)

    def step_increments(self) -> np.ndarray:
        """Evaluation-scale increments, shape ``(..., d, N)``."""
        return self.lattice_sums(self.Q)

    def endpoint(self) -> np.ndarray:
        return self.increments.sum(axis=-1)


def _check(d, T, N, Q):
    if d < 1 or N < 1 or Q < 1:
        raise ValueError(f"need d, N, Q >= 1, got d={d}, N={N}, Q={Q}")
    if not T > 0:
        raise ValueError(f"need T > 0, got {T}")


def _path_normals(seed, path, size):
    bg = np.random.Philox(key=[int(seed) & (2**64 - 1), int(path) & (2**64 - 1)])
    raw = bg.random_raw(size)
    u = (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53 + 2.0 ** -54
    return ndtri(u)


def generate_paths(d, T, N, Q, seed, paths) -> WienerGrid:
    """Grids for several path indices stacked as ``(n_paths, d, N*Q)``."""
    _check(d, T, N, Q)
    paths = tuple(int(p) for p in paths)
    L = N * Q
    scale = np.sqrt(T / L)
    inc = np.empty((len(paths), d, L))
    for k, p in enumerate(paths):
        inc[k] = _path_normals(seed, p, d * L).reshape(d, L)
    inc *= scale
    return WienerGrid(int(d), float(T), int(N), int(Q), int(seed), inc, paths)


def generate(d, T, N, Q, seed, path=0) -> WienerGrid:
    """A single path's increments, i.i.d. Normal(0, T/(N Q)); bit-reproducible."""
    g = generate_paths(d, T, N, Q, seed, (path,))
    return WienerGrid(g.d, g.T, g.N, g.Q, g.seed, g.increments[0].copy(), g.paths)


def coarsen(grid: WienerGrid, factor: int) -> WienerGrid:
    """Sum ``factor`` adjacent increments; the evaluation steps are kept.

    The new grid has ``Q / factor`` subintervals per step when ``factor``
    divides ``Q``; otherwise steps are merged too (``factor`` must then be a
    multiple of ``Q`` dividing ``N*Q``).
    """
    factor = int(factor)
    if factor < 1 or grid.L % factor:
        raise ValueError(f"coarsening factor {factor} does not divide N*Q = {grid.L}")
    if factor == 1:
        return grid
    new = np.array(grid.lattice_sums(factor))
    if grid.Q % factor == 0:
        N, Q = grid.N, grid.Q // factor
    elif factor % grid.Q == 0:
        N, Q = grid.L // factor, 1
    else:
        raise ValueError(f"factor {factor} is neither a divisor nor a multiple of Q = {grid.Q}")
    return WienerGrid(grid.d, grid.T, N, Q, grid.seed, new, grid.paths)


def dump(grid: WienerGrid, path) -> None:
    """Binary replay file: little-endian header (d, T, N, Q, seed) then float64 data."""
    if grid.increments.ndim != 2:
        raise ValueError("dump stores single-path grids")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(grid.d, grid.T, grid.N, grid.Q, grid.seed & (2**64 - 1)))
        fh.write(np.ascontiguousarray(grid.increments, dtype="<f8").tobytes())


def load(path) -> WienerGrid:
    with open(path, "rb") as fh:
        d, T, N, Q, seed = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != d * N * Q:
        raise ValueError(f"payload has {data.size} values, header implies {d * N * Q}")
    return WienerGrid(d, T, N, Q, seed, data.reshape(d, N * Q).copy())
