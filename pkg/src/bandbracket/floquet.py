"""Floquet fiber matrices H(theta) = Delta(theta) + q and band scans over the torus."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import intervals
from .graph_model import PeriodicGraphSpec, degrees, require_valid
from .hermitian import HermitianMatrix

DEFAULT_GRID = 32
DEFAULT_FLAT_TOL = 1e-8
DEFAULT_GAP_TOL = 1e-9
REFINE_FACTOR = 8
_CHUNK = 4096


class BandScanError(RuntimeError):
    def __init__(self, theta, cause):
        self.theta = tuple(float(t) for t in theta)
        super().__init__(f"eigensolver failed at theta={list(self.theta)}: {cause}")


def laplacian_batch(spec: PeriodicGraphSpec, thetas: np.ndarray) -> np.ndarray:
    """Delta(theta) for every row of ``thetas``; returns shape (M, nu, nu)."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if thetas.shape[1] != spec.dimension:
        raise ValueError(f"theta has {thetas.shape[1]} components, expected {spec.dimension}")
    m, nu = thetas.shape[0], spec.nu
    out = np.zeros((m, nu, nu), dtype=complex)
    kappa = degrees(spec).kappa
    idx = np.arange(nu)
    out[:, idx, idx] = np.asarray(kappa, dtype=float)
    if not spec.edges:
        return out
    src, dst, tau = spec.edge_arrays()
    phases = np.exp(1j * (thetas @ tau.T))
    for e in range(len(src)):
        j, k, ph = src[e], dst[e], phases[:, e]
        if j == k:
            out[:, j, j] -= 2.0 * ph.real
        else:
            out[:, j, k] -= ph
            out[:, k, j] -= ph.conj()
    return out


def fiber_batch(spec: PeriodicGraphSpec, thetas: np.ndarray) -> np.ndarray:
    out = laplacian_batch(spec, thetas)
    idx = np.arange(spec.nu)
    out[:, idx, idx] += spec.potentials
    return out


def assemble_laplacian(spec: PeriodicGraphSpec, theta: Sequence[float]) -> HermitianMatrix:
    require_valid(spec)
    return HermitianMatrix(laplacian_batch(spec, np.asarray(theta, dtype=float)[None, :])[0])


def assemble_fiber(spec: PeriodicGraphSpec, theta: Sequence[float]) -> HermitianMatrix:
    require_valid(spec)
    return HermitianMatrix(fiber_batch(spec, np.asarray(theta, dtype=float)[None, :])[0])


@dataclass(frozen=True)
class TorusGrid:
    n: int
    dimension: int

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError(f"grid size must be even and >= 2, got {self.n}")
        if self.dimension < 1:
            raise ValueError("grid dimension must be >= 1")

    @property
    def size(self) -> int:
        return self.n ** self.dimension

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / self.n

    def points(self) -> np.ndarray:
        axis = self.spacing * np.arange(self.n)
        mesh = np.meshgrid(*([axis] * self.dimension), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class BandTable:
    """Sampled eigenvalues: ``values[i, n]`` is lambda_{n+1} at ``thetas[i]``."""

    thetas: np.ndarray
    values: np.ndarray
    grid_n: int

    @property
    def nu(self) -> int:
        return self.values.shape[1]

    @property
    def lo(self) -> np.ndarray:
        return self.values.min(axis=0)

    @property
    def hi(self) -> np.ndarray:
        return self.values.max(axis=0)


def _eigvals(spec: PeriodicGraphSpec, thetas: np.ndarray) -> np.ndarray:
    mats = fiber_batch(spec, thetas)
    try:
        return np.linalg.eigvalsh(mats)
    except np.linalg.LinAlgError:
        for th, mat in zip(thetas, mats):
            try:
                np.linalg.eigvalsh(mat)
            except np.linalg.LinAlgError as exc:
                raise BandScanError(th, exc) from exc
        raise


def _workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("THREADS", "1") or 1)
    return max(1, workers)


def eigenvalues_at(spec: PeriodicGraphSpec, thetas: np.ndarray, workers: int | None = None,
                   chunk: int = _CHUNK) -> np.ndarray:
    """Sorted fiber eigenvalues at each row of ``thetas``, shape (M, nu)."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    chunks = [thetas[i:i + chunk] for i in range(0, len(thetas), chunk)]
    workers = _workers(workers)
    if workers == 1 or len(chunks) == 1:
        parts = [_eigvals(spec, c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _eigvals(spec, c), chunks))
    if not parts:
        return np.zeros((0, spec.nu))
    return np.concatenate(parts, axis=0)


def sample_bands(spec: PeriodicGraphSpec, grid: TorusGrid | int = DEFAULT_GRID,
                 workers: int | None = None, chunk: int = _CHUNK) -> BandTable:
    require_valid(spec)
    if isinstance(grid, int):
        grid = TorusGrid(grid, spec.dimension)
    if grid.dimension != spec.dimension:
        raise ValueError(f"grid dimension {grid.dimension} != spec dimension {spec.dimension}")
    thetas = grid.points()
    return BandTable(thetas, eigenvalues_at(spec, thetas, workers, chunk), grid.n)


def refine_bands(spec: PeriodicGraphSpec, table: BandTable, factor: int = REFINE_FACTOR,
                 workers: int | None = None) -> BandTable:
    """Re-scan the 3^d cells around every extremal grid point at ``factor`` times the resolution.

    Extra samples are appended, so band extrema can only widen towards the true ones.
    """
    h = 2.0 * math.pi / table.grid_n
    centers = sorted({int(i) for i in np.concatenate([table.values.argmin(axis=0), table.values.argmax(axis=0)])})
    steps = np.arange(-factor, factor + 1) * (h / factor)
    d = table.thetas.shape[1]
    local = np.array(list(itertools.product(steps, repeat=d)))
    extra = np.concatenate([table.thetas[c] + local for c in centers], axis=0)
    extra = np.mod(extra, 2.0 * math.pi)
    values = eigenvalues_at(spec, extra, workers)
    return BandTable(np.concatenate([table.thetas, extra]), np.concatenate([table.values, values]), table.grid_n)


@dataclass(frozen=True)
class BandIntervals:
    bands: tuple[tuple[float, float], ...]
    flat: tuple[bool, ...]
    gaps: tuple[tuple[float, float], ...]

    @property
    def total_length(self) -> float:
        return intervals.total_length(self.bands)


def band_intervals(table: BandTable, flat_tol: float = DEFAULT_FLAT_TOL,
                   gap_tol: float = DEFAULT_GAP_TOL) -> BandIntervals:
    if table.values.size == 0:
        raise ValueError("empty band table")
    lo, hi = table.lo, table.hi
    bands = tuple((float(a), float(b)) for a, b in zip(lo, hi))
    # sampling can suggest flatness, never prove it
    flat = tuple(bool(b - a <= flat_tol * max(1.0, abs(b))) for a, b in bands)
    return BandIntervals(bands, flat, tuple(intervals.gaps(bands, gap_tol)))


@dataclass(frozen=True, eq=False)
class BandPath:
    arclength: np.ndarray
    thetas: np.ndarray
    values: np.ndarray

    def rows(self):
        for s, th, lam in zip(self.arclength, self.thetas, self.values):
            yield (float(s), *map(float, th), *map(float, lam))


def band_path(spec: PeriodicGraphSpec, waypoints: Sequence[Sequence[float]], steps: int) -> BandPath:
    """Eigenvalues along the piecewise-linear path through ``waypoints``, ``steps`` per segment."""
    require_valid(spec)
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    wp = np.asarray(waypoints, dtype=float)
    if wp.ndim != 2 or len(wp) < 2:
        raise ValueError("need at least two waypoints")
    if wp.shape[1] != spec.dimension:
        raise ValueError(f"waypoints must have {spec.dimension} components")
    t = np.arange(steps) / steps
    pts = [a + t[:, None] * (b - a) for a, b in zip(wp[:-1], wp[1:])]
    thetas = np.concatenate(pts + [wp[-1:]], axis=0)
    seg = np.linalg.norm(np.diff(thetas, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    return BandPath(s, thetas, eigenvalues_at(spec, thetas))
