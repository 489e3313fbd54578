"""Neumann/Dirichlet bracketing of spectral bands on the finite graph Gamma_N.

Gamma_N keeps every in-cell edge (zero index) and one bridge per cell-crossing
stored edge.  The bridge of stored edge ``(j, k, tau)`` runs from the
representative of class ``j`` to the exterior vertex ``(k, tau)``.  Exterior
vertices are numbered in order of first appearance among the stored edges.

Internally classes are reordered so that inner classes come first; all public
fields that name classes use the original ids.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import intervals
from .floquet import DEFAULT_GAP_TOL, BandIntervals
from .graph_model import PeriodicGraphSpec, degrees, require_valid, shift_gauge, sorted_potentials
from .hermitian import HermitianMatrix, eigen

GAUGE_BUDGET = 100_000
INCLUSION_TOL = 1e-9

Interval = tuple[float, float]


class InclusionError(RuntimeError):
    """A sampled band escaped its bracket.  The bracketing is a theorem, so this signals a bug."""

    def __init__(self, failures):
        self.failures = failures
        super().__init__("band inclusion violated for bands " + ", ".join(str(n) for n, _, _ in failures))


@dataclass(frozen=True)
class NeumannGraph:
    interior_order: tuple[int, ...]
    vertices: tuple[tuple[int, tuple[int, ...]], ...]
    edges: tuple[tuple[int, int], ...]
    rho: tuple[int, ...]
    kappaN: tuple[int, ...]
    beta: int
    nu_D: int
    class_ids: tuple

    @property
    def nu(self) -> int:
        return len(self.interior_order)

    @property
    def nu_N(self) -> int:
        return len(self.vertices)

    @property
    def inner_ids(self) -> list:
        return [self.class_ids[c] for c in self.interior_order[: self.nu_D]]

    def vertex_class(self, v: int) -> int:
        return self.vertices[v][0]


def build_neumann_graph(spec: PeriodicGraphSpec) -> NeumannGraph:
    require_valid(spec)
    nu, d = spec.nu, spec.dimension
    kappa = degrees(spec).kappa
    zero = (0,) * d

    exterior: dict[tuple[int, tuple[int, ...]], int] = {}
    rep_deg = [0] * nu
    raw_edges = []  # endpoints as ("rep", class) or ("ext", key)
    for e in spec.edges:
        j, k = spec.position(e.from_class), spec.position(e.to_class)
        if e.crosses_cell:
            key = (k, e.index)
            exterior.setdefault(key, len(exterior))
            rep_deg[j] += 1
            raw_edges.append((("rep", j), ("ext", key)))
        else:
            rep_deg[j] += 1
            rep_deg[k] += 1
            raw_edges.append((("rep", j), ("rep", k)))

    inner = [j for j in range(nu) if rep_deg[j] == kappa[j]]
    boundary = [j for j in range(nu) if rep_deg[j] != kappa[j]]
    order = tuple(inner + boundary)
    rep_index = {c: i for i, c in enumerate(order)}

    vertices = [(c, zero) for c in order] + [key for key, _ in sorted(exterior.items(), key=lambda kv: kv[1])]

    def vid(end):
        kind, x = end
        return rep_index[x] if kind == "rep" else nu + exterior[x]

    edges = tuple((vid(a), vid(b)) for a, b in raw_edges)
    kappaN = [0] * len(vertices)
    for a, b in edges:
        kappaN[a] += 1
        kappaN[b] += 1

    copies = [1] * nu
    for k, _ in exterior:
        copies[k] += 1
    rho = tuple(copies[c] for c, _ in vertices)

    beta = 2 * sum(1 for e in spec.edges if e.crosses_cell)
    ng = NeumannGraph(order, tuple(vertices), edges, rho, tuple(kappaN), beta, len(inner), tuple(spec.ids))
    _check_neumann_graph(ng, spec)
    return ng


def _check_neumann_graph(ng: NeumannGraph, spec: PeriodicGraphSpec) -> None:
    assert all(ng.rho[v] == 1 for v in range(ng.nu_D)), "inner vertex with rho != 1"
    for (a, b), e in zip(ng.edges, spec.edges):
        if a < ng.nu_D and b < ng.nu_D:
            assert not e.crosses_cell, "edge between inner vertices with nonzero index"
    assert 0 <= ng.nu_D <= ng.nu - 1, "nu_D outside [0, nu-1]"
    assert ng.nu + spec.dimension <= ng.nu_N <= ng.nu + ng.beta // 2, "nu_N outside [nu+d, nu+beta/2]"


def _neumann_laplacian(ng: NeumannGraph) -> np.ndarray:
    n = ng.nu_N
    adj = np.zeros((n, n))
    for a, b in ng.edges:
        # a loop adds 2 to the diagonal multiplicity, matching its degree count
        adj[a, b] += 1
        adj[b, a] += 1
    rho = np.asarray(ng.rho, dtype=float)
    # sqrt of the product keeps the diagonal exactly rho
    return np.sqrt(np.outer(rho, rho)) * (np.diag(np.asarray(ng.kappaN, dtype=float)) - adj)


def build_HN(ng: NeumannGraph, spec: PeriodicGraphSpec) -> HermitianMatrix:
    q = spec.potentials
    qN = np.array([q[c] for c, _ in ng.vertices])
    return HermitianMatrix(_neumann_laplacian(ng) + np.diag(qN))


def build_HD(ng: NeumannGraph, spec: PeriodicGraphSpec) -> HermitianMatrix:
    hn = build_HN(ng, spec).entries
    return HermitianMatrix(hn[: ng.nu_D, : ng.nu_D])


@dataclass(frozen=True, eq=False)
class BracketSpectra:
    lambdaN: np.ndarray
    lambdaD: np.ndarray


def bracket_spectra(ng: NeumannGraph, spec: PeriodicGraphSpec, method: str = "jacobi") -> BracketSpectra:
    return BracketSpectra(eigen(build_HN(ng, spec), method=method).values,
                          eigen(build_HD(ng, spec), method=method).values)


def bracket_intervals(spectra: BracketSpectra, qsorted: Sequence[float], kappa_plus: int,
                      nu: int, nu_D: int, nu_N: int) -> tuple[list[Interval], list[Interval]]:
    """Intervals J_n and J~_n, n = 1..nu (returned 0-based)."""
    lN, lD = spectra.lambdaN, spectra.lambdaD
    if len(lN) != nu_N or len(lD) != nu_D or len(qsorted) != nu:
        raise IndexError(f"inconsistent counts: |lambdaN|={len(lN)} nu_N={nu_N}, "
                         f"|lambdaD|={len(lD)} nu_D={nu_D}, |q|={len(qsorted)} nu={nu}")
    N = lambda n: float(lN[n - 1])  # noqa: E731  1-based access
    D = lambda n: float(lD[n - 1])  # noqa: E731
    q = lambda n: float(qsorted[n - 1])  # noqa: E731
    J, Jt = [], []
    for n in range(1, nu + 1):
        if n <= nu_D:
            J.append((N(n), D(n)))
        else:
            J.append((N(n), q(n) + 2 * kappa_plus))
        if n <= nu - nu_D:
            Jt.append((q(n), N(n + nu_N - nu)))
        else:
            Jt.append((D(n - nu + nu_D), N(n + nu_N - nu)))
    return J, Jt


def estimate_total_band_length(ng: NeumannGraph, spectra: BracketSpectra,
                               spec: PeriodicGraphSpec) -> tuple[float, float]:
    """Two upper bounds for the total band length from the Neumann/Dirichlet spectra."""
    prof = degrees(spec)
    qs = sorted_potentials(spec)
    q = spec.potentials
    nu, nu_D, nu_N = ng.nu, ng.nu_D, ng.nu_N
    lN = spectra.lambdaN
    est1 = 0.0
    for n in range(nu_D, nu):
        c = ng.interior_order[n]
        # loops counted twice, as on the diagonal of the Laplacian matrix
        h = ng.rho[n] * (prof.kappa[c] - prof.loops2[c] + q[c])
        est1 += qs[n] + 2 * prof.kappa_plus - h
    est1 += float(np.sum(lN[nu:nu_N]))
    m = nu - nu_D
    est2 = float(np.sum(lN[nu_N - m:nu_N] - lN[:m]))
    return float(est1), est2


@dataclass(frozen=True)
class Bracketing:
    """Neumann/Dirichlet data and intervals, before comparing against sampled bands."""

    graph: NeumannGraph
    spectra: BracketSpectra
    J: tuple[Interval, ...]
    Jt: tuple[Interval, ...]
    est1: float
    est2: float
    kappa_plus: int


def bracket(spec: PeriodicGraphSpec, method: str = "jacobi") -> Bracketing:
    ng = build_neumann_graph(spec)
    spectra = bracket_spectra(ng, spec, method)
    kp = degrees(spec).kappa_plus
    J, Jt = bracket_intervals(spectra, sorted_potentials(spec), kp, ng.nu, ng.nu_D, ng.nu_N)
    est1, est2 = estimate_total_band_length(ng, spectra, spec)
    return Bracketing(ng, spectra, tuple(J), tuple(Jt), est1, est2, kp)


@dataclass(frozen=True)
class BracketReport:
    bracketing: Bracketing
    Jcap: tuple[Interval | None, ...]
    inclusion: tuple[bool, ...]
    certified_gaps: tuple[Interval, ...]
    total_band_length: float
    gauge: tuple[tuple[int, ...], ...] | None = None

    @property
    def J(self):
        return self.bracketing.J

    @property
    def Jt(self):
        return self.bracketing.Jt

    @property
    def est1(self) -> float:
        return self.bracketing.est1

    @property
    def est2(self) -> float:
        return self.bracketing.est2

    @property
    def inclusion_ok(self) -> bool:
        return all(self.inclusion)

    @property
    def certified_length(self) -> float:
        return intervals.total_length(self.certified_gaps)


def verify_and_certify(bands: BandIntervals, br: Bracketing, tol: float = INCLUSION_TOL,
                       gap_tol: float = DEFAULT_GAP_TOL, strict: bool = True,
                       gauge=None) -> BracketReport:
    if len(bands.bands) != br.graph.nu:
        raise ValueError(f"band count {len(bands.bands)} != nu {br.graph.nu}")
    Jcap = tuple(intervals.intersect(a, b, tol) for a, b in zip(br.J, br.Jt))
    inclusion = tuple(intervals.contains(c, s, tol) for c, s in zip(Jcap, bands.bands))
    if strict and not all(inclusion):
        raise InclusionError([(n + 1, bands.bands[n], Jcap[n]) for n, ok in enumerate(inclusion) if not ok])
    certified = tuple(intervals.gaps(Jcap, gap_tol))
    return BracketReport(br, Jcap, inclusion, certified, bands.total_length, gauge)


@dataclass(frozen=True)
class GaugeSearchResult:
    best: BracketReport
    offsets: tuple[tuple[int, ...], ...]
    examined: int
    certified_by_gauge: tuple[tuple[tuple[tuple[int, ...], ...], tuple[Interval, ...]], ...]


def gauge_search(spec: PeriodicGraphSpec, bands: BandIntervals, radius: int = 0,
                 method: str = "jacobi", strict: bool = True) -> GaugeSearchResult:
    """Try every per-class offset in [-radius, radius]^d and keep the gauge certifying the most gap length.

    Ties go to the lexicographically smallest offset tuple.  Bands are gauge
    invariant, so ``bands`` is computed once by the caller.
    """
    require_valid(spec)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    count = (2 * radius + 1) ** (spec.dimension * spec.nu)
    if count > GAUGE_BUDGET:
        raise ValueError(f"gauge budget exceeded: {count} gauges > {GAUGE_BUDGET}")
    span = range(-radius, radius + 1)
    per_class = list(itertools.product(span, repeat=spec.dimension))
    best = None
    best_len = -math.inf
    best_offsets = None
    seen = []
    for offsets in itertools.product(per_class, repeat=spec.nu):
        shifted = shift_gauge(spec, offsets) if radius else spec
        report = verify_and_certify(bands, bracket(shifted, method), strict=strict, gauge=offsets)
        seen.append((offsets, report.certified_gaps))
        if report.certified_length > best_len:
            best, best_len, best_offsets = report, report.certified_length, offsets
    return GaugeSearchResult(best, best_offsets, len(seen), tuple(seen))
