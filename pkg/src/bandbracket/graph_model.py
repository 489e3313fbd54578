"""Periodic graphs given by their fundamental (quotient) graph.

A ``PeriodicGraphSpec`` lists the vertex classes of one period cell together
with the unoriented edges between them.  Every stored edge carries the integer
cell offset ``index`` of its far endpoint, so the stored edge ``(j, k, tau)``
joins ``v_j + m`` to ``v_k + m + tau`` for every ``m`` in Z^d.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

IntVec = tuple[int, ...]


class SpecError(ValueError):
    """Structural problem in a periodic graph specification."""


class InvalidGraphError(ValueError):
    """The specification is well formed but does not describe a connected periodic graph."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(report.reasons) or "invalid periodic graph")


@dataclass(frozen=True)
class VertexClass:
    id: Hashable
    potential: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "potential", float(self.potential))
        if not math.isfinite(self.potential):
            raise SpecError(f"vertex {self.id!r}: potential is not finite")


@dataclass(frozen=True)
class FundamentalEdge:
    from_class: Hashable
    to_class: Hashable
    index: IntVec

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(int(t) for t in self.index))

    @property
    def is_loop(self) -> bool:
        """True for a genuine loop of the periodic graph (same class, zero index)."""
        return self.from_class == self.to_class and not any(self.index)

    @property
    def crosses_cell(self) -> bool:
        return any(self.index)


@dataclass(frozen=True)
class PeriodicGraphSpec:
    dimension: int
    classes: tuple[VertexClass, ...]
    edges: tuple[FundamentalEdge, ...] = ()
    _pos: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "edges", tuple(self.edges))
        if isinstance(self.dimension, bool) or int(self.dimension) != self.dimension:
            raise SpecError(f"dimension must be an integer, got {self.dimension!r}")
        if self.dimension < 1:
            raise SpecError(f"dimension must be >= 1, got {self.dimension}")
        if not self.classes:
            raise SpecError("empty class list")
        pos: dict = {}
        for j, vc in enumerate(self.classes):
            if vc.id in pos:
                raise SpecError(f"duplicate vertex id {vc.id!r}")
            pos[vc.id] = j
        for n, e in enumerate(self.edges):
            for end in (e.from_class, e.to_class):
                if end not in pos:
                    raise SpecError(f"edge {n} ({e.from_class!r}, {e.to_class!r}): unknown class id {end!r}")
            if len(e.index) != self.dimension:
                raise SpecError(
                    f"edge {n} ({e.from_class!r}, {e.to_class!r}): index {list(e.index)} "
                    f"has length {len(e.index)}, expected {self.dimension}"
                )
        object.__setattr__(self, "_pos", pos)

    @property
    def nu(self) -> int:
        return len(self.classes)

    @property
    def ids(self) -> list:
        return [vc.id for vc in self.classes]

    @property
    def potentials(self) -> np.ndarray:
        return np.array([vc.potential for vc in self.classes], dtype=float)

    def position(self, class_id: Hashable) -> int:
        return self._pos[class_id]

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (from positions, to positions, index matrix) of the stored edges."""
        src = np.array([self._pos[e.from_class] for e in self.edges], dtype=int)
        dst = np.array([self._pos[e.to_class] for e in self.edges], dtype=int)
        tau = np.array([e.index for e in self.edges], dtype=int).reshape(len(self.edges), self.dimension)
        return src, dst, tau

    def with_potentials(self, potentials: Sequence[float]) -> "PeriodicGraphSpec":
        if len(potentials) != self.nu:
            raise SpecError(f"expected {self.nu} potentials, got {len(potentials)}")
        classes = tuple(VertexClass(vc.id, q) for vc, q in zip(self.classes, potentials))
        return PeriodicGraphSpec(self.dimension, classes, self.edges)


def make_spec(dimension: int, classes, edges) -> PeriodicGraphSpec:
    """Convenience constructor from plain tuples.

    ``classes`` is a sequence of ids or ``(id, potential)`` pairs, ``edges`` a
    sequence of ``(from_id, to_id, index)`` triples.
    """
    vcs = []
    for c in classes:
        if isinstance(c, VertexClass):
            vcs.append(c)
        elif isinstance(c, tuple):
            vcs.append(VertexClass(*c))
        else:
            vcs.append(VertexClass(c))
    fes = [e if isinstance(e, FundamentalEdge) else FundamentalEdge(e[0], e[1], tuple(e[2])) for e in edges]
    return PeriodicGraphSpec(dimension, tuple(vcs), tuple(fes))


@dataclass(frozen=True)
class DegreeProfile:
    kappa: tuple[int, ...]
    kappa_plus: int
    loops2: tuple[int, ...]


@dataclass(frozen=True)
class CycleLattice:
    generators: tuple[IntVec, ...]
    invariant_factors: tuple[int, ...]

    @property
    def rank(self) -> int:
        return sum(1 for f in self.invariant_factors if f != 0)

    @property
    def index(self) -> int:
        """Product of the nonzero invariant factors (the index when the rank is full)."""
        return math.prod(f for f in self.invariant_factors if f != 0)

    @property
    def is_full(self) -> bool:
        return all(f == 1 for f in self.invariant_factors)


@dataclass(frozen=True)
class ValidationReport:
    dimension_ok: bool
    multigraph_connected: bool
    lattice: CycleLattice | None
    degrees_finite: bool = True
    reasons: tuple[str, ...] = ()

    @property
    def lattice_full(self) -> bool:
        return self.lattice is not None and self.lattice.is_full

    @property
    def valid(self) -> bool:
        return self.dimension_ok and self.multigraph_connected and self.lattice_full and self.degrees_finite


def degrees(spec: PeriodicGraphSpec) -> DegreeProfile:
    kappa = [0] * spec.nu
    loops2 = [0] * spec.nu
    for e in spec.edges:
        j, k = spec.position(e.from_class), spec.position(e.to_class)
        if j == k:
            # both oriented lifts start at this class
            kappa[j] += 2
            if e.is_loop:
                loops2[j] += 2
        else:
            kappa[j] += 1
            kappa[k] += 1
    return DegreeProfile(tuple(kappa), max(kappa), tuple(loops2))


def _spanning_tree_potential(spec: PeriodicGraphSpec, root: int, edge_order: Sequence[int]):
    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(spec.nu)]
    for n in edge_order:
        e = spec.edges[n]
        j, k = spec.position(e.from_class), spec.position(e.to_class)
        adj[j].append((k, n, +1))
        adj[k].append((j, n, -1))
    p: list[np.ndarray | None] = [None] * spec.nu
    p[root] = np.zeros(spec.dimension, dtype=int)
    tree = set()
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v, n, sign in adj[u]:
            if p[v] is None:
                p[v] = p[u] + sign * np.array(spec.edges[n].index, dtype=int)
                tree.add(n)
                queue.append(v)
    return p, tree


def cycle_lattice(spec: PeriodicGraphSpec, root: int = 0, edge_order: Sequence[int] | None = None) -> CycleLattice | None:
    """Cycle-index lattice of the fundamental multigraph, or None if it is disconnected.

    ``root`` and ``edge_order`` select the spanning tree; the invariant factors
    do not depend on that choice.
    """
    order = list(range(len(spec.edges))) if edge_order is None else list(edge_order)
    p, tree = _spanning_tree_potential(spec, root, order)
    if any(x is None for x in p):
        return None
    gens = []
    for n in order:
        if n in tree:
            continue
        e = spec.edges[n]
        j, k = spec.position(e.from_class), spec.position(e.to_class)
        g = p[j] + np.array(e.index, dtype=int) - p[k]
        gens.append(tuple(int(x) for x in g))
    return CycleLattice(tuple(gens), _invariant_factors(gens, spec.dimension))


def _invariant_factors(gens: Sequence[IntVec], d: int) -> tuple[int, ...]:
    if not gens:
        return (0,) * d
    m = Matrix(d, len(gens), lambda r, c: gens[c][r])
    facs = [abs(int(f)) for f in invariant_factors(m, domain=ZZ)]
    return tuple(facs + [0] * (d - len(facs)))


def validate(spec: PeriodicGraphSpec) -> ValidationReport:
    reasons = []
    dimension_ok = spec.dimension >= 1
    if not dimension_ok:
        reasons.append(f"dimension {spec.dimension} < 1")
    lattice = cycle_lattice(spec)
    connected = lattice is not None
    if not connected:
        reasons.append("fundamental multigraph is disconnected")
    elif not lattice.is_full:
        msg = f"disconnected: cycle lattice index {lattice.index}"
        if lattice.rank < spec.dimension:
            msg += f", rank {lattice.rank} < {spec.dimension}"
        msg += f" (invariant factors {lattice.invariant_factors})"
        reasons.append(msg)
    return ValidationReport(dimension_ok, connected, lattice, True, tuple(reasons))


def require_valid(spec: PeriodicGraphSpec) -> PeriodicGraphSpec:
    report = validate(spec)
    if not report.valid:
        raise InvalidGraphError(report)
    return spec


def shift_gauge(spec: PeriodicGraphSpec, offsets: Sequence[Sequence[int]]) -> PeriodicGraphSpec:
    """Re-anchor class ``j`` at cell ``m_j``: edge ``(j, k, tau)`` gets index ``tau + m_k - m_j``."""
    if len(offsets) != spec.nu:
        raise SpecError(f"expected {spec.nu} offsets, got {len(offsets)}")
    m = np.array(offsets, dtype=int).reshape(spec.nu, -1)
    if m.shape[1] != spec.dimension:
        raise SpecError(f"offsets must have length {spec.dimension}")
    edges = []
    for e in spec.edges:
        j, k = spec.position(e.from_class), spec.position(e.to_class)
        tau = np.array(e.index, dtype=int) + m[k] - m[j]
        edges.append(FundamentalEdge(e.from_class, e.to_class, tuple(int(t) for t in tau)))
    return PeriodicGraphSpec(spec.dimension, spec.classes, tuple(edges))


def sorted_potentials(spec: PeriodicGraphSpec) -> np.ndarray:
    return np.sort(spec.potentials, kind="stable")
