"""Closed-interval unions and the open gaps between them."""

from __future__ import annotations

from typing import Iterable, Sequence

Interval = tuple[float, float]


def intersect(a: Interval, b: Interval, tol: float = 0.0) -> Interval | None:
    """Intersection of closed intervals.

    Endpoints crossing by at most ``tol * max(1, |lo|)`` count as rounding
    noise; the result is then the (widened) point interval between them.
    """
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    if lo <= hi:
        return (lo, hi)
    if lo - hi <= tol * max(1.0, abs(lo)):
        return (hi, lo)
    return None


def union(intervals: Iterable[Interval | None]) -> list[Interval]:
    """Merge closed intervals; touching intervals merge into one."""
    items = sorted(iv for iv in intervals if iv is not None)
    merged: list[list[float]] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def gaps(intervals: Iterable[Interval | None], tol: float = 0.0) -> list[Interval]:
    """Maximal open intervals inside the hull of ``intervals`` that miss all of them.

    Gaps no wider than ``tol * max(1, |lower end|)`` are dropped.
    """
    merged = union(intervals)
    out = []
    for (_, a), (b, _) in zip(merged, merged[1:]):
        if b - a > tol * max(1.0, abs(a)):
            out.append((a, b))
    return out


def total_length(intervals: Sequence[Interval]) -> float:
    return float(sum(hi - lo for lo, hi in intervals))


def contains(outer: Interval | None, inner: Interval, tol: float = 0.0) -> bool:
    if outer is None:
        return False
    return outer[0] - tol * max(1.0, abs(outer[0])) <= inner[0] and inner[1] <= outer[1] + tol * max(1.0, abs(outer[1]))
