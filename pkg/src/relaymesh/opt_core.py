"""Scalar search, feasibility bisection and set-partition enumeration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .errors import CapacityError, InfeasibleError, NonFiniteError, ValidationError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2

DEFAULT_PARTITION_CAP = 8


@dataclass(frozen=True)
class SearchSpec:
    lo: float = 0.0
    hi: float = 1.0
    tol: float = 1e-10
    max_iter: int = 500

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError(f"empty search interval [{self.lo}, {self.hi}]")
        if not self.tol > 0:
            raise ValidationError(f"tolerance must be positive, got {self.tol}")

    def iteration_bound(self) -> int:
        """Upper bound on golden-section iterations for this interval and tolerance."""
        ratio = (self.hi - self.lo) / self.tol
        if ratio <= 1.0:
            return 2
        return math.ceil(math.log(ratio) / math.log(1.0 / INV_PHI)) + 2


def _checked(f, x):
    y = f(x)
    if math.isnan(y):
        raise NonFiniteError(f"objective returned NaN at x={x!r}", argument=x)
    return y


def golden_max(f: Callable[[float], float], spec: SearchSpec = SearchSpec()):
    """Maximise a unimodal scalar function on ``[spec.lo, spec.hi]``.

    Returns ``(arg, value)``. The endpoints are evaluated as well, so a
    maximiser sitting on the boundary is returned exactly rather than one
    tolerance inside it. Ties go to the smaller argument.
    """
    a, b = spec.lo, spec.hi
    h = b - a
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc = _checked(f, c)
    fd = _checked(f, d)
    n = min(spec.iteration_bound(), spec.max_iter)
    for _ in range(n):
        if h <= spec.tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + INV_PHI2 * h
            fc = _checked(f, c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + INV_PHI * h
            fd = _checked(f, d)
    best_x, best_f = (c, fc) if fc >= fd else (d, fd)
    for x in (spec.hi, spec.lo):
        fx = _checked(f, x)
        if fx > best_f or (fx == best_f and x < best_x):
            best_x, best_f = x, fx
    return best_x, best_f


def bisect_min_feasible(
    predicate: Callable[[float], bool], lo: float, hi: float, tol: float
) -> float:
    """Smallest ``x`` in ``[lo, hi]`` with ``predicate(x)`` true, to within ``tol``.

    The predicate must be monotone: false below a threshold and true above it.
    The returned value always satisfies the predicate.
    """
    if not tol > 0:
        raise ValidationError("tolerance must be positive")
    if predicate(lo):
        return lo
    if not predicate(hi):
        raise InfeasibleError(f"predicate is false at the upper end hi={hi!r}")
    while hi - lo > tol:
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """Yield every restricted-growth string of length ``n`` in lexicographic order."""
    if n == 0:
        yield ()
        return
    a = [0] * n
    # m[i] = max(a[:i + 1])
    m = [0] * n
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] > m[i - 1]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        m[i] = max(m[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            m[j] = m[i]


def set_partitions(n: int, cap: int = DEFAULT_PARTITION_CAP) -> Iterator[list[tuple[int, ...]]]:
    """Yield all partitions of ``{0, ..., n-1}`` as lists of sorted blocks.

    Blocks are listed in order of their smallest element; partitions come
    out in restricted-growth-string order.
    """
    if n < 1:
        raise ValidationError(f"need at least one element, got n={n}")
    if n > cap:
        raise CapacityError(f"set_partitions: n={n} exceeds the partition cap of {cap}")
    for rgs in restricted_growth_strings(n):
        blocks: list[list[int]] = [[] for _ in range(max(rgs) + 1)]
        for element, label in enumerate(rgs):
            blocks[label].append(element)
        yield [tuple(b) for b in blocks]


def partitions_of(items: Sequence, cap: int = DEFAULT_PARTITION_CAP):
    """Partitions of an arbitrary sequence, in the same order as :func:`set_partitions`."""
    for p in set_partitions(len(items), cap=cap):
        yield [tuple(items[k] for k in block) for block in p]


def bell_number(n: int) -> int:
    """Bell number via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]
