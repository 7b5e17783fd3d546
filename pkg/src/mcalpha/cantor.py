"""Base-q Cantor systems: level enumerations, point location and the Cantor function.

For an odd base ``q = 2m + 1`` each closed interval of level ``k - 1`` is cut into
``q`` equal parts; the even-indexed parts form level ``k`` and the odd-indexed
parts are the level-``k`` gaps.  Points are located through their base-q digits,
so membership and the Cantor function are exact for every rational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .exact import (
    BudgetError,
    DigitExpansion,
    DomainError,
    Enclosure,
    baseq_expand,
    budget,
    fmt_rat,
    rat,
)


@dataclass(frozen=True)
class NodeInterval:
    """A closed interval of level ``level``; ``path`` lists child indices in [0, m]."""

    level: int
    path: tuple[int, ...]
    left: Fraction
    right: Fraction

    def __contains__(self, x) -> bool:
        return self.left <= x <= self.right

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "path": list(self.path),
            "left": fmt_rat(self.left),
            "right": fmt_rat(self.right),
        }


@dataclass(frozen=True)
class GapInterval:
    """An open gap removed at level ``level``."""

    level: int
    left: Fraction
    right: Fraction

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    def __contains__(self, x) -> bool:
        return self.left < x < self.right

    def to_json(self) -> dict:
        return {"level": self.level, "left": fmt_rat(self.left), "right": fmt_rat(self.right)}


@dataclass(frozen=True)
class Outside:
    pass


@dataclass(frozen=True)
class InGap:
    gap: GapInterval


@dataclass(frozen=True)
class InNodeToDepth:
    node: NodeInterval
    depth: int


Located = Union[Outside, InGap, InNodeToDepth]


@dataclass(frozen=True)
class PointDigits:
    """Where a point of [0, 1] sits in the Cantor tree.

    ``gap_level`` is set for points of [0, 1] \\ C.  For points of C, ``halved``
    is the all-even digit expansion with every digit divided by two (a base
    m + 1 expansion whose value is psi(x)), and ``endpoint_level`` is the level
    at which x first becomes an interval endpoint, if ever.  For gap points
    ``expansion`` is truncated after the digit at ``gap_level``.
    """

    expansion: DigitExpansion
    gap_level: int | None = None
    halved: DigitExpansion | None = None
    endpoint_level: int | None = None


_CLASSIFY_CACHE = 1 << 16
_DIGIT_BLOCK = 32


@dataclass
class CantorSystem:
    """The Cantor construction with odd base ``q``; level sets are cached lazily."""

    q: int
    _nodes: dict = field(default_factory=dict, repr=False, compare=False)
    _gaps: dict = field(default_factory=dict, repr=False, compare=False)
    _digits: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.q < 3 or self.q % 2 == 0:
            raise DomainError(f"Cantor base must be an odd integer >= 3, got {self.q}")

    @property
    def m(self) -> int:
        return (self.q - 1) // 2

    # -- enumeration -------------------------------------------------------

    def node_count(self, k: int) -> int:
        return (self.m + 1) ** k

    def gap_count(self, k: int) -> int:
        return self.m * (self.m + 1) ** (k - 1)

    def _check_budget(self, count: int, what: str):
        cap = budget()
        if count > cap:
            raise BudgetError(f"{what} has {count} intervals, budget is {cap}", count=count)

    def nodes(self, k: int) -> tuple[NodeInterval, ...]:
        """The closed intervals of level k, sorted by left endpoint."""
        if k < 0:
            raise DomainError("levels of closed intervals start at 0")
        cached = self._nodes.get(k)
        if cached is not None:
            return cached
        self._check_budget(self.node_count(k), f"level {k} of the base-{self.q} system")
        if k == 0:
            level = (NodeInterval(0, (), Fraction(0), Fraction(1)),)
        else:
            level = tuple(child for node in self.nodes(k - 1) for child in self._split(node)[0])
        self._nodes[k] = level
        return level

    def gaps(self, k: int) -> tuple[GapInterval, ...]:
        """The open gaps removed at level k (k >= 1), sorted by left endpoint."""
        if k < 1:
            raise DomainError("gap levels start at 1")
        cached = self._gaps.get(k)
        if cached is not None:
            return cached
        self._check_budget(self.gap_count(k), f"gap level {k} of the base-{self.q} system")
        level = tuple(g for node in self.nodes(k - 1) for g in self._split(node)[1])
        self._gaps[k] = level
        return level

    def enumerate(self, k: int, kind: str = "closed"):
        if kind == "closed":
            return list(self.nodes(k))
        if kind == "gaps":
            return list(self.gaps(k))
        raise DomainError(f"kind must be 'closed' or 'gaps', got {kind!r}")

    def _split(self, node: NodeInterval):
        step = (node.right - node.left) / self.q
        k = node.level + 1
        children, gaps = [], []
        for j in range(self.q):
            lo = node.left + j * step
            if j % 2 == 0:
                children.append(NodeInterval(k, node.path + (j // 2,), lo, lo + step))
            else:
                gaps.append(GapInterval(k, lo, lo + step))
        return children, gaps

    def window(self, lo, hi, max_level: int, min_level: int = 0):
        """Nodes and gaps of levels in [min_level, max_level] meeting [lo, hi].

        Only the branches of the tree that reach the window are expanded, so
        this stays cheap for narrow windows at deep levels.
        """
        lo, hi = rat(lo), rat(hi)
        nodes: list[NodeInterval] = []
        gaps: list[GapInterval] = []
        frontier = [self.nodes(0)[0]] if lo <= 1 and hi >= 0 else []
        for k in range(0, max_level + 1):
            if k >= min_level:
                nodes.extend(frontier)
            if k == max_level:
                break
            nxt = []
            for node in frontier:
                children, level_gaps = self._split(node)
                nxt.extend(c for c in children if c.left <= hi and c.right >= lo)
                if k + 1 >= min_level:
                    gaps.extend(g for g in level_gaps if g.left < hi and g.right > lo)
            frontier = nxt
        nodes.sort(key=lambda n: (n.left, n.level))
        gaps.sort(key=lambda g: g.left)
        return nodes, gaps

    def endpoints(self, max_level: int) -> list[Fraction]:
        """Sorted endpoints of all closed intervals of levels <= max_level."""
        pts = set()
        for node in self.nodes(max_level):
            pts.add(node.left)
            pts.add(node.right)
        return sorted(pts)

    def gap_endpoints(self, max_level: int) -> list[Fraction]:
        pts = set()
        for k in range(1, max_level + 1):
            for g in self.gaps(k):
                pts.add(g.left)
                pts.add(g.right)
        return sorted(pts)

    def count_gaps_within(self, lo, hi, k: int) -> int:
        """Number of level-k gaps contained in the interval (lo, hi)."""
        lo, hi = rat(lo), rat(hi)
        if k < 1:
            raise DomainError("gap levels start at 1")
        total = 0
        partial = [self.nodes(0)[0]]
        for p in range(k):
            nxt = []
            for node in partial:
                if lo <= node.left and node.right <= hi:
                    total += self.m * (self.m + 1) ** (k - p - 1)
                    continue
                if node.right <= lo or node.left >= hi:
                    continue
                children, level_gaps = self._split(node)
                if p + 1 == k:
                    total += sum(1 for g in level_gaps if lo <= g.left and g.right <= hi)
                else:
                    nxt.extend(children)
            partial = nxt
        return total

    # -- location ----------------------------------------------------------

    def classify(self, x: Fraction) -> PointDigits:
        cached = self._digits.get(x)
        if cached is None:
            if len(self._digits) >= _CLASSIFY_CACHE:
                self._digits.clear()
            cached = self._digits[x] = self._classify(x)
        return cached

    def _classify(self, x: Fraction) -> PointDigits:
        q, m = self.q, self.m
        if x == 1:
            one = DigitExpansion(q, 1, ())
            return PointDigits(one, halved=DigitExpansion(m + 1, 0, (), (m,)), endpoint_level=0)
        gap = self._first_gap(x)
        if gap is not None:
            return gap
        exp = baseq_expand(x, q)
        pre, per = exp.preperiod, exp.period
        digits = pre + per
        first_odd = next((i + 1 for i, d in enumerate(digits) if d % 2), None)
        if first_odd is None:
            halved = DigitExpansion(m + 1, 0, tuple(d // 2 for d in pre), tuple(d // 2 for d in per))
            return PointDigits(exp, halved=halved, endpoint_level=len(pre) if not per else None)
        if not per and first_odd == len(pre):
            # right endpoint: the twin expansion ends in d-1 followed by (q-1)s
            head = tuple(d // 2 for d in pre[:-1]) + ((pre[-1] - 1) // 2,)
            return PointDigits(exp, halved=DigitExpansion(m + 1, 0, head, (m,)), endpoint_level=first_odd)
        return PointDigits(exp, gap_level=first_odd)

    def _first_gap(self, x: Fraction) -> PointDigits | None:
        """Digits of x up to its first odd digit, when that digit is not the last.

        Such an x lies inside the gap of that level and no further digits are
        needed.  Long division runs in blocks of _DIGIT_BLOCK digits so that
        only one big-integer division is done per block.  Returns None when
        x may lie in C (no odd digit before a remainder repeats or vanishes).
        """
        q, den = self.q, x.denominator
        whole, rem = divmod(x.numerator, den)
        step = q**_DIGIT_BLOCK
        digits: list[int] = []
        seen = set()
        while rem and rem not in seen:
            seen.add(rem)
            block, rem = divmod(rem * step, den)
            chunk = [0] * _DIGIT_BLOCK
            for i in range(_DIGIT_BLOCK - 1, -1, -1):
                block, chunk[i] = divmod(block, q)
            for i, d in enumerate(chunk):
                if d % 2:
                    if rem or any(chunk[i + 1 :]):
                        digits.extend(chunk[: i + 1])
                        return PointDigits(DigitExpansion(q, whole, tuple(digits)), gap_level=len(digits))
                    return None
            digits.extend(chunk)
        return None

    def _gap_at(self, exp: DigitExpansion, level: int) -> GapInterval:
        acc = 0
        for j in range(1, level + 1):
            acc = acc * self.q + exp.digit(j)
        den = self.q**level
        return GapInterval(level, Fraction(acc, den), Fraction(acc + 1, den))

    def _node_at(self, path: tuple[int, ...]) -> NodeInterval:
        left = sum(Fraction(2 * d, self.q**j) for j, d in enumerate(path, start=1))
        k = len(path)
        return NodeInterval(k, path, left, left + Fraction(1, self.q**k))

    def locate(self, x, max_depth: int) -> Located:
        x = rat(x)
        if max_depth < 1:
            raise DomainError("max_depth must be >= 1")
        if x < 0 or x > 1:
            return Outside()
        info = self.classify(x)
        if info.gap_level is not None and info.gap_level <= max_depth:
            return InGap(self._gap_at(info.expansion, info.gap_level))
        if info.halved is not None:
            path = tuple(info.halved.digit(j) for j in range(1, max_depth + 1))
        else:
            path = tuple(info.expansion.digit(j) // 2 for j in range(1, max_depth + 1))
        return InNodeToDepth(self._node_at(path), max_depth)

    def gap_containing(self, x) -> GapInterval | None:
        """The gap of any level containing x, or None for x in C or outside [0, 1]."""
        x = rat(x)
        if x < 0 or x > 1:
            return None
        info = self.classify(x)
        if info.gap_level is None:
            return None
        return self._gap_at(info.expansion, info.gap_level)

    def in_cantor(self, x) -> bool:
        x = rat(x)
        return 0 <= x <= 1 and self.classify(x).gap_level is None

    def endpoint_level(self, x) -> int | None:
        """Least k such that x is an endpoint of a level-k interval, else None."""
        x = rat(x)
        if x < 0 or x > 1:
            return None
        return self.classify(x).endpoint_level

    # -- the Cantor function -----------------------------------------------

    def psi_exact(self, x) -> Fraction:
        x = rat(x)
        if x < 0 or x > 1:
            raise DomainError(f"psi is evaluated on [0, 1], got {fmt_rat(x)}")
        info = self.classify(x)
        if info.halved is not None:
            return info.halved.value()
        # plateau value of the gap: psi at its left endpoint
        exp, i = info.expansion, info.gap_level
        base, acc = self.m + 1, 0
        for d in exp.preperiod[: i - 1]:
            acc = acc * base + d // 2
        acc = acc * base + (exp.digit(i) + 1) // 2
        return Fraction(acc, (self.m + 1) ** i)

    def psi(self, x) -> Fraction:
        """psi extended to the real line: 0 left of 0 and 1 right of 1."""
        x = rat(x)
        if x <= 0:
            return Fraction(0)
        if x >= 1:
            return Fraction(1)
        return self.psi_exact(x)

    def psi_partial(self, x, k: int) -> Fraction:
        """(m+1)^-k q^k |(-inf, x) and C_k|, computed from the digits of x."""
        x = rat(x)
        if x <= 0:
            return Fraction(0)
        if x >= 1:
            return Fraction(1)
        q, m1 = self.q, self.m + 1
        exp = baseq_expand(x, q)
        full = 0
        for j in range(1, k + 1):
            d = exp.digit(j)
            full += ((d + 1) // 2) * m1 ** (k - j)
            if d % 2:
                return Fraction(full, m1**k)
        scaled = x * q**k
        frac = scaled - (scaled.numerator // scaled.denominator)
        return Fraction(full, m1**k) + frac / m1**k

    def psi_enclose(self, x, depth: int) -> Enclosure:
        """Enclosure of psi(x) from the level-``depth`` approximation.

        Points already decided at that depth (gap points and interval
        endpoints) get the exact degenerate enclosure.
        """
        x = rat(x)
        if x < 0 or x > 1:
            raise DomainError(f"psi is evaluated on [0, 1], got {fmt_rat(x)}")
        if depth < 1:
            raise DomainError("depth must be >= 1")
        approx = self.psi_partial(x, depth)
        info = self.classify(x)
        decided = (info.gap_level is not None and info.gap_level <= depth) or (
            info.endpoint_level is not None and info.endpoint_level <= depth
        )
        if decided:
            return Enclosure.point(approx)
        tail = Fraction(1, (self.m + 1) ** depth)
        return Enclosure(max(Fraction(0), approx - tail), min(Fraction(1), approx + tail))
