"""Exactly evaluable piecewise functions: C^1 polynomial splines, step functions, linear splines."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import DomainError, fmt_rat, rat


def _trim(coeffs) -> tuple[Fraction, ...]:
    coeffs = [rat(c) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs) if coeffs else (Fraction(0),)


@dataclass(frozen=True)
class Poly:
    """Polynomial with rational coefficients, lowest degree first."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    @property
    def degree(self) -> int:
        return 0 if self.coeffs == (0,) else len(self.coeffs) - 1

    @property
    def is_constant(self) -> bool:
        return len(self.coeffs) == 1

    def __call__(self, x) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def deriv(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:] or [0])

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Poly([x + y for x, y in zip(a, b)])

    def __mul__(self, other: "Poly") -> "Poly":
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    def scale(self, c) -> "Poly":
        return Poly([c * a for a in self.coeffs])

    def shift(self, c) -> "Poly":
        return Poly([self.coeffs[0] + c, *self.coeffs[1:]])

    def compose_affine(self, a, b) -> "Poly":
        """p(a*x + b)."""
        inner = Poly([b, a])
        acc = Poly([0])
        for c in reversed(self.coeffs):
            acc = acc * inner + Poly([c])
        return acc

    def rational_critical_points(self, lo, hi) -> list[Fraction]:
        """Zeros of p' strictly inside (lo, hi); irrational zeros are refused."""
        d = self.deriv()
        if d.degree == 0:
            return []
        if d.degree == 1:
            roots = [-d.coeffs[0] / d.coeffs[1]]
        elif d.degree == 2:
            c, b, a = d.coeffs
            disc = b * b - 4 * a * c
            if disc < 0:
                return []
            num, den = disc.numerator, disc.denominator
            rn, rd = math.isqrt(num), math.isqrt(den)
            if rn * rn != num or rd * rd != den:
                if _has_root_inside(d, lo, hi):
                    raise DomainError("irrational critical point inside a piece")
                return []
            s = Fraction(rn, rd)
            roots = [(-b - s) / (2 * a), (-b + s) / (2 * a)]
        else:
            raise DomainError("critical points only for pieces of degree <= 3")
        return sorted({r for r in roots if lo < r < hi})


def _has_root_inside(d: Poly, lo, hi) -> bool:
    # exact sign test for a quadratic on (lo, hi)
    c, b, a = d.coeffs
    ends = d(lo), d(hi)
    if ends[0] * ends[1] < 0:
        return True
    v = -b / (2 * a)
    if lo < v < hi:
        dv = d(v)
        return any(dv * e < 0 for e in ends) or dv == 0
    return False


SMOOTHSTEP = Poly([0, 0, 3, -2])  # s(t) = 3t^2 - 2t^3: s(0)=0, s(1)=1, s'(0)=s'(1)=0


@dataclass(frozen=True)
class PiecewiseC1Fn:
    """Piecewise polynomial on sorted rational breakpoints.

    ``pieces[i]`` is used on ``[breakpoints[i], breakpoints[i+1]]``; left of
    the span the value is ``outside[0]`` and right of it ``outside[1]``.
    """

    breakpoints: tuple[Fraction, ...]
    pieces: tuple[Poly, ...]
    outside: tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))

    def __post_init__(self):
        bps = tuple(rat(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "outside", tuple(rat(v) for v in self.outside))
        if len(self.pieces) != len(bps) - 1:
            raise DomainError("need exactly one piece per breakpoint interval")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise DomainError("breakpoints must be strictly increasing")

    @property
    def span(self) -> tuple[Fraction, Fraction]:
        return self.breakpoints[0], self.breakpoints[-1]

    def _piece_index(self, x: Fraction) -> int | None:
        bps = self.breakpoints
        if x < bps[0] or x > bps[-1]:
            return None
        i = bisect.bisect_right(bps, x) - 1
        return min(i, len(self.pieces) - 1)

    def __call__(self, x) -> Fraction:
        x = rat(x)
        i = self._piece_index(x)
        if i is None:
            return self.outside[0] if x < self.breakpoints[0] else self.outside[1]
        return self.pieces[i](x)

    def deriv(self, x) -> Fraction:
        x = rat(x)
        i = self._piece_index(x)
        if i is None:
            return Fraction(0)
        return self.pieces[i].deriv()(x)

    def scale(self, c) -> "PiecewiseC1Fn":
        c = rat(c)
        return PiecewiseC1Fn(
            self.breakpoints,
            tuple(p.scale(c) for p in self.pieces),
            (self.outside[0] * c, self.outside[1] * c),
        )

    def shift(self, c) -> "PiecewiseC1Fn":
        c = rat(c)
        return PiecewiseC1Fn(
            self.breakpoints,
            tuple(p.shift(c) for p in self.pieces),
            (self.outside[0] + c, self.outside[1] + c),
        )

    def restrict(self, lo, hi) -> "PiecewiseC1Fn":
        """Same function described on [lo, hi] only (constant extension outside)."""
        lo, hi = rat(lo), rat(hi)
        if lo >= hi:
            raise DomainError("restriction needs lo < hi")
        cuts = sorted({lo, hi, *(b for b in self.breakpoints if lo < b < hi)})
        pieces = []
        for a, b in zip(cuts, cuts[1:]):
            mid = (a + b) / 2
            i = self._piece_index(mid)
            if i is None:
                pieces.append(Poly([self(mid)]))
            else:
                pieces.append(self.pieces[i])
        return PiecewiseC1Fn(tuple(cuts), tuple(pieces), (self(lo), self(hi)))

    def c1_defects(self) -> list[Fraction]:
        """Breakpoints where value or first derivative jumps (empty iff C^1)."""
        bad = []
        left_vals = [(Poly([self.outside[0]]))] + list(self.pieces)
        right_vals = list(self.pieces) + [Poly([self.outside[1]])]
        for b, p, r in zip(self.breakpoints, left_vals, right_vals):
            if p(b) != r(b) or p.deriv()(b) != r.deriv()(b):
                bad.append(b)
        return bad

    def is_c1(self) -> bool:
        return not self.c1_defects()

    def oscillation(self) -> Fraction:
        """sup - inf over the span, from breakpoints and rational critical points."""
        pts = list(self.breakpoints)
        for (a, b), p in zip(zip(self.breakpoints, self.breakpoints[1:]), self.pieces):
            pts.extend(p.rational_critical_points(a, b))
        values = [self(t) for t in pts]
        return max(values) - min(values)

    def constant_on(self, lo, hi) -> bool:
        """True iff every piece meeting (lo, hi) is the same constant."""
        lo, hi = rat(lo), rat(hi)
        consts = set()
        for (a, b), p in zip(zip(self.breakpoints, self.breakpoints[1:]), self.pieces):
            if b <= lo or a >= hi:
                continue
            if not p.is_constant:
                return False
            consts.add(p.coeffs[0])
        if lo < self.breakpoints[0]:
            consts.add(self.outside[0])
        if hi > self.breakpoints[-1]:
            consts.add(self.outside[1])
        return len(consts) <= 1


def bump_c1() -> PiecewiseC1Fn:
    """C^1 bump: 1 on [-1/2, 1/2], smoothstep flanks, support [-1, 1]."""
    half = Fraction(1, 2)
    rise = SMOOTHSTEP.compose_affine(2, 2)  # s(2(1 + x)) on [-1, -1/2]
    fall = SMOOTHSTEP.compose_affine(-2, 2)  # s(2(1 - x)) on [1/2, 1]
    return PiecewiseC1Fn((-1, -half, half, 1), (rise, Poly([1]), fall))


def ramp_c1(a, b, tau) -> PiecewiseC1Fn:
    """C^1 plateau function of [a, b]: 0 outside the middle fifths, 1 on the centre.

    It vanishes left of a+(1+tau)(b-a)/5 and right of b-(1+tau)(b-a)/5, equals 1
    on [a+(2-tau)(b-a)/5, b-(2-tau)(b-a)/5], and uses the smoothstep between.
    """
    a, b, tau = rat(a), rat(b), rat(tau)
    if not 0 < tau < Fraction(1, 2):
        raise DomainError(f"tau must lie in (0, 1/2), got {fmt_rat(tau)}")
    if a >= b:
        raise DomainError("ramp interval needs a < b")
    length = b - a
    p1 = a + (1 + tau) * length / 5
    p2 = a + (2 - tau) * length / 5
    p3 = b - (2 - tau) * length / 5
    p4 = b - (1 + tau) * length / 5
    rise = SMOOTHSTEP.compose_affine(1 / (p2 - p1), -p1 / (p2 - p1))
    fall = SMOOTHSTEP.compose_affine(-1 / (p4 - p3), p4 / (p4 - p3))
    return PiecewiseC1Fn((p1, p2, p3, p4), (rise, Poly([1]), fall))


@dataclass(frozen=True)
class StepFn:
    """Finite sum of constants on closed intervals with disjoint interiors; 0 elsewhere.

    At an endpoint shared by two pieces the left piece's value is returned;
    this only matters on a finite set.
    """

    pieces: tuple[tuple[Fraction, Fraction, Fraction], ...]

    def __post_init__(self):
        pieces = tuple(sorted((rat(a), rat(b), rat(v)) for a, b, v in self.pieces))
        for a, b, _ in pieces:
            if a >= b:
                raise DomainError("step pieces need lo < hi")
        for (_, b0, _), (a1, _, _) in zip(pieces, pieces[1:]):
            if a1 < b0:
                raise DomainError("step pieces must have disjoint interiors")
        object.__setattr__(self, "pieces", pieces)

    def __call__(self, x) -> Fraction:
        x = rat(x)
        for a, b, v in self.pieces:
            if a <= x <= b:
                return v
        return Fraction(0)

    @property
    def breakpoints(self) -> list[Fraction]:
        return sorted({p for a, b, _ in self.pieces for p in (a, b)})

    def integral(self, lo=None, hi=None) -> Fraction:
        total = Fraction(0)
        for a, b, v in self.pieces:
            a2 = a if lo is None else max(a, rat(lo))
            b2 = b if hi is None else min(b, rat(hi))
            if b2 > a2:
                total += v * (b2 - a2)
        return total

    @classmethod
    def sum_of(cls, fns: Sequence["StepFn"]) -> "StepFn":
        """Pointwise sum, re-cut at the union of breakpoints (zero cells dropped)."""
        cuts = sorted({p for f in fns for p in f.breakpoints})
        pieces = []
        for a, b in zip(cuts, cuts[1:]):
            mid = (a + b) / 2
            v = sum((f(mid) for f in fns), Fraction(0))
            if v == 0:
                continue
            if pieces and pieces[-1][1] == a and pieces[-1][2] == v:
                pieces[-1] = (pieces[-1][0], b, v)
            else:
                pieces.append((a, b, v))
        return cls(tuple(pieces))

    def indefinite_integral(self, start) -> "LinearSpline":
        start = rat(start)
        xs = sorted({start, *(p for p in self.breakpoints if p > start)})
        ys = [self.integral(start, x) for x in xs]
        return LinearSpline(tuple(xs), tuple(ys))


@dataclass(frozen=True)
class LinearSpline:
    """Continuous piecewise linear function; constant extension beyond the knots."""

    knots: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "knots", tuple(rat(k) for k in self.knots))
        object.__setattr__(self, "values", tuple(rat(v) for v in self.values))
        if len(self.knots) != len(self.values) or not self.knots:
            raise DomainError("knots and values must be nonempty and of equal length")
        if any(a >= b for a, b in zip(self.knots, self.knots[1:])):
            raise DomainError("knots must be strictly increasing")

    def __call__(self, x) -> Fraction:
        x = rat(x)
        ks, vs = self.knots, self.values
        if x <= ks[0]:
            return vs[0]
        if x >= ks[-1]:
            return vs[-1]
        i = bisect.bisect_right(ks, x) - 1
        t = (x - ks[i]) / (ks[i + 1] - ks[i])
        return vs[i] + t * (vs[i + 1] - vs[i])

    def slope(self, x) -> Fraction:
        """Right derivative at x (0 beyond the last knot)."""
        x = rat(x)
        ks, vs = self.knots, self.values
        if x < ks[0] or x >= ks[-1]:
            return Fraction(0)
        i = bisect.bisect_right(ks, x) - 1
        return (vs[i + 1] - vs[i]) / (ks[i + 1] - ks[i])
