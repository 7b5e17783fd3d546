"""Explicit functions built from step functions, C^1 bumps/ramps and Cantor systems.

Builders return exactly evaluable objects.  The three-function bundles
``(F, f, phi)`` share the :class:`ConstructedTriple` interface: an indefinite
integral candidate ``F``, its derivative candidate ``f`` and a strictly
increasing control function ``phi``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .cantor import CantorSystem, GapInterval
from .exact import BudgetError, DomainError, Enclosure, budget, fmt_rat, parse_rat, rat
from .piecewise import LinearSpline, PiecewiseC1Fn, Poly, StepFn, bump_c1, ramp_c1

__all__ = [
    "ConstructedTriple",
    "FunctionTriple",
    "M1Triple",
    "M3Triple",
    "M4Triple",
    "BumpRegistry",
    "LC2Result",
    "M1Result",
    "q_weights",
    "block_index",
    "lemma_c_rhs",
    "lemma_c_threshold",
    "lc2_build",
    "m1_build",
    "m3_build",
    "m4_build",
    "calkin_wilf",
    "null_control",
    "perron_to_control",
    "perron_from_control",
    "load_triple",
]


# ---------------------------------------------------------------------------
# Weights on ternary gaps


def block_index(k: int) -> int:
    """The l with 4^(l-1) <= k < 4^l."""
    if k < 1:
        raise DomainError("gap levels start at 1")
    l = 1
    while 4**l <= k:
        l += 1
    return l


def q_weights(k: int) -> Fraction:
    """Weight 2^(-k-2l) carried by every level-k ternary gap."""
    return Fraction(1, 2 ** (k + 2 * block_index(k)))


def lemma_c_rhs(system: CantorSystem, gap: GapInterval, eta) -> Fraction:
    """eta * min(psi(b + eta(b-a)) - psi(b), psi(a) - psi(a - eta(b-a)))."""
    eta = rat(eta)
    a, b = gap.left, gap.right
    reach = eta * (b - a)
    right = system.psi(b + reach) - system.psi(b)
    left = system.psi(a) - system.psi(a - reach)
    return eta * min(right, left)


def lemma_c_threshold(eta) -> int:
    """Least level k0 such that weight <= lemma_c_rhs holds for every gap of level >= k0.

    All gaps of one level are translates inside translated subtrees, so one
    representative per level decides the level.  Past 4^(l*-1), where
    4^-l* <= eta*psi(eta), the inequality holds for all levels by monotonicity,
    so only the finitely many levels below that are scanned.
    """
    eta = rat(eta)
    if not 0 < eta < 1:
        raise DomainError(f"eta must lie in (0, 1), got {fmt_rat(eta)}")
    system = _ternary()
    target = eta * system.psi_exact(eta)
    l_star = 1
    while Fraction(1, 4**l_star) > target:
        l_star += 1
    last_bad = 0
    for k in range(1, 4 ** (l_star - 1)):
        rep = GapInterval(k, Fraction(1, 3**k), Fraction(2, 3**k))
        if q_weights(k) > lemma_c_rhs(system, rep, eta):
            last_bad = k
    return last_bad + 1


@lru_cache(maxsize=None)
def _ternary() -> CantorSystem:
    return CantorSystem(3)


@lru_cache(maxsize=None)
def _quinary() -> CantorSystem:
    return CantorSystem(5)


# ---------------------------------------------------------------------------
# Step-function building block and its aggregate


@dataclass(frozen=True)
class LC2Result:
    f: StepFn
    witnesses: tuple[tuple[Fraction, Fraction], ...]
    points: tuple[Fraction, ...]
    m: int
    eps: Fraction
    tau: Fraction
    sigma: Fraction

    def witness_sum(self) -> Fraction:
        return sum((self.f.integral(a, b) for a, b in self.witnesses), Fraction(0))

    def short_intervals(self) -> list[tuple[Fraction, Fraction]]:
        """[a_i, a_i + tau (b_i - a_i)] for every witness."""
        return [(a, a + self.tau * (b - a)) for a, b in self.witnesses]

    def short_intervals_disjoint(self) -> bool:
        ivs = sorted(self.short_intervals())
        return all(r < l2 for (_, r), (l2, _) in zip(ivs, ivs[1:]))


def lc2_build(J, eps, tau, sigma, ab) -> LC2Result:
    """Step function of small mass whose integrals over nested [a_i, b] sum past 1/eps.

    ``a_i = a_{i-1} + sigma (b - a_{i-1})`` for ``i = 1..m`` with ``m`` the least
    integer above 1/eps^2; the mass eps sits on [a_m, b].
    """
    eps, tau, sigma = rat(eps), rat(tau), rat(sigma)
    j_lo, j_hi = (rat(v) for v in J)
    a, b = (rat(v) for v in ab)
    if not (0 < eps < 1 and 0 < tau < 1):
        raise DomainError("need 0 < eps < 1 and 0 < tau < 1")
    if not tau < sigma < 1:
        raise DomainError("need tau < sigma < 1")
    if not (j_lo < a < b < j_hi):
        raise DomainError("[a, b] must lie inside the open interval J")
    inv = 1 / (eps * eps)
    m = inv.numerator // inv.denominator + 1
    if m > budget():
        raise BudgetError(f"building block needs {m} intervals", count=m)
    points = [a]
    for _ in range(m):
        points.append(points[-1] + sigma * (b - points[-1]))
    am = points[-1]
    f = StepFn(((am, b, eps / (b - am)),))
    witnesses = tuple((points[i], b) for i in range(m))
    return LC2Result(f, witnesses, tuple(points), m, eps, tau, sigma)


def calkin_wilf(n: int) -> list[Fraction]:
    """First n terms of the Calkin-Wilf enumeration of the positive rationals."""
    out, x = [], Fraction(1)
    for _ in range(n):
        out.append(x)
        x = 1 / (2 * (x.numerator // x.denominator) - x + 1)
    return out


@dataclass(frozen=True)
class M1Result:
    f: StepFn
    F: LinearSpline
    parts: tuple[LC2Result, ...]
    centers: tuple[Fraction, ...]
    interval: tuple[Fraction, Fraction]


_M1_BIT_BUDGET = 1 << 27


def m1_build(K: int, interval=(0, 1)) -> M1Result:
    """Truncated sum of K building blocks centred at enumerated rationals of ``interval``.

    Block k has mass 2^-k, tau_k = 1 - 2^-k and sigma_k = (1 + tau_k)/2 on
    (r_k - 2^-k, r_k + 2^-k) clipped to the interval; F is the exact
    indefinite integral, 0 at the left end of the interval.
    """
    if K < 1:
        raise DomainError("K must be >= 1")
    lo, hi = (rat(v) for v in interval)
    if lo >= hi:
        raise DomainError("interval needs lo < hi")
    # a_i carries ~(k+1) i bits, so block k costs ~(k+1) m_k^2 / 2 bits
    bits = sum((k + 1) * (4**k + 1) ** 2 // 2 for k in range(1, K + 1))
    if bits > _M1_BIT_BUDGET:
        raise BudgetError(f"K={K} would need ~{bits} bits of exact coordinates", count=bits)
    parts, centers = [], []
    for k, r in enumerate(calkin_wilf(K), start=1):
        c = lo + (hi - lo) * r / (1 + r)
        eps = Fraction(1, 2**k)
        tau = 1 - eps
        j_lo, j_hi = max(c - eps, lo), min(c + eps, hi)
        mid, quarter = (j_lo + j_hi) / 2, (j_hi - j_lo) / 4
        parts.append(lc2_build((j_lo, j_hi), eps, tau, (1 + tau) / 2, (mid - quarter, mid + quarter)))
        centers.append(c)
    f = StepFn.sum_of([p.f for p in parts])
    F = f.indefinite_integral(lo)
    if F.knots[-1] < hi:
        F = LinearSpline(F.knots + (hi,), F.values + (F.values[-1],))
    return M1Result(f, F, tuple(parts), tuple(centers), (lo, hi))


# ---------------------------------------------------------------------------
# Triples


class ConstructedTriple:
    """Common surface of (F, f, phi) bundles.

    ``F`` may return an :class:`Enclosure` on the construction's exceptional
    set; ``f`` and ``phi`` always return exact rationals.
    """

    name = "triple"
    system: CantorSystem | None = None
    depth: int = 0

    def F(self, x):
        raise NotImplementedError

    def f(self, x) -> Fraction:
        raise NotImplementedError

    def phi(self, x) -> Fraction:
        raise NotImplementedError

    def on_gap(self, gap: GapInterval) -> PiecewiseC1Fn:
        """F restricted to the closed gap as a piecewise polynomial."""
        raise DomainError(f"{self.name} has no symbolic description on gaps")

    def critical_points(self, gap: GapInterval) -> list[Fraction]:
        """Points inside ``gap`` where F changes shape (for verification grids)."""
        return []

    @property
    def params(self) -> dict:
        return {}

    def meta(self) -> dict:
        return {"construction": self.name, "params": self.params, "depth": self.depth}

    def to_json(self) -> dict:
        return {"construction": self.name, "params": self.params, "depth": self.depth}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass
class FunctionTriple(ConstructedTriple):
    """Ad-hoc triple from three callables; not serializable."""

    F_fn: Callable
    f_fn: Callable
    phi_fn: Callable
    name: str = "custom"

    def F(self, x):
        return self.F_fn(rat(x))

    def f(self, x):
        return self.f_fn(rat(x))

    def phi(self, x):
        return self.phi_fn(rat(x))

    def to_json(self) -> dict:
        raise DomainError("ad-hoc triples cannot be serialized")


@dataclass(frozen=True)
class BumpRegistry:
    """Placement of the bump in every ternary gap of level <= depth."""

    alpha: Fraction
    depth: int
    table: dict = field(compare=False)

    def __getitem__(self, gap: GapInterval):
        return self.table[gap]


class M3Triple(ConstructedTriple):
    """Sum of disjoint C^1 bumps, one per ternary gap, with phi = x + psi(x).

    In the gap J = (a, b) of level k the bump has height q_weights(k), is
    centred at u_J = a + (b - a)/alpha and has half-width 3^-k (b - a)/alpha.
    Every rational lies in C or in a gap of finite level, so F and f are
    evaluated exactly at all levels; ``depth`` only bounds the registry.
    """

    name = "m3"

    def __init__(self, alpha, depth: int):
        alpha = rat(alpha)
        if alpha < 2:
            raise DomainError(f"alpha must be >= 2, got {fmt_rat(alpha)}")
        if depth < 1:
            raise DomainError("depth must be >= 1")
        self.alpha = alpha
        self.sigma = 1 / alpha
        self.depth = depth
        self.system = _ternary()
        self._bumps: dict[GapInterval, PiecewiseC1Fn] = {}
        self._registry: BumpRegistry | None = None

    @property
    def params(self) -> dict:
        return {"alpha": fmt_rat(self.alpha)}

    def placement(self, gap: GapInterval) -> tuple[Fraction, Fraction, Fraction]:
        """(Q_J, u_J, sigma_J) for the gap."""
        sigma_j = self.sigma / 3**gap.level
        u = gap.left + self.sigma * gap.length
        return q_weights(gap.level), u, sigma_j

    def bump(self, gap: GapInterval) -> PiecewiseC1Fn:
        cached = self._bumps.get(gap)
        if cached is None:
            Q, u, sigma_j = self.placement(gap)
            w = sigma_j * gap.length
            xi = bump_c1()
            cached = PiecewiseC1Fn(
                tuple(u + w * t for t in xi.breakpoints),
                tuple(p.compose_affine(1 / w, -u / w).scale(Q) for p in xi.pieces),
            )
            if len(self._bumps) < 4096:
                self._bumps[gap] = cached
        return cached

    @property
    def registry(self) -> BumpRegistry:
        if self._registry is None:
            table = {
                g: self.placement(g) for k in range(1, self.depth + 1) for g in self.system.gaps(k)
            }
            self._registry = BumpRegistry(self.alpha, self.depth, table)
        return self._registry

    def tail_sup(self) -> Fraction:
        """Bound on the bumps of levels > depth."""
        return q_weights(self.depth + 1)

    def F(self, x) -> Fraction:
        gap = self.system.gap_containing(rat(x))
        return Fraction(0) if gap is None else self.bump(gap)(x)

    def f(self, x) -> Fraction:
        gap = self.system.gap_containing(rat(x))
        return Fraction(0) if gap is None else self.bump(gap).deriv(x)

    def phi(self, x) -> Fraction:
        x = rat(x)
        return x + self.system.psi(x)

    def on_gap(self, gap: GapInterval) -> PiecewiseC1Fn:
        return self.bump(gap)

    def critical_points(self, gap: GapInterval) -> list[Fraction]:
        return list(self.bump(gap).breakpoints) + [self.placement(gap)[1]]

    def meta(self) -> dict:
        out = super().meta()
        out["tail_bound"] = fmt_rat(self.tail_sup())
        out["exact"] = "F and f exact at every rational; tail_bound bounds bumps of levels > depth"
        return out


class M4Triple(ConstructedTriple):
    """Staircase on the base-5 Cantor set built from plateau ramps.

    F = sum_k 3^-k/(k+1) sum_{I in level k-1} g_{I, tau_k} with
    tau_k = (k+1)/(2(k+2)).  Off C the sum is finite and exact; on C it is
    exact at interval endpoints and otherwise enclosed using the partial sum
    through ``depth`` plus 3^-depth / (2(depth+2)).
    """

    name = "m4"

    def __init__(self, depth: int):
        if depth < 1:
            raise DomainError("depth must be >= 1")
        self.depth = depth
        self.system = _quinary()

    @staticmethod
    def weight(k: int) -> Fraction:
        return Fraction(1, (k + 1) * 3**k)

    @staticmethod
    def tau(k: int) -> Fraction:
        return Fraction(k + 1, 2 * (k + 2))

    @staticmethod
    @lru_cache(maxsize=None)
    def unit_ramp(k: int) -> PiecewiseC1Fn:
        return ramp_c1(0, 1, M4Triple.tau(k))

    def tail_bound(self) -> Fraction:
        return Fraction(1, 3**self.depth * 2 * (self.depth + 2))

    def _plateau_sum(self, digits, upto: int) -> Fraction:
        # levels whose base-5 digit is 2 sit on a ramp plateau (value 1)
        total = Fraction(0)
        for k, d in enumerate(digits[:upto], start=1):
            if d == 2:
                total += self.weight(k)
        return total

    @staticmethod
    def _digits(exp, upto: int) -> tuple[int, ...]:
        head = exp.preperiod[:upto]
        if len(head) < upto:
            head += tuple(exp.digit(k) for k in range(len(head) + 1, upto + 1))
        return head

    def _relative(self, x: Fraction, k: int) -> Fraction:
        scaled = x * 5 ** (k - 1)
        return scaled - scaled.numerator // scaled.denominator

    def F(self, x):
        x = rat(x)
        if x <= 0 or x >= 1:
            return Fraction(0)
        info = self.system.classify(x)
        if info.gap_level is not None:
            j = info.gap_level
            base = self._plateau_sum(info.expansion.preperiod, j - 1)
            return base + self.weight(j) * self.unit_ramp(j)(self._relative(x, j))
        if info.endpoint_level is not None:
            digits = self._digits(info.halved, info.endpoint_level)
            return self._plateau_sum(tuple(2 * d for d in digits), info.endpoint_level)
        digits = self._digits(info.halved, self.depth)
        partial = self._plateau_sum(tuple(2 * d for d in digits), self.depth)
        return Enclosure(partial, partial + self.tail_bound())

    def f(self, x) -> Fraction:
        x = rat(x)
        if x <= 0 or x >= 1:
            return Fraction(0)
        info = self.system.classify(x)
        if info.gap_level is None:
            return Fraction(0)
        j = info.gap_level
        return self.weight(j) * 5 ** (j - 1) * self.unit_ramp(j).deriv(self._relative(x, j))

    def phi(self, x) -> Fraction:
        x = rat(x)
        return x + self.system.psi(x)

    def _ramp_for(self, gap: GapInterval) -> tuple[Fraction, PiecewiseC1Fn]:
        j = gap.level
        mid = (gap.left + gap.right) / 2
        info = self.system.classify(mid)
        base = self._plateau_sum(info.expansion.preperiod, j - 1)
        node_left = gap.left - info.expansion.digit(j) * gap.length
        ramp = ramp_c1(node_left, node_left + 5 * gap.length, self.tau(j))
        return base, ramp

    def on_gap(self, gap: GapInterval) -> PiecewiseC1Fn:
        base, ramp = self._ramp_for(gap)
        return ramp.restrict(gap.left, gap.right).scale(self.weight(gap.level)).shift(base)

    def critical_points(self, gap: GapInterval) -> list[Fraction]:
        _, ramp = self._ramp_for(gap)
        inside = [b for b in ramp.breakpoints if gap.left < b < gap.right]
        return inside + [(u + v) / 2 for u, v in zip(inside, inside[1:])]

    def meta(self) -> dict:
        out = super().meta()
        out["tail_bound"] = fmt_rat(self.tail_bound())
        out["exact"] = "exact off C and at interval endpoints; enclosure elsewhere on C"
        return out


class M1Triple(ConstructedTriple):
    """Truncated aggregate of building blocks; phi is the identity placeholder."""

    name = "m1"

    def __init__(self, depth: int, interval=(0, 1)):
        self.depth = depth
        self.result = m1_build(depth, interval)

    @property
    def params(self) -> dict:
        lo, hi = self.result.interval
        return {"interval": [fmt_rat(lo), fmt_rat(hi)]}

    def F(self, x) -> Fraction:
        return self.result.F(x)

    def f(self, x) -> Fraction:
        return self.result.f(x)

    def phi(self, x) -> Fraction:
        return rat(x)


def m3_build(alpha, K: int) -> M3Triple:
    return M3Triple(alpha, K)


def m4_build(K: int) -> M4Triple:
    return M4Triple(K)


def load_triple(payload) -> ConstructedTriple:
    """Rebuild a triple from its JSON metadata (dict or JSON string)."""
    if isinstance(payload, str):
        payload = json.loads(payload)
    try:
        name = payload["construction"]
        depth = int(payload["depth"])
        params = payload.get("params", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed construction payload: {exc}") from None
    if name == "m3":
        return M3Triple(parse_rat(params["alpha"]), depth)
    if name == "m4":
        return M4Triple(depth)
    if name == "m1":
        lo, hi = (parse_rat(v) for v in params.get("interval", ["0", "1"]))
        return M1Triple(depth, (lo, hi))
    raise DomainError(f"unknown construction {name!r}")


# ---------------------------------------------------------------------------
# Control functions


def _union(intervals) -> list[tuple[Fraction, Fraction]]:
    merged: list[tuple[Fraction, Fraction]] = []
    for lo, hi in sorted((rat(a), rat(b)) for a, b in intervals):
        if lo >= hi:
            continue
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


@dataclass(frozen=True)
class NullControl:
    """x + sum_{k<=K} 2^k |(a, x) and G_k| for open sets G_k with |G_k| <= 4^-k."""

    a: Fraction
    family: tuple[tuple[tuple[Fraction, Fraction], ...], ...]
    K: int

    def __call__(self, x) -> Fraction:
        x = rat(x)
        total = x
        for k, G in enumerate(self.family[: self.K], start=1):
            measure = sum((max(Fraction(0), min(hi, x) - max(lo, self.a)) for lo, hi in G), Fraction(0))
            total += 2**k * measure
        return total


def null_control(a, g_family: Sequence, K: int) -> NullControl:
    """Control function that grows at rate >= 2^k on the k-th small open set."""
    if K < 1:
        raise DomainError("K must be >= 1")
    family = []
    for k, G in enumerate(g_family, start=1):
        parts = tuple(_union(G))
        measure = sum((hi - lo for lo, hi in parts), Fraction(0))
        if measure > Fraction(1, 4**k):
            raise DomainError(f"|G_{k}| = {fmt_rat(measure)} exceeds 4^-{k}")
        family.append(parts)
    return NullControl(rat(a), tuple(family), K)


@dataclass(frozen=True)
class PerronControl:
    """x + sum_{k<=K} k (U_k(x) - V_k(x))."""

    pairs: tuple
    K: int

    def __call__(self, x) -> Fraction:
        x = rat(x)
        total = x
        for k, (U, V) in enumerate(self.pairs[: self.K], start=1):
            total += k * (U(x) - V(x))
        return total


def perron_to_control(pairs: Sequence, K: int) -> PerronControl:
    return PerronControl(tuple(pairs), K)


def perron_from_control(F: Callable, phi: Callable, eps) -> tuple[Callable, Callable]:
    """Major/minor pair F + eps phi and F - eps phi."""
    eps = rat(eps)

    def U(x):
        return F(rat(x)) + eps * phi(rat(x))

    def V(x):
        return F(rat(x)) - eps * phi(rat(x))

    return U, V
