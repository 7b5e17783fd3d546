"""Finite, exact checks of controlled-derivative inequalities and related premises.

Each check evaluates the relevant inequality at finitely many rational points
and returns a :class:`CheckReport`.  Enclosure-valued evaluations are handled
conservatively: a pass never rests on a lower bound and a fail never rests on
an upper bound; anything in between raises :class:`IndeterminateError`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .cantor import CantorSystem, GapInterval
from .constructions import (
    ConstructedTriple,
    M3Triple,
    M4Triple,
    lemma_c_threshold,
    q_weights,
)
from .exact import (
    BudgetError,
    DomainError,
    Enclosure,
    IndeterminateError,
    as_enclosure,
    fmt_rat,
    parse_rat,
    rat,
)


def _ser(value):
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return fmt_rat(value)
    if isinstance(value, Enclosure):
        return value.to_json()
    if isinstance(value, dict):
        return {str(k): _ser(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_ser(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


@dataclass
class CheckReport:
    verdict: str
    worst: Fraction | None
    witness: dict
    samples: int
    params: dict
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "worst": _ser(self.worst),
            "witness": _ser(self.witness),
            "samples": self.samples,
            "params": _ser(self.params),
        }
        if self.details:
            out["details"] = _ser(self.details)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class GridSpec:
    """Sample points in the punctured window (center - radius, center + radius)."""

    center: Fraction
    radius: Fraction
    points: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "center", rat(self.center))
        object.__setattr__(self, "radius", rat(self.radius))
        pts = tuple(sorted({rat(p) for p in self.points}))
        if self.radius <= 0:
            raise DomainError("grid radius must be positive")
        for p in pts:
            if p == self.center or abs(p - self.center) >= self.radius:
                raise DomainError(f"grid point {fmt_rat(p)} is outside the punctured window")
        object.__setattr__(self, "points", pts)

    @classmethod
    def explicit(cls, center, radius, points) -> "GridSpec":
        return cls(center, radius, tuple(points))

    @classmethod
    def aligned(cls, triple, center, radius, extra_levels: int = 3) -> "GridSpec":
        """Interval endpoints near the window scale plus, inside every gap, the
        triple's critical points and the midpoints between consecutive ones.

        Midpoints are only taken inside gaps: a midpoint of a closed interval is
        an interior Cantor point where F may only be enclosed.
        """
        center, radius = rat(center), rat(radius)
        system = triple.system
        if system is None:
            raise DomainError("aligned grids need a triple with a Cantor system")
        lo, hi = center - radius, center + radius
        level = 0
        while Fraction(1, system.q**level) > radius:
            level += 1
        nodes, gaps = system.window(lo, hi, level + extra_levels, max(0, level - 1))
        pts = set()
        for n in nodes:
            pts.update((n.left, n.right))
        for g in gaps:
            ladder = sorted({g.left, g.right, *triple.critical_points(g)})
            pts.update(ladder)
            pts.update((a + b) / 2 for a, b in zip(ladder, ladder[1:]))
        inside = [p for p in pts if lo < p < hi and p != center]
        return cls(center, radius, tuple(inside))


# ---------------------------------------------------------------------------
# Controlled-derivative ratio


def mc_ratio(triple, alpha, x, y, control: Callable | None = None):
    """|F(y) - F(x) - f(x)(y - x)| / |phi(x + alpha(y - x)) - phi(x)|.

    Returns a Fraction, or an Enclosure when F is only enclosed at x or y.
    """
    alpha, x, y = rat(alpha), rat(x), rat(y)
    phi = control or triple.phi
    num = as_enclosure(triple.F(y)) - as_enclosure(triple.F(x)) - triple.f(x) * (y - x)
    num = abs(num)
    den = abs(phi(x + alpha * (y - x)) - phi(x))
    if den == 0:
        raise DomainError(f"control is flat between {fmt_rat(x)} and {fmt_rat(x + alpha * (y - x))}")
    if num.is_point:
        return num.lo / den
    return Enclosure(num.lo / den, num.hi / den)


def mc_point_check(triple, alpha, eps, grid: GridSpec, control: Callable | None = None) -> CheckReport:
    """Check |F(y)-F(x)-f(x)(y-x)| <= eps |phi(x+alpha(y-x)) - phi(x)| on the grid."""
    alpha, eps = rat(alpha), rat(eps)
    if alpha <= 0 or eps <= 0:
        raise DomainError("alpha and eps must be positive")
    x = grid.center
    worst, witness, failed = None, {}, False
    undecided = []
    for y in grid.points:
        r = as_enclosure(mc_ratio(triple, alpha, x, y, control))
        if r.hi <= eps:
            value = r.hi
        elif r.lo > eps:
            value, failed = r.lo, True
        else:
            undecided.append(y)
            continue
        if worst is None or value > worst:
            worst, witness = value, {"x": x, "y": y}
    if undecided and not failed:
        raise IndeterminateError(
            f"{len(undecided)} grid points undecided at x={fmt_rat(x)}; deepen the construction",
            undecided=[(x, y) for y in undecided],
        )
    params = {"alpha": alpha, "eps": eps, "x": x, "delta": grid.radius}
    return CheckReport("fail" if failed else "pass", worst, witness, len(grid.points), params)


def m3_proof_delta(triple: M3Triple, beta, eps, x) -> tuple[Fraction, dict]:
    """delta = kappa sigma / 2 with kappa below sigma - (1+eta)/beta and the
    exception level of the gap-weight inequality for eta."""
    beta, eps, x = rat(beta), rat(eps), rat(x)
    if not isinstance(triple, M3Triple):
        raise DomainError("m3-proof-delta applies to m3 constructions")
    if not triple.system.in_cantor(x):
        raise DomainError(f"m3-proof-delta is defined for Cantor points, got {fmt_rat(x)}")
    sigma = triple.sigma
    if beta * sigma <= 1:
        raise DomainError("beta must exceed the construction's alpha")
    eta = min(eps, beta * sigma - 1) / 2
    k0 = lemma_c_threshold(eta)
    kappa = min(Fraction(1, 3 ** (k0 - 1)), (sigma - (1 + eta) / beta) / 2)
    return kappa * sigma / 2, {"eta": eta, "kappa": kappa, "level": k0}


def m4_proof_delta(triple: M4Triple, alpha, eps, x) -> tuple[Fraction, dict]:
    """delta = min(1 - x, 5^(-m-1)) with l, m chosen as in the staircase estimate."""
    alpha, eps, x = rat(alpha), rat(eps), rat(x)
    if not isinstance(triple, M4Triple):
        raise DomainError("m4-proof-delta applies to m4 constructions")
    if alpha <= 2:
        raise DomainError("m4-proof-delta needs alpha > 2")
    if not triple.system.in_cantor(x):
        raise DomainError(f"m4-proof-delta is defined for Cantor points, got {fmt_rat(x)}")
    l = 1
    while not alpha > 2 * (1 + Fraction(1, 5 ** (l - 1))):
        l += 1
    # tau_j increases and sigma_j decreases, so the first good j works for all later j
    m = 1
    while not (
        alpha * M4Triple.tau(m) > 1 + Fraction(1, 5**l)
        and Fraction(3 ** (l + 2), m + 1) < eps
    ):
        m += 1
    delta = Fraction(1, 5 ** (m + 1))
    for room in (x, 1 - x):
        if room > 0:
            delta = min(delta, room)
    return delta, {"l": l, "m": m}


DELTA_RULES = {"m3-proof-delta": m3_proof_delta, "m4-proof-delta": m4_proof_delta}


def resolve_delta(rule: str, triple, alpha, eps, x) -> tuple[Fraction, dict]:
    if rule.startswith("fixed:"):
        delta = parse_rat(rule[len("fixed:"):])
        if delta <= 0:
            raise DomainError("fixed delta must be positive")
        return delta, {}
    try:
        fn = DELTA_RULES[rule]
    except KeyError:
        raise DomainError(f"unknown delta rule {rule!r}") from None
    return fn(triple, alpha, eps, x)


def mc_sweep(
    triple,
    alpha,
    eps_ladder: Sequence,
    points: Iterable,
    delta_rule: str,
    extra_levels: int = 3,
    control: Callable | None = None,
) -> CheckReport:
    """Run mc_point_check at every point and ladder value with delta from ``delta_rule``."""
    alpha = rat(alpha)
    ladder = [rat(e) for e in eps_ladder]
    pts = sorted({rat(p) for p in points})
    worst, witness, samples, failed = None, {}, 0, False
    undecided = []
    per_point = []
    for eps in ladder:
        for x in pts:
            delta, _ = resolve_delta(delta_rule, triple, alpha, eps, x)
            grid = GridSpec.aligned(triple, x, delta, extra_levels)
            try:
                rep = mc_point_check(triple, alpha, eps, grid, control)
            except IndeterminateError as exc:
                undecided.extend(exc.undecided)
                continue
            samples += rep.samples
            failed = failed or not rep.passed
            per_point.append((eps, x, rep.worst))
            if rep.worst is not None and (worst is None or rep.worst > worst):
                worst, witness = rep.worst, dict(rep.witness, eps=eps)
    if undecided:
        raise IndeterminateError(f"{len(undecided)} (x, y) pairs undecided", undecided=undecided)
    params = {"alpha": alpha, "eps": ladder, "delta_rule": delta_rule, "points": len(pts)}
    details = {"per_point": [{"eps": e, "x": x, "worst": w} for e, x, w in per_point]}
    return CheckReport("fail" if failed else "pass", worst, witness, samples, params, details)


# ---------------------------------------------------------------------------
# Monotonicity premise, derivative sampling, major/minor functions


def _ratio_bounds(num, den: Fraction) -> Enclosure:
    return as_enclosure(num).scale(1 / den)


def sm_check(F: Callable, phi: Callable, alpha, points, h_grid, tol=0) -> CheckReport:
    """Finite surrogate of liminf_{h->0+} (F(x+h)-F(x))/(phi(x+alpha h)-phi(x)) >= 0."""
    alpha, tol = rat(alpha), rat(tol)
    pts = sorted({rat(p) for p in points})
    hs = sorted({rat(h) for h in h_grid}, reverse=True)
    if any(h <= 0 for h in hs) or tol < 0:
        raise DomainError("h values must be positive and tol nonnegative")
    worst, witness, verdict = None, {}, "pass"
    for x in pts:
        Fx, phix = as_enclosure(F(x)), phi(x)
        best_lo = best_hi = None
        arg = None
        for h in hs:
            den = phi(x + alpha * h) - phix
            if den <= 0:
                raise DomainError("control must be strictly increasing")
            r = _ratio_bounds(as_enclosure(F(x + h)) - Fx, den)
            if best_lo is None or r.lo > best_lo:
                best_lo, arg = r.lo, h
            best_hi = r.hi if best_hi is None else max(best_hi, r.hi)
        if best_lo >= -tol:
            value = best_lo
        elif best_hi < -tol:
            value, verdict = best_hi, "fail"
        else:
            raise IndeterminateError(f"premise undecided at x={fmt_rat(x)}", undecided=[x])
        if worst is None or value < worst:
            worst, witness = value, {"x": x, "h": arg}
    values = [as_enclosure(F(x)) for x in pts]
    drop = next((i for i in range(len(values) - 1) if values[i + 1].hi < values[i].lo), None)
    details = {"monotone": drop is None}
    if drop is not None:
        details["monotone_witness"] = {"x": pts[drop], "y": pts[drop + 1]}
    params = {"alpha": alpha, "tol": tol, "points": len(pts), "h": hs}
    return CheckReport(verdict, worst, witness, len(pts) * len(hs), params, details)


def derivative_check(F: Callable, f: Callable, x, h_grid) -> CheckReport:
    """Two-sided residuals |F(x+-h) - F(x) -+ f(x)h| / h as h decreases through the grid."""
    x = rat(x)
    hs = sorted({rat(h) for h in h_grid}, reverse=True)
    if not hs or any(h <= 0 for h in hs):
        raise DomainError("h values must be positive")
    Fx, fx = rat(F(x)), rat(f(x))
    residuals = []
    for h in hs:
        right = abs(rat(F(x + h)) - Fx - fx * h)
        left = abs(rat(F(x - h)) - Fx + fx * h)
        residuals.append(max(right, left) / h)
    worst = max(residuals)
    i = residuals.index(worst)
    increasing = any(b > a for a, b in zip(residuals, residuals[1:]))
    details = {"residuals": [{"h": h, "ratio": r} for h, r in zip(hs, residuals)]}
    return CheckReport(
        "fail" if increasing else "pass",
        worst,
        {"x": x, "h": hs[i]},
        len(hs),
        {"x": x, "h": hs},
        details,
    )


def perron_validity_check(U: Callable, V: Callable, f: Callable, grid) -> CheckReport:
    """Grid surrogate of lower derivate of U >= f >= upper derivate of V, and U - V increasing."""
    pts = [rat(p) for p in grid]
    if len(pts) < 2 or any(a >= b for a, b in zip(pts, pts[1:])):
        raise DomainError("grid must be strictly increasing with at least two points")
    Us = [rat(U(p)) for p in pts]
    Vs = [rat(V(p)) for p in pts]
    fs = [rat(f(p)) for p in pts]
    worst, witness = None, {}
    for i in range(len(pts) - 1):
        dx = pts[i + 1] - pts[i]
        checks = (
            ("U", min(fs[i], fs[i + 1]) - (Us[i + 1] - Us[i]) / dx),
            ("V", (Vs[i + 1] - Vs[i]) / dx - max(fs[i], fs[i + 1])),
            ("U-V", (Us[i] - Vs[i]) - (Us[i + 1] - Vs[i + 1])),
        )
        for part, residual in checks:
            if worst is None or residual > worst:
                worst, witness = residual, {"x": pts[i], "y": pts[i + 1], "part": part}
    verdict = "pass" if worst <= 0 else "fail"
    return CheckReport(verdict, worst, witness, len(pts), {"points": len(pts)})


# ---------------------------------------------------------------------------
# Oscillation sums and divergence


def osc_sum(F, gaps: Iterable[GapInterval], plateau_aware: bool = False) -> Fraction:
    """Sum over gaps of |F(b) - F(a)|, or of the oscillation on the closed gap."""
    total = Fraction(0)
    evaluate = F.F if isinstance(F, ConstructedTriple) else F
    for g in gaps:
        if plateau_aware:
            if not isinstance(F, ConstructedTriple):
                raise DomainError("plateau-aware sums need a construction with gap pieces")
            total += F.on_gap(g).restrict(g.left, g.right).oscillation()
            continue
        ends = [evaluate(g.left), evaluate(g.right)]
        if any(isinstance(v, Enclosure) and not v.is_point for v in ends):
            raise IndeterminateError(f"F is only enclosed at an endpoint of {g}")
        a, b = (v.lo if isinstance(v, Enclosure) else v for v in ends)
        total += abs(b - a)
    return total


DEFAULT_PROBE_CAP = 4096


def divergence_probe(source: str, region, target, cap: int = DEFAULT_PROBE_CAP) -> int:
    """Least level K whose partial sum through K reaches ``target``.

    ``m3-weights`` sums the gap weights over ternary gaps inside the region;
    ``m4-oscillations`` sums |F(b) - F(a)| over base-5 gaps inside the region,
    each level's increment taken from one gap of that level.
    """
    lo, hi = (rat(v) for v in region)
    target = rat(target)
    if target <= 0:
        raise DomainError("target must be positive")
    if hi <= max(lo, Fraction(0)) or lo >= 1:
        raise DomainError("region does not meet [0, 1]")
    if source == "m3-weights":
        system = CantorSystem(3)
        weight = q_weights
    elif source == "m4-oscillations":
        triple = M4Triple(1)
        system = triple.system

        def weight(k):
            a, b = Fraction(1, 5**k), Fraction(2, 5**k)
            return abs(triple.F(b) - triple.F(a))

    else:
        raise DomainError(f"unknown divergence source {source!r}")
    total = Fraction(0)
    for k in range(1, cap + 1):
        count = system.count_gaps_within(lo, hi, k)
        if count:
            total += count * weight(k)
        if total >= target:
            return k
    raise BudgetError(f"partial sum {fmt_rat(total)} below target after {cap} levels", count=cap)
