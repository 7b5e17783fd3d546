"""Dataclass configurations for the experiment scripts.

Each config is frozen, carries only exact parameters, and knows how to run
itself; ``to_json`` gives the canonical record stored next to results.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .cantor import CantorSystem
from .constructions import ConstructedTriple, lemma_c_rhs, lemma_c_threshold, m3_build, m4_build, q_weights
from .exact import DomainError, fmt_rat, rat
from .verify import CheckReport, divergence_probe, mc_sweep


def _jsonable(value):
    if isinstance(value, Fraction):
        return fmt_rat(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


class _Config:
    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), sort_keys=True)


@dataclass(frozen=True)
class SweepConfig(_Config):
    """An mc sweep of one construction over the endpoints of the level-``level`` intervals."""

    construction: str = "m3"
    alpha: Fraction = Fraction(3)
    beta: Fraction | None = Fraction(4)
    depth: int = 8
    eps_ladder: tuple = (Fraction(1, 2), Fraction(1, 4))
    level: int = 3
    delta_rule: str = "m3-proof-delta"
    extra_levels: int = 3
    sample: int | None = None
    seed: int = 0

    def triple(self) -> ConstructedTriple:
        if self.construction == "m3":
            return m3_build(rat(self.alpha), self.depth)
        if self.construction == "m4":
            return m4_build(self.depth)
        raise DomainError(f"sweeps are defined for m3 and m4, not {self.construction!r}")

    def points(self, triple: ConstructedTriple) -> list[Fraction]:
        pts = triple.system.endpoints(self.level)
        if self.sample is not None and self.sample < len(pts):
            import random

            pts = sorted(random.Random(self.seed).sample(pts, self.sample))
        return pts

    def run(self) -> CheckReport:
        t = self.triple()
        target = rat(self.beta if self.beta is not None else self.alpha)
        ladder = [rat(e) for e in self.eps_ladder]
        return mc_sweep(t, target, ladder, self.points(t), self.delta_rule, self.extra_levels)


@dataclass(frozen=True)
class LemmaCConfig(_Config):
    """Tabulate the weight inequality on base-3 gaps: violations per level for each eta."""

    etas: tuple = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
    max_level: int = 12

    def rows(self) -> list[dict]:
        T = CantorSystem(3)
        out = []
        for eta in map(rat, self.etas):
            for k in range(1, self.max_level + 1):
                gaps = T.gaps(k)
                w = q_weights(k)
                rhs = min(lemma_c_rhs(T, g, eta) for g in gaps)
                bad = sum(1 for g in gaps if w > lemma_c_rhs(T, g, eta))
                out.append({
                    "eta": eta, "level": k, "weight": w, "min_rhs": rhs,
                    "violations": bad, "gaps": len(gaps), "threshold": lemma_c_threshold(eta),
                })
        return out


@dataclass(frozen=True)
class DivergenceConfig(_Config):
    """Least levels at which a partial sum reaches each target."""

    source: str = "m4-oscillations"
    region: tuple = (Fraction(0), Fraction(1))
    targets: tuple = field(default=(Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)))
    cap: int = 4096

    def run(self) -> list[tuple[Fraction, int]]:
        lo, hi = (rat(v) for v in self.region)
        return [(rat(M), divergence_probe(self.source, (lo, hi), rat(M), cap=self.cap)) for M in self.targets]
