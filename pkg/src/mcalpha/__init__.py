"""Exact constructions and finite checks for integrals with controlled derivatives.

All arithmetic is over :class:`fractions.Fraction`; nothing is ever rounded.
"""

from .cantor import CantorSystem, GapInterval, NodeInterval
from .constructions import (
    FunctionTriple,
    M1Triple,
    M3Triple,
    M4Triple,
    calkin_wilf,
    lc2_build,
    lemma_c_rhs,
    lemma_c_threshold,
    load_triple,
    m1_build,
    m3_build,
    m4_build,
    null_control,
    perron_from_control,
    perron_to_control,
    q_weights,
)
from .exact import (
    BudgetError,
    DigitExpansion,
    DomainError,
    Enclosure,
    IndeterminateError,
    baseq_expand,
    fmt_rat,
    parse_rat,
    rat,
    rat_arith,
)
from .piecewise import PiecewiseC1Fn, Poly, StepFn, bump_c1, ramp_c1
from .verify import (
    CheckReport,
    GridSpec,
    derivative_check,
    divergence_probe,
    mc_point_check,
    mc_sweep,
    osc_sum,
    perron_validity_check,
    sm_check,
)

__version__ = "0.1.0"
