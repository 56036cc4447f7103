"""Set-valued monotone operators on the real line and the concentration bounds built from them."""

from .analytic import E1, E2, AnalyticSeed, envelope_of_analytic, exp_power, power_seed
from .concentration import (
    EmpiricalSurvival,
    ProbOp,
    cap_at_one,
    classify_prob_op,
    law_survival,
    survival_from_samples,
    taylor_poly_coeffs,
)
from .errors import AlgebraError, ConcopError
from .intervals import IntervalR
from .monotone_graph import MonoCurve, Orientation, build_curve, curves_equal, domain, invert, range_of
from .operator_algebra import (
    const,
    const_inv,
    incr,
    incr_pos,
    op_add,
    op_compose,
    op_invert,
    op_max,
    op_min,
    op_mul,
    op_parallel_product,
    op_parallel_sum,
)
from .operator_integral import SimpleOp, integral, moment
from .resolvent_order import op_leq

__all__ = [
    "AlgebraError", "AnalyticSeed", "ConcopError", "E1", "E2", "EmpiricalSurvival", "IntervalR",
    "MonoCurve", "Orientation", "ProbOp", "SimpleOp", "build_curve", "cap_at_one",
    "classify_prob_op", "const", "const_inv", "curves_equal", "domain", "envelope_of_analytic",
    "exp_power", "incr", "incr_pos", "integral", "invert", "law_survival", "moment", "op_add",
    "op_compose", "op_invert", "op_leq", "op_max", "op_min", "op_mul", "op_parallel_product",
    "op_parallel_sum", "power_seed", "range_of", "survival_from_samples", "taylor_poly_coeffs",
]
