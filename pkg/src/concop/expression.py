"""JSON operator expressions.

A node is an object ``{"op": tag, ...}``.  Combinators take their operands in
``args``; named operators take scalar fields.  Example::

    {"op": "psum", "args": [{"op": "E2"}, {"op": "incr", "delta": 1.5}]}

Errors carry a position: a character offset for malformed JSON, otherwise
the path of the offending node such as ``args[1].args[0]``.
"""

from __future__ import annotations

import json
import math
from functools import reduce
from typing import Any

from . import concentration as conc
from .analytic import E1, E2
from .errors import SpecParseError
from .intervals import INF, IntervalR
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
    op_restrict,
    op_scale_arg,
    op_scale_value,
    op_shift_arg,
    power,
)

_FOLDS = {
    "add": op_add,
    "mul": op_mul,
    "psum": op_parallel_sum,
    "parallel_sum": op_parallel_sum,
    "pprod": op_parallel_product,
    "parallel_product": op_parallel_product,
}


def parse_text(text: str):
    """Parse a JSON expression string into an operator."""
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"malformed JSON: {exc.msg}", exc.pos) from exc
    return build(tree)


def build(node: Any, path: str = "$"):
    if not isinstance(node, dict):
        raise SpecParseError("expected an object with an 'op' field", path)
    tag = node.get("op")
    if not isinstance(tag, str):
        raise SpecParseError("missing or non-string 'op'", path)
    key = tag.lower()
    handler = _HANDLERS.get(key)
    if handler is None:
        raise SpecParseError(f"unknown op {tag!r}", path)
    return handler(key, node, path)


def _num(node: dict, name: str, path: str, default: float | None = None) -> float:
    if name not in node:
        if default is not None:
            return default
        raise SpecParseError(f"missing numeric field {name!r}", path)
    v = node[name]
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise SpecParseError(f"field {name!r} must be a number", path)
    try:
        return float(v)  # accepts "inf" and "-inf"
    except ValueError as exc:
        raise SpecParseError(f"field {name!r} must be a number", path) from exc


def _args(node: dict, path: str, count: int | None = None) -> list:
    raw = node.get("args")
    if raw is None and isinstance(node.get("arg"), dict):
        raw = [node["arg"]]
    if not isinstance(raw, list) or not raw:
        raise SpecParseError("expected a non-empty 'args' list", path)
    if count is not None and len(raw) != count:
        raise SpecParseError(f"expected {count} operand(s), got {len(raw)}", path)
    return [conc._raw(build(a, f"{path}.args[{k}]")) for k, a in enumerate(raw)]


def _fold(key, node, path):
    return reduce(_FOLDS[key], _args(node, path))


def _extremum(key, node, path):
    ops = _args(node, path)
    return op_min(ops) if key == "min" else op_max(ops)


def _compose(key, node, path):
    outer, inner = _args(node, path, 2)
    op, _verdict = op_compose(outer, inner)
    return op


def _invert(key, node, path):
    (f,) = _args(node, path, 1)
    return op_invert(f)


def _restrict(key, node, path):
    (f,) = _args(node, path, 1)
    lo, hi = _num(node, "lo", path, -INF), _num(node, "hi", path, INF)
    if lo > hi:
        raise SpecParseError("restriction needs lo <= hi", path)
    return op_restrict(f, IntervalR.make(lo, hi, math.isfinite(lo), math.isfinite(hi)))


def _shift(key, node, path):
    (f,) = _args(node, path, 1)
    return op_shift_arg(f, _num(node, "delta", path))


def _scale(key, node, path):
    (f,) = _args(node, path, 1)
    if "arg" in node and not isinstance(node["arg"], dict):
        f = op_scale_arg(f, _num(node, "arg", path))
    if "value" in node:
        f = op_scale_value(f, _num(node, "value", path))
    if "factor" in node:
        f = op_scale_arg(f, 1.0 / _num(node, "factor", path))
    return f


def _named(key, node, path):
    if key == "incr":
        return incr(_num(node, "delta", path))
    if key == "incr_pos":
        return incr_pos(_num(node, "delta", path))
    if key == "power":
        return power(_num(node, "a", path))
    if key == "e1":
        return E1()
    if key == "e2":
        return E2()
    if key == "const":
        return const(_num(node, "c", path))
    return const_inv(_num(node, "c", path))


def _survival(key, node, path):
    name = node.get("dist", node.get("name"))
    if not isinstance(name, str):
        raise SpecParseError("survival needs a 'dist' name", path)
    q = node.get("q")
    return conc.law_survival(name, None if q is None else _num(node, "q", path))


def _bound(key, node, path):
    if key == "max_abs_bound":
        base = node.get("base", "E2")
        return conc.max_abs_bound(str(base), int(_num(node, "n", path)))
    if key == "cap":
        (f,) = _args(node, path, 1)
        return conc.cap_at_one(f)
    if key == "lipschitz_rescale":
        (f,) = _args(node, path, 1)
        return conc.lipschitz_rescale(f, _num(node, "sigma", path))
    ops = _args(node, path)
    if key == "sum_tail_bound":
        return conc.sum_tail_bound(ops)
    if key == "product_tail_bound":
        return conc.product_tail_bound(ops)
    return conc.randomized_lipschitz_bound(ops[0], ops[1:])


_HANDLERS = {
    **{k: _fold for k in _FOLDS},
    "min": _extremum,
    "max": _extremum,
    "compose": _compose,
    "invert": _invert,
    "restrict": _restrict,
    "shift": _shift,
    "scale": _scale,
    **{k: _named for k in ("incr", "incr_pos", "power", "e1", "e2", "const", "const_inv")},
    "survival": _survival,
    **{k: _bound for k in ("sum_tail_bound", "product_tail_bound", "randomized_lipschitz_bound",
                           "max_abs_bound", "cap", "lipschitz_rescale")},
}
