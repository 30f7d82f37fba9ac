"""Runtime evaluation of rule and condition expressions."""

from __future__ import annotations

import math
import operator

from ..errors import ExprTypeError, MissingField, RuleRuntimeError
from ..model import Binary, FieldRef, Literal, Unary


def value_type(v) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "long"
    if isinstance(v, float):
        return "double"
    if isinstance(v, str):
        return "String"
    raise ExprTypeError(f"unsupported value {v!r}")


def conforms(value, declared: str) -> bool:
    """Whether ``value`` may be stored in a field of type ``declared``."""
    t = value_type(value)
    return t == declared or (declared == "double" and t == "long")


def coerce(value, declared: str):
    """Store-time promotion; long widens to double."""
    if declared == "double" and value_type(value) == "long":
        return float(value)
    return value


def _numeric(v) -> bool:
    return value_type(v) in ("long", "double")


def _divide(a, b):
    if value_type(a) == value_type(b) == "long":
        if b == 0:
            raise RuleRuntimeError("integer division by zero")
        q = abs(a) // abs(b)
        return q if (a >= 0) == (b >= 0) else -q
    a, b = float(a), float(b)
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": _divide}
_ORDER = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def eval_expr(expr, env: dict):
    """Evaluate ``expr`` with roots ``event``, ``state`` and ``response`` from ``env``.

    A bare field name reads from ``event``. ``&&`` and ``||`` short-circuit.
    Long arithmetic stays integral (division truncates toward zero); mixing
    long and double gives double.
    """
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, FieldRef):
        root = expr.root or "event"
        record = env.get(root)
        if record is None or expr.name not in record:
            raise MissingField(f"{root}.{expr.name}")
        return record[expr.name]
    if isinstance(expr, Unary):
        v = eval_expr(expr.operand, env)
        if expr.op == "!" and value_type(v) == "bool":
            return not v
        if expr.op == "-" and _numeric(v):
            return -v
        raise ExprTypeError(f"operator {expr.op!r} not defined for {value_type(v)}")
    if isinstance(expr, Binary):
        op = expr.op
        left = eval_expr(expr.left, env)
        if op in ("&&", "||"):
            if value_type(left) != "bool":
                raise ExprTypeError(f"operand of {op!r} must be bool")
            if (op == "&&" and not left) or (op == "||" and left):
                return left
            right = eval_expr(expr.right, env)
            if value_type(right) != "bool":
                raise ExprTypeError(f"operand of {op!r} must be bool")
            return right
        right = eval_expr(expr.right, env)
        lt, rt = value_type(left), value_type(right)
        both_numeric = _numeric(left) and _numeric(right)
        if op in _ARITH:
            if both_numeric:
                return _ARITH[op](left, right)
            if op == "+" and lt == rt == "String":
                return left + right
        elif op in _ORDER:
            if both_numeric or lt == rt == "String":
                return _ORDER[op](left, right)
        elif op in ("==", "!="):
            if both_numeric or lt == rt:
                return (left == right) == (op == "==")
        raise ExprTypeError(f"operator {op!r} not defined for {lt} and {rt}")
    raise ExprTypeError(f"not an expression: {expr!r}")


def eval_guard(expr, env: dict) -> bool:
    v = eval_expr(expr, env)
    if value_type(v) != "bool":
        raise ExprTypeError(f"guard evaluated to {value_type(v)}, expected bool")
    return v
