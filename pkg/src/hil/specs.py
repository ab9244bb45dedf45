"""Parsing of compact spec strings and safe expression evaluation.

Spec strings look like ``"sphere:n=3,R=1"`` or ``"log_cutoff:eps=1e-4,R=1"``.
Expressions such as ``"sqrt(x1**2 + x2**2) - 1"`` are evaluated over numpy
arrays with a whitelist of names; nothing else is reachable.
"""

from __future__ import annotations

import ast
import operator

import numpy as np

from .errors import BadSpec


def _value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_spec(spec) -> tuple[str, dict]:
    """Split ``"name:k=v,k=v"`` into ``(name, {k: v})``; dicts pass through."""
    if isinstance(spec, dict):
        d = dict(spec)
        name = d.pop("kind", None) or d.pop("name", None)
        if name is None:
            raise BadSpec("spec dict needs a 'kind'")
        return name, d
    if not isinstance(spec, str) or not spec.strip():
        raise BadSpec(f"bad spec {spec!r}")
    name, _, rest = spec.strip().partition(":")
    if name.strip() == "expr":
        # expressions contain commas, so the body is taken verbatim
        body = rest.strip()
        return "expr", {"f": body[2:] if body.startswith("f=") else body}
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        if "=" not in item:
            raise BadSpec(f"spec item {item!r} is not key=value")
        k, v = item.split("=", 1)
        params[k.strip()] = _value(v)
    return name.strip(), params


_FUNCS = {
    "sqrt": np.sqrt, "exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos,
    "tan": np.tan, "abs": np.abs, "tanh": np.tanh, "cosh": np.cosh, "sinh": np.sinh,
    "arctan2": np.arctan2, "minimum": np.minimum, "maximum": np.maximum, "where": np.where,
}
_CONST = {"pi": np.pi, "e": np.e}
_BIN = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow, ast.Mod: operator.mod,
}
_CMP = {
    ast.Lt: operator.lt, ast.LtE: operator.le, ast.Gt: operator.gt, ast.GtE: operator.ge,
    ast.Eq: operator.eq, ast.NotEq: operator.ne,
}


def eval_expr(expr: str, variables: dict):
    """Evaluate an arithmetic expression over numpy arrays."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise BadSpec(f"cannot parse expression {expr!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in variables:
                return variables[node.id]
            if node.id in _CONST:
                return _CONST[node.id]
            raise BadSpec(f"unknown name {node.id!r} in expression")
        if isinstance(node, ast.BinOp) and type(node.op) in _BIN:
            return _BIN[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Compare) and len(node.ops) == 1 and type(node.ops[0]) in _CMP:
            return _CMP[type(node.ops[0])](ev(node.left), ev(node.comparators[0]))
        if isinstance(node, ast.BoolOp):
            vals = [ev(v) for v in node.values]
            fn = np.logical_and if isinstance(node.op, ast.And) else np.logical_or
            out = vals[0]
            for v in vals[1:]:
                out = fn(out, v)
            return out
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and not node.keywords):
            return _FUNCS[node.func.id](*[ev(a) for a in node.args])
        raise BadSpec(f"unsupported construct in expression {expr!r}")

    return ev(tree)


def point_variables(points) -> dict:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = {f"x{i + 1}": pts[:, i] for i in range(pts.shape[1])}
    out["r"] = np.linalg.norm(pts, axis=1)
    return out
