"""Small arithmetic expression language for scalar fields and region predicates.

Grammar: numbers, ``+ - * / ^`` (``**`` also accepted), unary minus,
parentheses, comparisons and ``and``/``or``/``not`` for predicates, the
functions ``abs min max sin cos exp sqrt log`` and the names ``x1 x2 x3``
(coordinates), ``theta`` (colatitude or circle angle), ``phi`` (longitude),
``r`` (Euclidean norm of the coordinates) and ``pi``.
"""
from __future__ import annotations

import ast

import numpy as np

_FUNCS = {
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "log": np.log,
    "min": lambda *a: np.minimum.reduce(np.broadcast_arrays(*a)),
    "max": lambda *a: np.maximum.reduce(np.broadcast_arrays(*a)),
}
_BIN = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
    ast.BitXor: np.power,
}
_CMP = {
    ast.Lt: np.less,
    ast.LtE: np.less_equal,
    ast.Gt: np.greater,
    ast.GtE: np.greater_equal,
    ast.Eq: np.equal,
    ast.NotEq: np.not_equal,
}


class ExprError(ValueError):
    pass


def variables_for(space):
    """Per-node variable table for ``space``."""
    n = space.n
    env = {"pi": np.pi}
    X = space.coords
    if X is not None:
        for k in range(min(X.shape[1], 3)):
            env[f"x{k + 1}"] = X[:, k]
        env["r"] = np.sqrt((X**2).sum(axis=1))
    if space.metric == "circle":
        env["theta"] = space.model_angles
    if space.metric == "sphere":
        env["theta"] = space.colatitude
        env["phi"] = space.longitude
    env["id"] = np.arange(n, dtype=float)
    return env


def evaluate(text: str, env: dict):
    """Evaluate ``text`` elementwise over the arrays in ``env``."""
    try:
        tree = ast.parse(text.replace("^", "**") if "^" in text else text, mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"cannot parse expression {text!r}: {exc.msg}") from None
    return _eval(tree.body, env, text)


def _eval(node, env, text):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise ExprError(f"unknown name {node.id!r} in {text!r}")
        return env[node.id]
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, env, text)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
        if isinstance(node.op, ast.Not):
            return np.logical_not(v)
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN:
        return _BIN[type(node.op)](_eval(node.left, env, text), _eval(node.right, env, text))
    if isinstance(node, ast.BoolOp):
        vals = [_eval(v, env, text) for v in node.values]
        op = np.logical_and if isinstance(node.op, ast.And) else np.logical_or
        out = vals[0]
        for v in vals[1:]:
            out = op(out, v)
        return out
    if isinstance(node, ast.Compare):
        left = _eval(node.left, env, text)
        out = True
        for op, right in zip(node.ops, node.comparators):
            if type(op) not in _CMP:
                break
            r = _eval(right, env, text)
            out = np.logical_and(out, _CMP[type(op)](left, r))
            left = r
        else:
            return out
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and not node.keywords:
        return _FUNCS[node.func.id](*[_eval(a, env, text) for a in node.args])
    raise ExprError(f"unsupported construct {ast.dump(node)[:40]!r} in {text!r}")


def field_from_expr(space, text: str):
    """Scalar field (one float per point) from an expression."""
    v = np.asarray(evaluate(text, variables_for(space)), dtype=float)
    return np.broadcast_to(v, (space.n,)).copy()


def mask_from_expr(space, text: str):
    v = np.asarray(evaluate(text, variables_for(space)), dtype=bool)
    return np.broadcast_to(v, (space.n,)).copy()
