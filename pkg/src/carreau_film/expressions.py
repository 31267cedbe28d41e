"""A small arithmetic grammar over ``x`` and ``y`` for case files.

Allowed: numbers, ``x``, ``y``, ``pi``, ``e``, the operators ``+ - * / **``,
and the functions ``sin cos exp abs min max``.  Anything else is rejected at
parse time, so evaluation never touches Python's ``eval``.
"""

from __future__ import annotations

import ast
import math
from functools import reduce

import numpy as np

from .errors import ConfigError

_FUNCS = {
    "sin": (np.sin, 1),
    "cos": (np.cos, 1),
    "exp": (np.exp, 1),
    "abs": (np.abs, 1),
    "min": (np.minimum, None),
    "max": (np.maximum, None),
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}
_UNARY = {ast.UAdd: np.positive, ast.USub: np.negative}


class Expression:
    """Parsed expression ``f(x, y)``, evaluated with numpy broadcasting."""

    def __init__(self, source: str, field: str = "expression"):
        if not isinstance(source, str):
            raise ConfigError(field, f"expected an expression string, got {type(source).__name__}")
        self.source = source
        self.field = field
        try:
            tree = ast.parse(source.strip(), mode="eval")
        except SyntaxError as exc:
            raise ConfigError(field, f"cannot parse {source!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ConfigError(self.field, f"unsupported literal {node.value!r}")
        elif isinstance(node, ast.Name):
            if node.id not in ("x", "y") and node.id not in _CONSTS:
                raise ConfigError(self.field, f"unknown name {node.id!r} (allowed: x, y, pi, e)")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ConfigError(self.field, f"unsupported operator {type(node.op).__name__}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNARY:
                raise ConfigError(self.field, f"unsupported operator {type(node.op).__name__}")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise ConfigError(self.field, f"unsupported function in {self.source!r}")
            if node.keywords:
                raise ConfigError(self.field, "keyword arguments are not allowed")
            arity = _FUNCS[node.func.id][1]
            if arity is not None and len(node.args) != arity:
                raise ConfigError(self.field, f"{node.func.id} takes {arity} argument")
            if arity is None and len(node.args) < 2:
                raise ConfigError(self.field, f"{node.func.id} needs at least two arguments")
            for arg in node.args:
                self._check(arg)
        else:
            raise ConfigError(self.field, f"unsupported syntax {type(node).__name__} in {self.source!r}")

    def _eval(self, node, x, y):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return {"x": x, "y": y}.get(node.id, _CONSTS.get(node.id))
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, x, y), self._eval(node.right, x, y))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](self._eval(node.operand, x, y))
        func = _FUNCS[node.func.id][0]
        args = [self._eval(a, x, y) for a in node.args]
        return reduce(func, args) if len(args) > 1 else func(args[0])

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self._eval(self._tree, x, y), dtype=float)
        return np.broadcast_to(out, np.broadcast_shapes(x.shape, y.shape))

    def __repr__(self):
        return f"Expression({self.source!r})"
