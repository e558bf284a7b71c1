"""Closed-form scalar expressions in x and y (for first integrals and
inverse integrating factors).

Only arithmetic, powers, unary minus, ``sqrt`` and numeric literals are
accepted; the expression is validated on the AST and compiled once.
"""

from __future__ import annotations

import ast

import numpy as np

_ALLOWED_BIN = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_FUNCS = {"sqrt": np.sqrt}


class ExpressionError(ValueError):
    pass


def _check(node: ast.AST, names: tuple[str, ...]) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body, names)
    elif isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BIN):
        _check(node.left, names)
        _check(node.right, names)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        _check(node.operand, names)
    elif isinstance(node, ast.Constant) and type(node.value) in (int, float):
        pass
    elif isinstance(node, ast.Name) and node.id in names:
        pass
    elif (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
          and len(node.args) == 1 and not node.keywords):
        _check(node.args[0], names)
    else:
        raise ExpressionError(f"unsupported syntax in expression: {ast.dump(node)[:60]}")


class Expr:
    """A compiled expression; callable on floats, complex numbers or arrays."""

    def __init__(self, text: str, names: tuple[str, ...] = ("x", "y")):
        self.text = text
        self.names = names
        src = text.replace("^", "**")
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
        _check(tree, names)
        self._code = compile(tree, "<expr>", "eval")

    def __call__(self, *args):
        env = dict(zip(self.names, args))
        return eval(self._code, {"__builtins__": {}, **_FUNCS}, env)

    def gradient(self, x: float, y: float, step: float = 1e-20) -> tuple[float, float]:
        """Complex-step partial derivatives (exact to rounding for analytic input)."""
        gx = np.imag(self(complex(x, step), complex(y, 0.0))) / step
        gy = np.imag(self(complex(x, 0.0), complex(y, step))) / step
        return float(gx), float(gy)

    def __repr__(self) -> str:
        return f"Expr({self.text!r})"
