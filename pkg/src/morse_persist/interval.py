"""Exact rational interval arithmetic and polynomial map expressions.

A `MapSpec` is parsed from text such as ``"x^2"`` or ``"y; 1/2*x + 1/4"``
(one expression per output coordinate, separated by ``;``).  Only constants,
coordinates, ``+``, ``-``, ``*``, division by constants and nonnegative
integer powers are accepted, so every enclosure is computed exactly over
the rationals and is inclusion monotone.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .grid import Box, as_fraction


class MapSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        x = as_fraction(x)
        return cls(x, x)

    def __add__(self, other):
        other = _lift(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        other = _lift(other)
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        ps = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise MapSpecError("only nonnegative integer powers are supported")
        if k == 0:
            return Interval.point(1)
        a, b = self.lo**k, self.hi**k
        if k % 2 == 1:
            return Interval(a, b)
        if self.lo >= 0:
            return Interval(a, b)
        if self.hi <= 0:
            return Interval(b, a)
        return Interval(Fraction(0), max(a, b))

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi


def _lift(x) -> Interval:
    return x if isinstance(x, Interval) else Interval.point(x)


_AXIS_NAMES = ("x", "y", "z", "w")


def _variable_index(name: str, dim: int) -> int:
    if name in _AXIS_NAMES[:dim]:
        return _AXIS_NAMES.index(name)
    if name.startswith("x") and name[1:].isdigit():
        i = int(name[1:])
        if i < dim:
            return i
    raise MapSpecError(f"unknown variable {name!r} for a {dim}-dimensional map")


def _compile(node: ast.AST, src: str, dim: int):
    """Validate the expression tree and return it in a tiny tuple IR."""
    if isinstance(node, ast.Expression):
        return _compile(node.body, src, dim)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise MapSpecError(f"unsupported constant {node.value!r}")
        text = ast.get_source_segment(src, node) or repr(node.value)
        return ("const", Fraction(text))
    if isinstance(node, ast.Name):
        return ("var", _variable_index(node.id, dim))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, src, dim)
        return ("neg", inner) if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left = _compile(node.left, src, dim)
        right = _compile(node.right, src, dim)
        if isinstance(node.op, ast.Add):
            return ("add", left, right)
        if isinstance(node.op, ast.Sub):
            return ("sub", left, right)
        if isinstance(node.op, ast.Mult):
            return ("mul", left, right)
        if isinstance(node.op, ast.Div):
            if right[0] != "const":
                raise MapSpecError("division is only allowed by constants")
            if right[1] == 0:
                raise MapSpecError("division by zero")
            return ("mul", left, ("const", 1 / right[1]))
        if isinstance(node.op, ast.Pow):
            if right[0] != "const" or right[1].denominator != 1 or right[1] < 0:
                raise MapSpecError("exponents must be nonnegative integer constants")
            return ("pow", left, int(right[1]))
    raise MapSpecError(f"unsupported syntax: {ast.dump(node)[:60]}")


def _eval(ir, args):
    tag = ir[0]
    if tag == "const":
        return ir[1]
    if tag == "var":
        return args[ir[1]]
    if tag == "neg":
        return -_eval(ir[1], args)
    if tag == "add":
        return _eval(ir[1], args) + _eval(ir[2], args)
    if tag == "sub":
        return _eval(ir[1], args) - _eval(ir[2], args)
    if tag == "mul":
        return _eval(ir[1], args) * _eval(ir[2], args)
    if tag == "pow":
        return _eval(ir[1], args) ** ir[2]
    raise AssertionError(tag)


@dataclass(frozen=True)
class MapSpec:
    """A polynomial map of a box in R^n, one expression per coordinate."""

    text: str
    dim: int = 1
    _ir: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        parts = [p.strip() for p in self.text.replace("^", "**").split(";") if p.strip()]
        if len(parts) != self.dim:
            raise MapSpecError(f"expected {self.dim} coordinate expression(s), got {len(parts)}")
        irs = []
        for part in parts:
            try:
                tree = ast.parse(part, mode="eval")
            except SyntaxError as exc:
                raise MapSpecError(f"cannot parse {part!r}: {exc.msg}") from None
            irs.append(_compile(tree, part, self.dim))
        object.__setattr__(self, "_ir", tuple(irs))

    @classmethod
    def parse(cls, text: str, dim: int | None = None) -> "MapSpec":
        if dim is None:
            dim = len([p for p in text.split(";") if p.strip()])
        return cls(text, dim)

    def __call__(self, point: Sequence) -> tuple:
        """Exact image of a rational point."""
        args = [as_fraction(p) for p in point]
        return tuple(_eval(ir, args) for ir in self._ir)

    def enclose(self, box: Box) -> list[Interval]:
        """Interval enclosure of f(box), one interval per output coordinate."""
        args = [Interval(a, b) for a, b in zip(box.lo, box.hi)]
        return [_lift(_eval(ir, args)) for ir in self._ir]
