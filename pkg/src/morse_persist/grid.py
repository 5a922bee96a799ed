"""Dyadic cubical grids on an axis-aligned box.

Coordinates are exact rationals, so cell boundaries and inclusions never
depend on floating point.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence


class GridError(ValueError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # go through the decimal text so that 0.1 means 1/10
        return Fraction(repr(x))
    return Fraction(x)


def fmt_fraction(x: Fraction) -> str:
    return str(x)


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(as_fraction(v) for v in self.lo)
        hi = tuple(as_fraction(v) for v in self.hi)
        if len(lo) == 0 or len(lo) != len(hi):
            raise GridError("box needs matching, nonempty lo/hi vectors")
        for a, b in zip(lo, hi):
            if not a < b:
                raise GridError(f"degenerate box: lo={a} is not below hi={b}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, point: Sequence) -> bool:
        return all(a <= p <= b for a, p, b in zip(self.lo, point, self.hi))

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def intersects(self, other: "Box") -> bool:
        """Closed intersection: shared faces count."""
        return all(c <= b and a <= d for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def to_dict(self) -> dict:
        return {"lo": [fmt_fraction(v) for v in self.lo], "hi": [fmt_fraction(v) for v in self.hi]}

    @classmethod
    def from_dict(cls, d: dict) -> "Box":
        return cls(tuple(Fraction(v) for v in d["lo"]), tuple(Fraction(v) for v in d["hi"]))

    def __repr__(self):
        sides = ", ".join(f"[{a}, {b}]" for a, b in zip(self.lo, self.hi))
        return f"Box({sides})"


_CELL_RE = re.compile(r"^d:(\d+) i:(\d+(?:,\d+)*)$")


@dataclass(frozen=True, order=True)
class Cell:
    depth: int
    index: tuple

    def __str__(self):
        return f"d:{self.depth} i:{','.join(str(i) for i in self.index)}"

    __repr__ = __str__

    @classmethod
    def parse(cls, text: str) -> "Cell":
        m = _CELL_RE.match(text.strip())
        if m is None:
            raise GridError(f"bad cell id {text!r}")
        return cls(int(m.group(1)), tuple(int(i) for i in m.group(2).split(",")))


def sort_key(v):
    """Total order used wherever vertices of mixed provenance get sorted."""
    if isinstance(v, Cell):
        return (0, v.depth, v.index, "")
    if isinstance(v, int):
        return (1, v, (), "")
    return (2, 0, (), str(v))


@dataclass(frozen=True)
class Grid:
    box: Box
    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise GridError("depth must be nonnegative")

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def per_axis(self) -> int:
        return 2 ** self.depth

    def __len__(self):
        return self.per_axis ** self.dim

    def side(self, axis: int) -> Fraction:
        return (self.box.hi[axis] - self.box.lo[axis]) / self.per_axis

    def cells(self) -> list[Cell]:
        return [Cell(self.depth, idx) for idx in product(range(self.per_axis), repeat=self.dim)]

    def __contains__(self, cell) -> bool:
        return (
            isinstance(cell, Cell)
            and cell.depth == self.depth
            and len(cell.index) == self.dim
            and all(0 <= i < self.per_axis for i in cell.index)
        )

    def check(self, cell: Cell) -> Cell:
        if cell not in self:
            raise GridError(f"cell {cell} does not belong to {self}")
        return cell

    def cell_box(self, cell: Cell) -> Box:
        self.check(cell)
        lo, hi = [], []
        for ax, i in enumerate(cell.index):
            s = self.side(ax)
            lo.append(self.box.lo[ax] + i * s)
            hi.append(self.box.lo[ax] + (i + 1) * s)
        return Box(tuple(lo), tuple(hi))

    def axis_range(self, axis: int, a: Fraction, b: Fraction) -> range:
        """Indices of closed cells along `axis` meeting the interval [a, b]."""
        s = self.side(axis)
        lo = self.box.lo[axis]
        first = max(0, math.ceil((a - lo) / s) - 1)
        last = min(self.per_axis - 1, math.floor((b - lo) / s))
        return range(first, last + 1)

    def cells_meeting(self, lo: Sequence, hi: Sequence) -> list[Cell]:
        """Cells whose closed boxes meet the (possibly degenerate) box [lo, hi]."""
        ranges = [self.axis_range(ax, a, b) for ax, (a, b) in enumerate(zip(lo, hi))]
        return [Cell(self.depth, idx) for idx in product(*ranges)]

    def locate(self, point: Sequence) -> Cell:
        """Cell containing `point`; ties on shared faces go to the smallest index."""
        point = [as_fraction(p) for p in point]
        if len(point) != self.dim:
            raise GridError(f"point {point} has wrong dimension for {self}")
        if not self.box.contains(point):
            raise GridError(f"point ({', '.join(str(p) for p in point)}) lies outside {self.box}")
        idx = []
        for ax, p in enumerate(point):
            t = (p - self.box.lo[ax]) / self.side(ax)
            idx.append(min(self.per_axis - 1, max(math.ceil(t) - 1, 0)))
        return Cell(self.depth, tuple(idx))

    def to_dict(self) -> dict:
        return {"box": self.box.to_dict(), "depth": self.depth}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(Box.from_dict(d["box"]), int(d["depth"]))


def build_grid(box: Box, depth: int) -> Grid:
    return Grid(box, depth)


def diameter(grid: Grid) -> Fraction:
    """Largest cell diameter in the sup norm, i.e. the longest side."""
    return max(grid.side(ax) for ax in range(grid.dim))


@dataclass(frozen=True)
class RefinementCellMap:
    """Inclusion of each fine cell into the coarse cell containing it."""

    source: Grid
    target: Grid

    def __post_init__(self):
        if self.source.box != self.target.box:
            raise GridError("not a refinement: grids live on different boxes")
        if self.source.depth < self.target.depth:
            raise GridError(
                f"not a refinement: depth {self.source.depth} is coarser than {self.target.depth}"
            )

    @property
    def shift(self) -> int:
        return self.source.depth - self.target.depth

    def __call__(self, cell: Cell) -> Cell:
        if cell not in self.source:
            raise GridError(f"cell {cell} is not in the source grid")
        return Cell(self.target.depth, tuple(i >> self.shift for i in cell.index))

    def preimage(self, cell: Cell) -> list[Cell]:
        self.target.check(cell)
        k = 2 ** self.shift
        ranges = [range(i * k, (i + 1) * k) for i in cell.index]
        return [Cell(self.source.depth, idx) for idx in product(*ranges)]

    @property
    def max_fiber(self) -> int:
        """Largest number of fine cells inside one coarse cell."""
        return 2 ** (self.shift * self.source.dim)

    def then(self, other: "RefinementCellMap") -> "RefinementCellMap":
        if other.source != self.target:
            raise GridError("maps do not compose")
        return RefinementCellMap(self.source, other.target)

    def as_dict(self) -> dict:
        return {c: self(c) for c in self.source.cells()}


def refinement_map(fine: Grid, coarse: Grid) -> RefinementCellMap:
    return RefinementCellMap(fine, coarse)


def _merge_axis(boxes: list[Box], ax: int) -> list[Box]:
    groups: dict = {}
    for b in boxes:
        key = tuple((b.lo[i], b.hi[i]) for i in range(b.dim) if i != ax)
        groups.setdefault(key, []).append(b)
    out = []
    for group in groups.values():
        group.sort(key=lambda b: b.lo[ax])
        cur = group[0]
        for b in group[1:]:
            if b.lo[ax] <= cur.hi[ax]:
                hi = list(cur.hi)
                hi[ax] = max(cur.hi[ax], b.hi[ax])
                cur = Box(cur.lo, tuple(hi))
            else:
                out.append(cur)
                cur = b
        out.append(cur)
    return out


def realization(cells: Iterable[Cell], grid: Grid) -> list[Box]:
    """Union of the closed cells, with face-adjacent boxes merged greedily.

    In one dimension this yields the maximal intervals of the union.
    """
    boxes = [grid.cell_box(c) for c in set(cells)]
    while boxes:
        before = len(boxes)
        for ax in range(grid.dim):
            boxes = _merge_axis(boxes, ax)
        if len(boxes) == before:
            break
    return sorted(boxes, key=lambda b: (b.lo, b.hi))
