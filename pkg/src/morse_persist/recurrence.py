"""Period, cyclic partition and mixing of the dynamics on one Morse set."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd

from .grid import sort_key
from .gridmap import GridMap, induce_coarse, is_submap
from .morse import strongly_connected_components


class RecurrenceError(ValueError):
    pass


def is_strongly_connected(m: GridMap) -> bool:
    return len(m.vertices) > 0 and len(strongly_connected_components(m)) == 1 and len(m.edges) > 0


@dataclass(frozen=True)
class PeriodData:
    period: int
    classes: tuple  # classes[i] is S_{i+1}; every edge goes from class i to class i+1 mod d

    @cached_property
    def class_of(self) -> dict:
        return {v: i for i, c in enumerate(self.classes) for v in c}

    @property
    def mixing(self) -> bool:
        return self.period == 1

    def index(self, cell) -> int:
        try:
            return self.class_of[cell]
        except KeyError:
            raise RecurrenceError(f"{cell} is not in the Morse set") from None

    def to_dict(self, set_index: int | None = None) -> dict:
        d = {
            "period": self.period,
            "classes": [[str(v) for v in sorted(c, key=sort_key)] for c in self.classes],
            "mixing": self.mixing,
        }
        if set_index is not None:
            d = {"set": set_index, **d}
        return d


def period(s: GridMap) -> PeriodData:
    """Period via BFS levels: gcd of level(u) + 1 - level(v) over edges u -> v."""
    if not is_strongly_connected(s):
        raise RecurrenceError("period needs a strongly connected map with at least one edge")
    root = s.sorted_vertices()[0]
    level = {root: 0}
    queue = [root]
    for u in queue:
        for v in s.succ[u]:
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    d = 0
    for u, v in s.edges:
        d = gcd(d, level[u] + 1 - level[v])
    d = abs(d)
    classes = [set() for _ in range(d)]
    for v, lv in level.items():
        classes[lv % d].add(v)
    return PeriodData(d, tuple(frozenset(c) for c in classes))


def is_mixing(s: GridMap) -> bool:
    return period(s).period == 1


@dataclass(frozen=True)
class PeriodReport:
    fine: int
    induced: int
    coarse: int

    @property
    def induced_divides_fine(self) -> bool:
        return self.fine % self.induced == 0

    @property
    def coarse_divides_induced(self) -> bool:
        return self.induced % self.coarse == 0

    @property
    def ok(self) -> bool:
        return self.induced_divides_fine and self.coarse_divides_induced


def period_divides(fine: GridMap, coarse_induced: GridMap, coarse: GridMap, h=None) -> PeriodReport:
    """Check per(induced) | per(fine) and per(coarse) | per(induced).

    If h is given, `coarse_induced` must equal the direct image of `fine`.
    """
    if h is not None:
        img = induce_coarse(fine, h)
        if img.vertices != coarse_induced.vertices or img.edges != coarse_induced.edges:
            raise RecurrenceError("coarse_induced is not the image of fine under h")
    if not is_submap(coarse_induced, coarse):
        raise RecurrenceError("induced map is not contained in the coarse map")
    return PeriodReport(period(fine).period, period(coarse_induced).period, period(coarse).period)


def merge_creates_mixing(pd: PeriodData, G, H) -> bool:
    """Identifying G (class i) with H (class j) makes the image mixing when gcd(d, i-j) = 1."""
    if pd.period <= 1:
        raise RecurrenceError("hypothesis needs period > 1")
    i, j = pd.index(G), pd.index(H)
    return gcd(pd.period, i - j) == 1


def edge_creates_mixing(pd: PeriodData, Gp, Hp) -> bool:
    """A new edge Gp (class i) -> Hp (class j) makes the map mixing when gcd(d, i-j+1) = 1."""
    if pd.period <= 1:
        raise RecurrenceError("hypothesis needs period > 1")
    i, j = pd.index(Gp), pd.index(Hp)
    return gcd(pd.period, i - j + 1) == 1


def collapse(m: GridMap, G, H) -> GridMap:
    """Induced map after identifying H with G (h is injective otherwise)."""
    h = {v: (G if v == H else v) for v in m.vertices}
    return induce_coarse(m, h, grid=m.grid)


def power_graph(m: GridMap, k: int) -> GridMap:
    """Graph of F^k: edges along walks of length exactly k."""
    reach = {v: {v} for v in m.vertices}
    for _ in range(k):
        reach = {v: {w for u in r for w in m.succ[u]} for v, r in reach.items()}
    return GridMap(m.vertices, frozenset((v, w) for v, r in reach.items() for w in r), m.grid)


def mixing_report(restrictions) -> list[dict]:
    return [period(r).to_dict(j) for j, r in enumerate(restrictions)]

