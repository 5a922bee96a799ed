"""Multivalued grid maps, stored as directed graphs on cells."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Callable, Iterable, Mapping

from .grid import Box, Cell, Grid, GridError, RefinementCellMap, sort_key
from .interval import MapSpec


class MapError(ValueError):
    """The map specification cannot produce a grid map on this box."""


@dataclass(frozen=True)
class GridMap:
    """F: G => G as a digraph; an edge G -> H means H is in F(G).

    Vertices need not be dyadic cells: any hashable labels work, which is how
    hand-drawn examples are encoded.  `grid` is None for such maps.
    """

    vertices: frozenset
    edges: frozenset
    grid: Grid | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        for a, b in self.edges:
            if a not in self.vertices or b not in self.vertices:
                raise ValueError(f"edge {a} -> {b} leaves the vertex set")
        if self.grid is not None:
            for v in self.vertices:
                self.grid.check(v)

    @classmethod
    def from_edges(cls, edges: Iterable, vertices: Iterable | None = None, grid: Grid | None = None):
        edges = [tuple(e) for e in edges]
        vs = set(vertices) if vertices is not None else set()
        for a, b in edges:
            vs.add(a)
            vs.add(b)
        return cls(frozenset(vs), frozenset(edges), grid)

    @classmethod
    def from_adjacency(cls, adj: Mapping, grid: Grid | None = None):
        edges = [(a, b) for a, bs in adj.items() for b in bs]
        return cls.from_edges(edges, vertices=adj.keys(), grid=grid)

    @cached_property
    def succ(self) -> dict:
        out = {v: [] for v in self.vertices}
        for a, b in self.edges:
            out[a].append(b)
        return {v: tuple(sorted(bs, key=sort_key)) for v, bs in out.items()}

    @cached_property
    def pred(self) -> dict:
        out = {v: [] for v in self.vertices}
        for a, b in self.edges:
            out[b].append(a)
        return {v: tuple(sorted(bs, key=sort_key)) for v, bs in out.items()}

    def image(self, v) -> tuple:
        return self.succ[v]

    def sorted_vertices(self) -> list:
        return sorted(self.vertices, key=sort_key)

    def sorted_edges(self) -> list:
        return sorted(self.edges, key=lambda e: (sort_key(e[0]), sort_key(e[1])))

    def __len__(self):
        return len(self.vertices)

    def restrict(self, cells: Iterable) -> "GridMap":
        """Induced subgraph on `cells`."""
        keep = frozenset(cells)
        edges = frozenset((a, b) for a, b in self.edges if a in keep and b in keep)
        return GridMap(keep, edges, self.grid)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict() if self.grid is not None else None,
            "vertices": [str(v) for v in self.sorted_vertices()],
            "edges": [[str(a), str(b)] for a, b in self.sorted_edges()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridMap":
        grid = Grid.from_dict(d["grid"]) if d.get("grid") is not None else None
        parse = Cell.parse if grid is not None else str
        edges = [(parse(a), parse(b)) for a, b in d["edges"]]
        vertices = [parse(v) for v in d.get("vertices", [])]
        return cls.from_edges(edges, vertices=vertices, grid=grid)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GridMap":
        return cls.from_dict(json.loads(text))


def as_function(h) -> Callable:
    if isinstance(h, Mapping):
        return h.__getitem__
    return h


# -- construction from a map specification ---------------------------------

MAX_PIECES_LOG2 = 16


def _pieces(box: Box, parent: Box) -> list[Box]:
    mids = [(a + b) / 2 for a, b in zip(parent.lo, parent.hi)]
    out = []
    for bits in product((0, 1), repeat=parent.dim):
        lo = tuple(parent.lo[i] if bit == 0 else mids[i] for i, bit in enumerate(bits))
        hi = tuple(mids[i] if bit == 0 else parent.hi[i] for i, bit in enumerate(bits))
        out.append(Box(lo, hi))
    return out


def _inside(f: MapSpec, piece: Box, box: Box) -> bool:
    return all(box.lo[i] <= iv.lo and iv.hi <= box.hi[i] for i, iv in enumerate(f.enclose(piece)))


@lru_cache(maxsize=64)
def evaluation_depth(f: MapSpec, box: Box) -> int:
    """Smallest uniform subdivision depth at which every piece's enclosure stays in `box`.

    Interval enclosures overestimate, so e.g. 3*x*(1-x) on [0,1] needs a few
    bisections before the enclosures fit.  Raises MapError if no depth up to
    the piece budget works.
    """
    if f.dim != box.dim:
        raise MapError(f"map has dimension {f.dim} but the box has dimension {box.dim}")
    limit = MAX_PIECES_LOG2 // box.dim
    bad = [box] if not _inside(f, box, box) else []
    depth = 0
    while bad:
        depth += 1
        if depth > limit:
            raise MapError(f"map not into X: enclosure of {f.text!r} escapes {box}")
        bad = [p for parent in bad for p in _pieces(box, parent) if not _inside(f, p, box)]
    return depth


def minimal_map(f: MapSpec, grid: Grid, eval_depth: int | None = None) -> GridMap:
    """Outer approximation of the minimal multivalued map of `f` on `grid`.

    Each cell is cut into dyadic pieces at `eval_depth` (default: the grid
    depth, or deeper if the enclosures need it) and G -> H whenever H meets
    the enclosure of f on some piece of G.  The evaluation depth only ever
    grows with the grid depth, which keeps refinement maps morphisms.
    """
    box = grid.box
    need = evaluation_depth(f, box)
    if eval_depth is None:
        eval_depth = max(grid.depth, need)
    if eval_depth < grid.depth:
        raise MapError("evaluation depth must be at least the grid depth")
    fine = Grid(box, eval_depth)
    to_cell = RefinementCellMap(fine, grid)
    adj: dict = {c: set() for c in grid.cells()}
    for piece in fine.cells():
        ivs = f.enclose(fine.cell_box(piece))
        for i, iv in enumerate(ivs):
            if iv.lo < box.lo[i] or iv.hi > box.hi[i]:
                raise MapError(f"map not into X: f({piece}) leaves {box}")
        hits = grid.cells_meeting([iv.lo for iv in ivs], [iv.hi for iv in ivs])
        adj[to_cell(piece)].update(hits)
    return GridMap.from_adjacency(adj, grid=grid)


# -- graph operations ------------------------------------------------------


def trim_stranded(m: GridMap) -> GridMap:
    """Delete vertices without in- or out-edges, repeatedly, until none remain."""
    indeg = {v: 0 for v in m.vertices}
    outdeg = {v: 0 for v in m.vertices}
    for a, b in m.edges:
        outdeg[a] += 1
        indeg[b] += 1
    dead = set()
    stack = [v for v in m.vertices if indeg[v] == 0 or outdeg[v] == 0]
    while stack:
        v = stack.pop()
        if v in dead:
            continue
        dead.add(v)
        for w in m.succ[v]:
            if w in dead or w == v:
                continue
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
        for u in m.pred[v]:
            if u in dead or u == v:
                continue
            outdeg[u] -= 1
            if outdeg[u] == 0:
                stack.append(u)
    if not dead:
        return m
    return m.restrict(m.vertices - dead)


def is_closed(m: GridMap) -> bool:
    return all(m.succ[v] and m.pred[v] for v in m.vertices)


def inverse(m: GridMap) -> GridMap:
    return GridMap(m.vertices, frozenset((b, a) for a, b in m.edges), m.grid)


def is_invariant(s: Iterable, m: GridMap) -> bool:
    """S is contained in both F(S) and F^-1(S)."""
    s = set(s)
    missing = s - m.vertices
    if missing:
        raise ValueError(f"cells {sorted(missing, key=sort_key)} are not vertices of the map")
    return all(
        any(w in s for w in m.succ[v]) and any(u in s for u in m.pred[v]) for v in s
    )


def _check_grids(h, fine: GridMap, coarse: GridMap):
    if isinstance(h, RefinementCellMap):
        if fine.grid is not None and fine.grid != h.source:
            raise GridError("fine map does not live on the source grid of h")
        if coarse.grid is not None and coarse.grid != h.target:
            raise GridError("coarse map does not live on the target grid of h")


def morphism_violations(h, fine: GridMap, coarse: GridMap) -> list:
    """Fine edges (and stray vertices) that h fails to carry into `coarse`."""
    _check_grids(h, fine, coarse)
    hf = as_function(h)
    bad = []
    for v in fine.sorted_vertices():
        if hf(v) not in coarse.vertices:
            bad.append((v, None))
    for a, b in fine.sorted_edges():
        if (hf(a), hf(b)) not in coarse.edges:
            bad.append((a, b))
    return bad


def is_morphism(h, fine: GridMap, coarse: GridMap) -> bool:
    """h(F(G)) is contained in F'(h(G)) for every G."""
    return not morphism_violations(h, fine, coarse)


def induce_coarse(fine: GridMap, h, grid: Grid | None = None) -> GridMap:
    """The direct image h o F o h^-1 as a map on h(vertices)."""
    hf = as_function(h)
    if grid is None and isinstance(h, RefinementCellMap):
        grid = h.target
    vertices = frozenset(hf(v) for v in fine.vertices)
    edges = frozenset((hf(a), hf(b)) for a, b in fine.edges)
    return GridMap(vertices, edges, grid)


def is_submap(small: GridMap, big: GridMap) -> bool:
    return small.vertices <= big.vertices and small.edges <= big.edges


def to_dot(m: GridMap, name: str = "F") -> str:
    lines = [f"digraph {name} {{"]
    for v in m.sorted_vertices():
        lines.append(f'  "{v}";')
    for a, b in m.sorted_edges():
        lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
