"""Morse graphs and how they persist across a chain of grids.

Covers merge trees, graph homology over the rationals (H0 and H1), the
three elementary operations relating consecutive Morse graphs, the
homology change each operation causes, induced maps on homology and
barcodes obtained from ranks of composite maps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .grid import sort_key
from .morse import MorphismError, MorseDecomposition, MorseMorphism


class OpError(ValueError):
    """An elementary operation whose side conditions fail."""


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class MorseGraph:
    """Transitively closed DAG; an edge (u, v) means u > v."""

    vertices: tuple
    edges: frozenset

    def __post_init__(self):
        vs = tuple(sorted(set(self.vertices), key=sort_key))
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        vset = set(vs)
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"Morse graphs have no loops ({u})")
            if u not in vset or v not in vset:
                raise ValueError(f"edge {u} -> {v} leaves the vertex set")

    @classmethod
    def closure_of(cls, vertices: Iterable, edges: Iterable) -> "MorseGraph":
        """Transitive closure of an acyclic edge set."""
        vertices = list(vertices)
        succ = {v: set() for v in vertices}
        for u, v in edges:
            succ[u].add(v)
        reach: dict = {}

        def visit(v, path):
            if v in reach:
                return reach[v]
            if v in path:
                raise ValueError("edge set has a directed cycle")
            path.add(v)
            r = set()
            for w in succ[v]:
                r.add(w)
                r |= visit(w, path)
            path.discard(v)
            reach[v] = r
            return r

        for v in vertices:
            visit(v, set())
        return cls(tuple(vertices), frozenset((u, w) for u in vertices for w in reach[u]))

    @cached_property
    def _above(self) -> dict:
        out = {v: set() for v in self.vertices}
        for u, v in self.edges:
            out[v].add(u)
        return {v: frozenset(s) for v, s in out.items()}

    @cached_property
    def _below(self) -> dict:
        out = {v: set() for v in self.vertices}
        for u, v in self.edges:
            out[u].add(v)
        return {v: frozenset(s) for v, s in out.items()}

    def A(self, v) -> frozenset:
        """Vertices strictly above v."""
        return self._above[v]

    def B(self, v) -> frozenset:
        """Vertices strictly below v."""
        return self._below[v]

    def N(self, v) -> frozenset:
        """Vertices incomparable with v."""
        return frozenset(self.vertices) - self._above[v] - self._below[v] - {v}

    def I(self, v, w) -> frozenset:
        """Vertices strictly between v and w."""
        return self._below[v] & self._above[w]

    def a(self, v) -> int:
        return len(self._above[v])

    def b(self, v) -> int:
        return len(self._below[v])

    def gt(self, u, v) -> bool:
        return (u, v) in self.edges

    def comparable(self, u, v) -> bool:
        return u == v or (u, v) in self.edges or (v, u) in self.edges

    def is_transitively_closed(self) -> bool:
        return all((u, w) in self.edges for u, v in self.edges for w in self._below[v])

    def is_acyclic(self) -> bool:
        return not any((v, u) in self.edges for u, v in self.edges)

    def sorted_edges(self) -> list:
        return sorted(self.edges, key=lambda e: (sort_key(e[0]), sort_key(e[1])))

    def hasse_edges(self) -> list:
        return [(u, v) for u, v in self.sorted_edges() if not (self._below[u] & self._above[v])]

    def to_dict(self) -> dict:
        return {"vertices": [str(v) for v in self.vertices], "edges": [[str(u), str(v)] for u, v in self.sorted_edges()]}


def morse_graph(md: MorseDecomposition) -> MorseGraph:
    return MorseGraph(tuple(range(len(md.sets))), md.order)


def graph_morphism(mm: MorseMorphism) -> dict:
    """Vertex map between the Morse graphs of mm's source and target."""
    return dict(enumerate(mm.hbar))


def is_graph_homomorphism(src: MorseGraph, dst: MorseGraph, vmap: Mapping) -> bool:
    """Every edge goes to an edge or collapses to a vertex."""
    if any(vmap.get(v) not in dst.vertices for v in src.vertices):
        return False
    return all(vmap[u] == vmap[v] or (vmap[u], vmap[v]) in dst.edges for u, v in src.edges)


# -- merge trees -----------------------------------------------------------


@dataclass(frozen=True)
class MergeTree:
    """Nodes are (level index, Morse-graph vertex); parents point one level up the chain."""

    levels: tuple
    nodes: tuple
    parents: tuple

    @cached_property
    def parent(self) -> dict:
        return dict(self.parents)

    @cached_property
    def children(self) -> dict:
        out = {n: [] for n in self.nodes}
        for c, p in self.parents:
            out[p].append(c)
        return out

    def nodes_at(self, level: int) -> list:
        return [n for n in self.nodes if n[0] == level]

    def roots(self) -> list:
        return [n for n in self.nodes if n not in self.parent]

    def births(self) -> list:
        """Nodes with no predecessor: where a vertex first appears."""
        return [n for n in self.nodes if not self.children[n]]

    def merges(self) -> list:
        return [n for n in self.nodes if len(self.children[n]) > 1]

    def ancestors(self, node) -> list:
        """Nodes at the first level whose chain of parents runs through `node`."""
        frontier = [node]
        while frontier and frontier[0][0] > 0:
            frontier = [c for n in frontier for c in self.children[n]]
        return frontier

    def full_branches(self) -> list:
        """Last-level nodes reached from some first-level node."""
        last = len(self.levels) - 1
        return [n for n in self.nodes_at(last) if self.ancestors(n)]

    def to_dict(self) -> dict:
        ident = {n: i for i, n in enumerate(self.nodes)}
        return {
            "levels": [str(l) for l in self.levels],
            "nodes": [{"id": ident[n], "level": n[0], "vertex": str(n[1])} for n in self.nodes],
            "parents": [[ident[c], ident[p]] for c, p in self.parents],
        }


def merge_tree_from_graphs(graphs: Sequence[MorseGraph], vmaps: Sequence[Mapping], levels: Sequence | None = None) -> MergeTree:
    if len(vmaps) != max(len(graphs) - 1, 0):
        raise ValueError("chain mismatch: need one vertex map between consecutive graphs")
    levels = tuple(levels) if levels is not None else tuple(range(len(graphs)))
    if len(levels) != len(graphs):
        raise ValueError("chain mismatch: one level label per graph")
    nodes = tuple((k, v) for k, g in enumerate(graphs) for v in g.vertices)
    parents = []
    for k, vm in enumerate(vmaps):
        for v in graphs[k].vertices:
            t = vm[v]
            if t not in graphs[k + 1].vertices:
                raise ValueError(f"chain mismatch: level {k} vertex {v} maps outside level {k + 1}")
            parents.append(((k, v), (k + 1, t)))
    return MergeTree(levels, nodes, tuple(parents))


def merge_tree(chain: Sequence[MorseMorphism], levels: Sequence | None = None) -> MergeTree:
    """Merge tree over a chain of Morse morphisms (finest grid first)."""
    if not chain:
        raise ValueError("empty chain; use merge_tree_from_graphs for a single level")
    for first, second in zip(chain, chain[1:]):
        if first.dst.sets != second.src.sets:
            raise MorphismError("chain mismatch: consecutive morphisms do not compose")
    graphs = [morse_graph(chain[0].src.decomposition)] + [morse_graph(mm.dst.decomposition) for mm in chain]
    return merge_tree_from_graphs(graphs, [graph_morphism(mm) for mm in chain], levels)


# -- homology ----------------------------------------------------------------


@dataclass(frozen=True)
class HomologySummary:
    h0: int
    h1: int


def components(mg: MorseGraph) -> list[list]:
    """Connected components of the underlying undirected graph, canonically ordered."""
    parent = {v: v for v in mg.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in mg.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    groups: dict = {}
    for v in mg.vertices:
        groups.setdefault(find(v), []).append(v)
    return sorted((sorted(g, key=sort_key) for g in groups.values()), key=lambda g: sort_key(g[0]))


def homology(mg: MorseGraph) -> HomologySummary:
    h0 = len(components(mg))
    return HomologySummary(h0, len(mg.edges) - len(mg.vertices) + h0)


# -- elementary operations ---------------------------------------------------


@dataclass(frozen=True)
class AddVertex:
    v: object
    target: object = field(default=None, compare=False)

    def __str__(self):
        return f"AddVertex({self.v})"


@dataclass(frozen=True)
class AddEdge:
    v: object
    w: object

    def __str__(self):
        return f"AddEdge({self.v}, {self.w})"


@dataclass(frozen=True)
class MergeVertices:
    """Merge v > w; the merged vertex keeps the name v."""

    v: object
    w: object

    def __str__(self):
        return f"MergeVertices({self.v}, {self.w})"


def check_op(op, mg: MorseGraph) -> None:
    """Raise OpError unless `op`'s side conditions hold in `mg`."""
    vs = set(mg.vertices)
    if isinstance(op, AddVertex):
        if op.v in vs:
            raise OpError(f"vertex {op.v} already present")
        return
    if op.v not in vs or op.w not in vs or op.v == op.w:
        raise OpError(f"{op}: needs two distinct existing vertices")
    v, w = op.v, op.w
    if isinstance(op, AddEdge):
        if mg.comparable(v, w):
            raise OpError(f"{op}: endpoints are comparable")
        if mg.A(v) & mg.N(w):
            raise OpError(f"{op}: {v} is not maximal among vertices incomparable with {w}")
        if mg.B(w) & mg.N(v):
            raise OpError(f"{op}: {w} is not minimal among vertices incomparable with {v}")
        return
    if isinstance(op, MergeVertices):
        if not mg.gt(v, w):
            raise OpError(f"{op}: {v} is not above {w}")
        if mg.I(v, w):
            raise OpError(f"{op}: vertices lie strictly between {v} and {w}")
        for u in mg.A(w):
            for x in mg.B(v):
                if not mg.gt(u, x):
                    raise OpError(f"{op}: merging would force a new edge {u} -> {x}")
        return
    raise OpError(f"unknown operation {op!r}")


def apply_op(mg: MorseGraph, op) -> MorseGraph:
    check_op(op, mg)
    if isinstance(op, AddVertex):
        return MorseGraph(mg.vertices + (op.v,), mg.edges)
    if isinstance(op, AddEdge):
        return MorseGraph(mg.vertices, mg.edges | {(op.v, op.w)})
    v, w = op.v, op.w
    ren = lambda x: v if x == w else x  # noqa: E731
    edges = frozenset((ren(a), ren(b)) for a, b in mg.edges if {ren(a), ren(b)} != {v})
    return MorseGraph(tuple(x for x in mg.vertices if x != w), edges)


def homology_delta(op, mg: MorseGraph) -> tuple[int, int]:
    """(change in dim H0, change in dim H1) caused by applying `op` to `mg`."""
    check_op(op, mg)
    if isinstance(op, AddVertex):
        return (1, 0)
    if isinstance(op, AddEdge):
        comp = {v: i for i, c in enumerate(components(mg)) for v in c}
        return (-1, 0) if comp[op.v] != comp[op.w] else (0, 1)
    return (0, -mg.a(op.v) - mg.b(op.w))


def replay(src: MorseGraph, ops: Iterable) -> tuple[MorseGraph, dict]:
    """Apply ops in order; also report where each src vertex ends up."""
    g = src
    where = {v: v for v in src.vertices}
    for op in ops:
        g = apply_op(g, op)
        if isinstance(op, MergeVertices):
            where = {s: (op.v if c == op.w else c) for s, c in where.items()}
    return g, where


def _pick(candidates, key):
    return min(candidates, key=key)


def _edge_op(g: MorseGraph, u, w) -> AddEdge:
    """An addable edge v -> v' forced by wanting u above w (u, w incomparable)."""
    top = ({u} | g.A(u)) & g.N(w)
    maximal = [x for x in top if not (g.A(x) & top)]
    v = _pick(maximal, sort_key)
    bottom = ({w} | g.B(w)) & g.N(v)
    minimal = [x for x in bottom if not (g.B(x) & bottom)]
    return AddEdge(v, _pick(minimal, sort_key))


def elementary_decomposition(src: MorseGraph, dst: MorseGraph, vmap: Mapping) -> list:
    """Operations turning `src` into `dst`, identified through `vmap`.

    Order: new vertices first, then edges (each chosen so that adding it
    forces nothing else), then merges from the top down; merges may need
    a few more edges before their side conditions hold.
    """
    if not dst.is_transitively_closed() or not dst.is_acyclic():
        raise DecompositionError("no valid decomposition: target is not a Morse graph")
    if not is_graph_homomorphism(src, dst, vmap):
        raise DecompositionError("no valid decomposition: vertex map is not a homomorphism")

    ops: list = []
    g = src
    label = {v: vmap[v] for v in src.vertices}
    taken = set(src.vertices)
    hit = set(label.values())
    for t in dst.vertices:
        if t in hit:
            continue
        name = t if t not in taken else ("new", t)
        op = AddVertex(name, target=t)
        ops.append(op)
        g = apply_op(g, op)
        label[name] = t
        taken.add(name)

    def step(op):
        nonlocal g
        ops.append(op)
        g = apply_op(g, op)

    budget = 4 * (len(g.vertices) ** 2 + 1)
    while budget:
        budget -= 1
        # a target edge is covered once any pair of members of the two classes has it
        have = {(label[u], label[w]) for u, w in g.edges}
        missing = [
            (u, w)
            for u in g.vertices
            for w in g.vertices
            if (label[u], label[w]) in dst.edges and (label[u], label[w]) not in have
        ]
        if missing:
            u, w = min(missing, key=lambda p: (sort_key(p[0]), sort_key(p[1])))
            if g.gt(w, u):
                raise DecompositionError("no valid decomposition: vertex map reverses an edge")
            step(_edge_op(g, u, w))
            continue
        classes: dict = {}
        for v in g.vertices:
            classes.setdefault(label[v], []).append(v)
        todo = sorted((c for c in classes.values() if len(c) > 1), key=lambda c: sort_key(c[0]))
        if not todo:
            break
        cls = set(todo[0])
        tops = sorted((x for x in cls if not (g.A(x) & cls)), key=sort_key)
        x = tops[0]
        below = [y for y in cls if g.gt(x, y)]
        if not below:
            y = min((y for y in cls if y != x), key=sort_key)
            step(_edge_op(g, x, y))
            continue
        y = min((y for y in below if not g.I(x, y)), key=sort_key)
        gaps = [(u, z) for u in g.A(y) for z in g.B(x) if not g.gt(u, z)]
        if gaps:
            u, z = min(gaps, key=lambda p: (sort_key(p[0]), sort_key(p[1])))
            step(_edge_op(g, u, z))
            continue
        step(MergeVertices(x, y))
    else:
        raise DecompositionError("no valid decomposition: search did not terminate")
    return ops


def realizes(src: MorseGraph, ops: Sequence, dst: MorseGraph, vmap: Mapping) -> bool:
    """Replaying `ops` on src gives dst, with src vertices landing where vmap says."""
    g, where = replay(src, ops)
    label = {}
    for s, c in where.items():
        if label.setdefault(c, vmap[s]) != vmap[s]:
            return False
    for op in ops:
        if isinstance(op, AddVertex):
            label[op.v] = op.target if op.target is not None else op.v
    if set(label) != set(g.vertices) or len(set(label.values())) != len(label):
        return False
    if set(label.values()) != set(dst.vertices):
        return False
    return {(label[u], label[v]) for u, v in g.edges} == set(dst.edges)


# -- induced maps on homology ----------------------------------------------


def rank(rows: Sequence[Sequence]) -> int:
    """Rank over Q by fraction-exact Gaussian elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, len(m)):
            if m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def matmul(a, b):
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in a]
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


@dataclass(frozen=True)
class CycleBasis:
    """Fundamental cycles of a spanning forest, as signed edge chains."""

    graph: MorseGraph
    tree_edges: frozenset
    chords: tuple
    cycles: tuple

    def coordinates(self, chain: Mapping) -> list:
        """Coefficients of a cycle (edge -> coefficient) in this basis."""
        return [chain.get(e, 0) for e in self.chords]


def cycle_basis(mg: MorseGraph) -> CycleBasis:
    nbrs = {v: [] for v in mg.vertices}
    for u, v in mg.sorted_edges():
        nbrs[u].append((v, (u, v)))
        nbrs[v].append((u, (u, v)))
    parent: dict = {}
    tree = set()
    for comp in components(mg):
        root = comp[0]
        parent[root] = None
        queue = [root]
        for x in queue:
            for y, e in nbrs[x]:
                if y not in parent:
                    parent[y] = (x, e)
                    tree.add(e)
                    queue.append(y)

    def to_root(x) -> dict:
        chain: dict = {}
        while parent[x] is not None:
            p, e = parent[x]
            sign = 1 if e == (x, p) else -1
            chain[e] = chain.get(e, 0) + sign
            x = p
        return chain

    chords = tuple(e for e in mg.sorted_edges() if e not in tree)
    cycles = []
    for a, b in chords:
        chain = {(a, b): 1}
        for e, c in to_root(b).items():
            chain[e] = chain.get(e, 0) + c
        for e, c in to_root(a).items():
            chain[e] = chain.get(e, 0) - c
        cycles.append({e: c for e, c in chain.items() if c})
    return CycleBasis(mg, frozenset(tree), chords, tuple(cycles))


def push_chain(chain: Mapping, vmap: Mapping, dst: MorseGraph) -> dict:
    out: dict = {}
    for (u, v), c in chain.items():
        a, b = vmap[u], vmap[v]
        if a == b:
            continue
        if (a, b) not in dst.edges:
            raise ValueError(f"edge {u}->{v} maps to a non-edge {a}->{b}")
        out[(a, b)] = out.get((a, b), 0) + c
    return {e: c for e, c in out.items() if c}


def induced_matrix(src: MorseGraph, dst: MorseGraph, vmap: Mapping, dim: int) -> list[list]:
    """Matrix of the induced map H_dim(src) -> H_dim(dst) in canonical bases.

    H0 basis: components in canonical order.  H1 basis: fundamental cycles.
    Rows index the target basis, columns the source basis.
    """
    if dim == 0:
        sc, dc = components(src), components(dst)
        where = {v: i for i, c in enumerate(dc) for v in c}
        m = [[0] * len(sc) for _ in dc]
        for j, c in enumerate(sc):
            m[where[vmap[c[0]]]][j] = 1
        return m
    if dim == 1:
        sb, db = cycle_basis(src), cycle_basis(dst)
        cols = [db.coordinates(push_chain(z, vmap, dst)) for z in sb.cycles]
        return [[cols[j][i] for j in range(len(cols))] for i in range(len(db.chords))]
    raise ValueError("graphs only have homology in dimensions 0 and 1")


@dataclass(frozen=True)
class InducedRanks:
    h0: int
    h1: int


def induced_homology(src: MorseGraph, dst: MorseGraph, vmap: Mapping) -> InducedRanks:
    return InducedRanks(rank(induced_matrix(src, dst, vmap, 0)), rank(induced_matrix(src, dst, vmap, 1)))


# -- barcodes ----------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Bar:
    dim: int
    birth: int
    death: int | None  # index of the first level where the class is gone

    def alive_at(self, k: int) -> bool:
        return self.birth <= k and (self.death is None or k < self.death)


@dataclass(frozen=True)
class Barcode:
    levels: tuple
    bars: tuple

    def in_dim(self, dim: int) -> list[Bar]:
        return [b for b in self.bars if b.dim == dim]

    def alive(self, k: int, dim: int) -> int:
        return sum(b.alive_at(k) for b in self.in_dim(dim))

    def full_bars(self, dim: int) -> list[Bar]:
        return [b for b in self.in_dim(dim) if b.birth == 0 and b.death is None]

    def to_list(self) -> list[dict]:
        return [
            {
                "dim": b.dim,
                "birth": str(self.levels[b.birth]),
                "death": None if b.death is None else str(self.levels[b.death]),
            }
            for b in self.bars
        ]


def compose_maps(vmaps: Sequence[Mapping], i: int, j: int, vertices: Iterable) -> dict:
    """Composite of vmaps[i], ..., vmaps[j-1] on `vertices`."""
    out = {}
    for v in vertices:
        x = v
        for k in range(i, j):
            x = vmaps[k][x]
        out[v] = x
    return out


def rank_function(graphs: Sequence[MorseGraph], vmaps: Sequence[Mapping], dim: int) -> dict:
    r = {}
    for i in range(len(graphs)):
        for j in range(i, len(graphs)):
            comp = compose_maps(vmaps, i, j, graphs[i].vertices)
            r[i, j] = rank(induced_matrix(graphs[i], graphs[j], comp, dim))
    return r


def barcode(graphs: Sequence[MorseGraph], vmaps: Sequence[Mapping], levels: Sequence | None = None) -> Barcode:
    """Interval decomposition from ranks of all composite maps.

    Multiplicity of [i, j] is r(i,j) - r(i-1,j) - r(i,j+1) + r(i-1,j+1).
    """
    if len(vmaps) != max(len(graphs) - 1, 0):
        raise ValueError("need one vertex map between consecutive graphs")
    levels = tuple(levels) if levels is not None else tuple(range(len(graphs)))
    n = len(graphs)
    bars = []
    for dim in (0, 1):
        r = rank_function(graphs, vmaps, dim)
        get = lambda i, j: r.get((i, j), 0)  # noqa: E731
        for i in range(n):
            for j in range(i, n):
                mult = get(i, j) - get(i - 1, j) - get(i, j + 1) + get(i - 1, j + 1)
                assert mult >= 0, "negative bar multiplicity"
                death = None if j == n - 1 else j + 1
                bars.extend([Bar(dim, i, death)] * mult)
    return Barcode(levels, tuple(sorted(bars, key=lambda b: (b.dim, b.birth, n if b.death is None else b.death))))
