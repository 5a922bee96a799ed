"""Finest Morse decompositions and the morphisms induced by refinement."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .grid import sort_key
from .gridmap import GridMap, as_function, is_morphism, morphism_violations


class MorphismError(ValueError):
    pass


def strongly_connected_components(m: GridMap) -> list[list]:
    """Tarjan's algorithm, iterative.  Components come out sinks first."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    comps: list[list] = []
    counter = 0
    for root in m.sorted_vertices():
        if root in index:
            continue
        work = [(root, iter(m.succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(m.succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def _nontrivial(comp: list, m: GridMap) -> bool:
    return len(comp) > 1 or comp[0] in m.succ[comp[0]]


def recurrent_cells(m: GridMap) -> frozenset:
    return frozenset(v for c in strongly_connected_components(m) if _nontrivial(c, m) for v in c)


@dataclass(frozen=True)
class MorseDecomposition:
    """Morse sets (nontrivial SCCs) with the reachability order.

    `order` holds the strict pairs (j, k), meaning an orbit runs from set j
    to set k with j != k.  Sets are indexed by their smallest cell.
    """

    gridmap: GridMap
    sets: tuple
    order: frozenset

    @cached_property
    def index_of(self) -> dict:
        return {v: j for j, s in enumerate(self.sets) for v in s}

    def __len__(self):
        return len(self.sets)

    def set_of(self, cell) -> int | None:
        return self.index_of.get(cell)

    def above(self, j: int, k: int) -> bool:
        """S_j >= S_k."""
        return j == k or (j, k) in self.order

    def hasse(self) -> list[tuple]:
        out = []
        for j, k in sorted(self.order):
            if not any((j, m) in self.order and (m, k) in self.order for m in range(len(self.sets))):
                out.append((j, k))
        return out

    def to_dict(self) -> dict:
        return {
            "sets": [[str(v) for v in sorted(s, key=sort_key)] for s in self.sets],
            "order": [list(p) for p in sorted(self.order)],
        }


def finest_decomposition(m: GridMap) -> MorseDecomposition:
    comps = strongly_connected_components(m)
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    morse = sorted(
        (c for c in comps if _nontrivial(c, m)),
        key=lambda c: min(sort_key(v) for v in c),
    )
    morse_bit = {}
    for j, c in enumerate(morse):
        morse_bit[comp_of[c[0]]] = 1 << j
    # reach[i]: bitset of Morse sets reachable from component i by a nonempty path
    reach = [0] * len(comps)
    for i, c in enumerate(comps):  # sinks first, so successors are already done
        r = 0
        for v in c:
            for w in m.succ[v]:
                t = comp_of[w]
                if t != i:
                    r |= reach[t] | morse_bit.get(t, 0)
        reach[i] = r
    order = set()
    for j, c in enumerate(morse):
        r = reach[comp_of[c[0]]]
        for k in range(len(morse)):
            if k != j and r >> k & 1:
                order.add((j, k))
    sets = tuple(frozenset(c) for c in morse)
    return MorseDecomposition(m, sets, frozenset(order))


@dataclass(frozen=True)
class AugmentedMorseDecomposition:
    decomposition: MorseDecomposition
    restrictions: tuple

    @property
    def gridmap(self) -> GridMap:
        return self.decomposition.gridmap

    @property
    def sets(self) -> tuple:
        return self.decomposition.sets

    def to_dict(self) -> dict:
        d = self.decomposition.to_dict()
        d["restrictions"] = [[[str(a), str(b)] for a, b in r.sorted_edges()] for r in self.restrictions]
        return d


def restrictions(md: MorseDecomposition) -> AugmentedMorseDecomposition:
    return AugmentedMorseDecomposition(md, tuple(md.gridmap.restrict(s) for s in md.sets))


def augmented(m: GridMap) -> AugmentedMorseDecomposition:
    return restrictions(finest_decomposition(m))


@dataclass(frozen=True)
class MorseMorphism:
    """The pair (hbar, {h_j}): Morse-set map plus per-set cell maps."""

    src: AugmentedMorseDecomposition
    dst: AugmentedMorseDecomposition
    hbar: tuple
    hj: tuple

    def __call__(self, j: int) -> int:
        return self.hbar[j]

    def then(self, other: "MorseMorphism") -> "MorseMorphism":
        """Composite `other` after `self`."""
        if other.src.sets != self.dst.sets:
            raise MorphismError("morphisms do not compose")
        hbar = tuple(other.hbar[k] for k in self.hbar)
        hj = tuple({c: other.hj[self.hbar[j]][d] for c, d in self.hj[j].items()} for j in range(len(self.hbar)))
        return MorseMorphism(self.src, other.dst, hbar, hj)


def morse_morphism(h, src: AugmentedMorseDecomposition, dst: AugmentedMorseDecomposition) -> MorseMorphism:
    """Morphism of augmented decompositions induced by a grid map morphism h."""
    bad = morphism_violations(h, src.gridmap, dst.gridmap)
    if bad:
        raise MorphismError(f"not a morphism: {len(bad)} violation(s), first {bad[0]}")
    hf = as_function(h)
    dmd = dst.decomposition
    hbar = []
    hj = []
    for j, s in enumerate(src.sets):
        targets = {dmd.set_of(hf(c)) for c in s}
        # a graph homomorphism sends an SCC into one SCC, and a nontrivial one
        # to a recurrent one
        assert len(targets) == 1 and None not in targets, "image not recurrent"
        k = targets.pop()
        hbar.append(k)
        hj.append({c: hf(c) for c in s})
        assert is_morphism(hj[-1], src.restrictions[j], dst.restrictions[k])
    smd = src.decomposition
    for j, k in smd.order:
        assert dmd.above(hbar[j], hbar[k]), "order not preserved"
    return MorseMorphism(src, dst, tuple(hbar), tuple(hj))
