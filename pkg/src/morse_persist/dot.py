"""Deterministic DOT text for Morse graphs and merge trees."""
from __future__ import annotations

from typing import Mapping

from .persistence import MergeTree, MorseGraph


def _q(x) -> str:
    s = str(x).replace('"', '\\"')
    return f'"{s}"'


def emit_dot(obj, labels: Mapping | None = None, name: str | None = None) -> str:
    if isinstance(obj, MorseGraph):
        return _morse_graph_dot(obj, labels or {}, name or "MorseGraph")
    if isinstance(obj, MergeTree):
        return _merge_tree_dot(obj, name or "MergeTree")
    raise TypeError(f"cannot emit DOT for {type(obj).__name__}")


def _morse_graph_dot(mg: MorseGraph, labels: Mapping, name: str) -> str:
    lines = [f"digraph {name} {{"]
    for v in mg.vertices:
        if v in labels:
            lines.append(f"  {_q(v)} [label={_q(labels[v])}];")
        else:
            lines.append(f"  {_q(v)};")
    for u, v in mg.sorted_edges():
        lines.append(f"  {_q(u)} -> {_q(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _merge_tree_dot(tree: MergeTree, name: str) -> str:
    ident = {n: f"L{n[0]}_{n[1]}" for n in tree.nodes}
    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    for n in tree.nodes:
        lines.append(f"  {_q(ident[n])} [label={_q(f'{tree.levels[n[0]]}:{n[1]}')}];")
    for c, p in tree.parents:
        lines.append(f"  {_q(ident[c])} -> {_q(ident[p])};")
    lines.append("}")
    return "\n".join(lines) + "\n"
