"""Run the whole analysis over a range of dyadic depths."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .grid import Box, Grid, RefinementCellMap, diameter, sort_key
from .gridmap import GridMap, minimal_map, morphism_violations
from .interval import MapSpec
from .morse import AugmentedMorseDecomposition, MorseMorphism, augmented, morse_morphism
from .persistence import (
    barcode,
    elementary_decomposition,
    graph_morphism,
    homology,
    induced_homology,
    merge_tree,
    merge_tree_from_graphs,
    morse_graph,
)
from .recurrence import mixing_report
from .timeseries import (
    ObservationSet,
    morita_map,
    observation_map,
    persistent_threshold,
    read_observations,
    read_samples,
    sampled_map,
    thresholded_map,
)


class ConfigError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


SOURCES = ("map", "observations", "samples")


@dataclass
class PipelineConfig:
    source: str
    box: Box
    depth_min: int
    depth_max: int
    map_text: str | None = None
    data_path: str | None = None
    delay: int | None = None
    mu: Fraction | None = None
    schedule_mu: Fraction | None = None
    morita_lambda: Fraction | None = None
    morita_mu: int = 1
    output_format: str = "json"

    def validate(self):
        if self.source not in SOURCES:
            raise ConfigError(f"unknown source {self.source!r}")
        if self.depth_min < 0 or self.depth_min > self.depth_max:
            raise ConfigError(f"bad depth range {self.depth_min}..{self.depth_max}")
        if self.source == "map" and not self.map_text:
            raise ConfigError("a map source needs a map expression")
        if self.source != "map" and not self.data_path:
            raise ConfigError("a data source needs an input file")
        thresholds = [x for x in (self.mu, self.schedule_mu, self.morita_lambda) if x is not None]
        if thresholds and self.source == "map":
            raise ConfigError("thresholds only apply to data sources")
        if len(thresholds) > 1:
            raise ConfigError("choose one of --mu, --schedule-mu, --morita-lambda")
        for mu in (self.mu, self.schedule_mu):
            if mu is not None and not 0 <= mu < 1:
                raise ConfigError("mu must lie in [0, 1)")
        if self.output_format not in ("json", "dot"):
            raise ConfigError(f"unknown output format {self.output_format!r}")

    @property
    def depths(self) -> list[int]:
        """Finest first: refinement maps run from each level to the next."""
        return list(range(self.depth_max, self.depth_min - 1, -1))

    @property
    def persistent(self) -> bool:
        """Whether refinement is guaranteed to be a morphism for this construction."""
        return self.mu is None and self.morita_lambda is None


def thread_count(n_tasks: int) -> int:
    cap = os.environ.get("MORSE_PERSIST_THREADS")
    try:
        cap = int(cap) if cap else os.cpu_count() or 1
    except ValueError:
        raise ConfigError("MORSE_PERSIST_THREADS must be an integer") from None
    return max(1, min(cap, n_tasks))


@dataclass
class Level:
    depth: int
    grid: Grid
    gridmap: GridMap
    amd: AugmentedMorseDecomposition
    mu: Fraction | None = None


def _schedule(cfg: PipelineConfig, box: Box) -> dict:
    mus = {}
    finest = Grid(box, cfg.depth_max)
    for k in cfg.depths:
        mus[k] = persistent_threshold(cfg.schedule_mu, finest, Grid(box, k))
    return mus


def build_levels(cfg: PipelineConfig) -> list[Level]:
    cfg.validate()
    data = None
    if cfg.source == "observations":
        data = read_observations(cfg.data_path, cfg.delay)
    elif cfg.source == "samples":
        data = read_samples(cfg.data_path)
    f = MapSpec.parse(cfg.map_text, cfg.box.dim) if cfg.source == "map" else None
    mus = _schedule(cfg, cfg.box) if cfg.schedule_mu is not None else {}

    def one(k: int) -> Level:
        grid = Grid(cfg.box, k)
        mu = None
        if f is not None:
            m = minimal_map(f, grid)
        elif cfg.schedule_mu is not None:
            mu = mus[k]
            m = thresholded_map(data, grid, mu)
        elif cfg.mu is not None:
            mu = cfg.mu
            m = thresholded_map(data, grid, mu)
        elif cfg.morita_lambda is not None:
            m = morita_map(data, grid, cfg.morita_lambda, cfg.morita_mu)
        elif isinstance(data, ObservationSet):
            m = observation_map(data, grid)
        else:
            m = sampled_map(data, grid)
        return Level(k, grid, m, augmented(m), mu)

    depths = cfg.depths
    with ThreadPoolExecutor(max_workers=thread_count(len(depths))) as pool:
        return list(pool.map(one, depths))


def _cells(s) -> list[str]:
    return [str(c) for c in sorted(s, key=sort_key)]


def run_pipeline(cfg: PipelineConfig) -> dict:
    levels = build_levels(cfg)
    report: dict = {
        "source": cfg.source,
        "box": cfg.box.to_dict(),
        "depths": [lv.depth for lv in levels],
        "levels": [],
        "morphisms": [],
    }
    if cfg.map_text:
        report["map"] = cfg.map_text
    graphs = [morse_graph(lv.amd.decomposition) for lv in levels]
    for lv, mg in zip(levels, graphs):
        h = homology(mg)
        entry = {
            "depth": lv.depth,
            "diameter": str(diameter(lv.grid)),
            "cells": len(lv.grid),
            "gridmap": {"vertices": len(lv.gridmap.vertices), "edges": len(lv.gridmap.edges)},
            "morse": lv.amd.decomposition.to_dict(),
            "morse_graph": {"vertices": len(mg.vertices), "edges": [list(e) for e in mg.sorted_edges()]},
            "homology": {"h0": h.h0, "h1": h.h1},
            "mixing": mixing_report(lv.amd.restrictions),
        }
        if lv.mu is not None:
            entry["mu"] = str(lv.mu)
        report["levels"].append(entry)

    chain: list[MorseMorphism] = []
    all_morphisms = True
    for fine, coarse, gf, gc in zip(levels, levels[1:], graphs, graphs[1:]):
        h = RefinementCellMap(fine.grid, coarse.grid)
        bad = morphism_violations(h, fine.gridmap, coarse.gridmap)
        entry = {"from": fine.depth, "to": coarse.depth, "is_morphism": not bad}
        if bad:
            if cfg.persistent:
                raise InvariantViolation(
                    f"refinement {fine.depth}->{coarse.depth} is not a grid map morphism: {bad[0]}"
                )
            all_morphisms = False
            entry["counterexamples"] = [[str(a), None if b is None else str(b)] for a, b in bad[:20]]
            report["morphisms"].append(entry)
            continue
        mm = morse_morphism(h, fine.amd, coarse.amd)
        chain.append(mm)
        vmap = graph_morphism(mm)
        ranks = induced_homology(gf, gc, vmap)
        ops = elementary_decomposition(gf, gc, vmap)
        entry.update(
            {
                "hbar": list(mm.hbar),
                "induced_ranks": {"h0": ranks.h0, "h1": ranks.h1},
                "elementary_ops": [str(op) for op in ops],
            }
        )
        report["morphisms"].append(entry)

    depths = [lv.depth for lv in levels]
    if all_morphisms:
        if chain:
            tree = merge_tree(chain, levels=depths)
        else:
            tree = merge_tree_from_graphs(graphs, [], levels=depths)
        vmaps = [graph_morphism(mm) for mm in chain]
        bc = barcode(graphs, vmaps, levels=depths)
        for k, g in enumerate(graphs):
            h = homology(g)
            if bc.alive(k, 0) != h.h0 or bc.alive(k, 1) != h.h1:
                raise InvariantViolation(f"barcode disagrees with homology at depth {depths[k]}")
        report["merge_tree"] = tree.to_dict()
        report["barcode"] = bc.to_list()
        coarsest = levels[-1].amd.decomposition
        report["persistent_morse_sets"] = [
            {"set": node[1], "cells": _cells(coarsest.sets[node[1]])} for node in tree.full_branches()
        ]
        report["_tree"] = tree
    else:
        report["merge_tree"] = None
        report["barcode"] = None
        report["persistent_morse_sets"] = None
    report["_graphs"] = graphs
    return report


def public(report: dict) -> dict:
    """Drop the in-memory objects kept for DOT output."""
    return {k: v for k, v in report.items() if not k.startswith("_")}

