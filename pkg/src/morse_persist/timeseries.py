"""Grid maps built from data: observed orbit segments and sampled (x, f(x)) pairs.

Points are binned into the closed cell containing them; a point on a shared
face goes to the cell with the smallest index, which commutes with dyadic
coarsening.
"""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .grid import Grid, GridError, RefinementCellMap, as_fraction
from .gridmap import GridMap, morphism_violations, trim_stranded


class DataError(ValueError):
    pass


def _coord(x) -> Fraction:
    return Fraction(x) if isinstance(x, str) else as_fraction(x)


def _point(p) -> tuple:
    if isinstance(p, (list, tuple)):
        return tuple(_coord(x) for x in p)
    return (_coord(p),)


@dataclass(frozen=True)
class ObservationSet:
    """Observed orbit segments, each a sequence of points in R^m."""

    series: tuple

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(tuple(_point(p) for p in s) for s in self.series))

    def transitions(self) -> list[tuple]:
        return [(s[j], s[j + 1]) for s in self.series for j in range(len(s) - 1)]


@dataclass(frozen=True)
class SampleSet:
    """Pairs (x_i, y_i) with y_i = f(x_i)."""

    pairs: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((_point(x), _point(y)) for x, y in self.pairs))


def delay_embed(series: Sequence, m: int) -> ObservationSet:
    """Sliding windows of length m over a scalar series, as one observed orbit."""
    if m < 1:
        raise DataError("embedding dimension must be at least 1")
    if len(series) < m:
        raise DataError(f"series of length {len(series)} is shorter than the window {m}")
    windows = [tuple(series[i : i + m]) for i in range(len(series) - m + 1)]
    return ObservationSet((windows,))


def _bin(grid: Grid, p):
    try:
        return grid.locate(p)
    except GridError as exc:
        raise DataError(str(exc)) from None


def _from_pairs(pairs: Iterable[tuple], grid: Grid) -> Counter:
    n: Counter = Counter()
    for x, y in pairs:
        n[_bin(grid, x), _bin(grid, y)] += 1
    return n


def _map_from_edges(edges: Iterable, grid: Grid, trim: bool) -> GridMap:
    m = GridMap.from_edges(edges, vertices=grid.cells(), grid=grid)
    return trim_stranded(m) if trim else m


def observation_map(o: ObservationSet, grid: Grid, trim: bool = True) -> GridMap:
    return _map_from_edges(_from_pairs(o.transitions(), grid), grid, trim)


def sampled_map(d: SampleSet, grid: Grid, trim: bool = True) -> GridMap:
    return _map_from_edges(_from_pairs(d.pairs, grid), grid, trim)


@dataclass(frozen=True)
class TransitionCounts:
    n: dict
    v: dict

    @property
    def n_max(self) -> int:
        return max(self.n.values(), default=0)

    def t(self, G, H) -> Fraction:
        """Transition probability n(G,H)/v(G); zero when G holds no points."""
        vg = self.v.get(G, 0)
        return Fraction(self.n.get((G, H), 0), vg) if vg else Fraction(0)

    def coarsen(self, h) -> "TransitionCounts":
        n: Counter = Counter()
        for (G, H), c in self.n.items():
            n[h(G), h(H)] += c
        v: Counter = Counter()
        for G, c in self.v.items():
            v[h(G)] += c
        return TransitionCounts(dict(n), dict(v))


def transition_counts(d, grid: Grid) -> TransitionCounts:
    """Counts from a SampleSet or an ObservationSet.

    For observations v(G) counts every observed point in G, the last point of
    each series included, so t(G, H) can sum to less than one.
    """
    if isinstance(d, ObservationSet):
        n = _from_pairs(d.transitions(), grid)
        v = Counter(_bin(grid, p) for s in d.series for p in s)
    else:
        n = _from_pairs(d.pairs, grid)
        v = Counter(_bin(grid, x) for x, _ in d.pairs)
    return TransitionCounts(dict(n), dict(v))


def thresholded_map(d, grid: Grid, mu, trim: bool = True) -> GridMap:
    """Keep G -> H when n(G,H) > mu * n_max."""
    mu = as_fraction(mu)
    if not 0 <= mu < 1:
        raise DataError("threshold mu must lie in [0, 1)")
    tc = transition_counts(d, grid)
    cut = mu * tc.n_max
    return _map_from_edges([e for e, c in tc.n.items() if c > cut], grid, trim)


def persistent_threshold(mu, fine: Grid, coarse: Grid) -> Fraction:
    """mu / M^2, M being the most fine cells inside one coarse cell."""
    M = RefinementCellMap(fine, coarse).max_fiber
    return as_fraction(mu) / (M * M)


def morita_map(d, grid: Grid, lam, mu: int, trim: bool = True) -> GridMap:
    """Keep G -> H when t(G,H) >= lam * t(H,G) and n(G,H) >= mu."""
    lam = as_fraction(lam)
    if lam < 0 or mu < 1:
        raise DataError("need lambda >= 0 and mu >= 1")
    tc = transition_counts(d, grid)
    keep = [
        (G, H)
        for (G, H), c in tc.n.items()
        if c >= mu and tc.t(G, H) >= lam * tc.t(H, G)
    ]
    return _map_from_edges(keep, grid, trim)


@dataclass(frozen=True)
class ThresholdCheck:
    mu_fine: Fraction
    mu_coarse: Fraction
    schedule_bound: Fraction
    violations: tuple

    @property
    def holds(self) -> bool:
        return not self.violations

    @property
    def within_schedule(self) -> bool:
        return self.mu_coarse <= self.schedule_bound

    def to_dict(self) -> dict:
        return {
            "mu_fine": str(self.mu_fine),
            "mu_coarse": str(self.mu_coarse),
            "schedule_bound": str(self.schedule_bound),
            "morphism": self.holds,
            "counterexamples": [[str(a), str(b)] for a, b in self.violations],
        }


def threshold_persistence_check(d, fine: Grid, coarse: Grid, mu_fine, mu_coarse) -> ThresholdCheck:
    """Is refinement a grid map morphism between the two thresholded maps?"""
    h = RefinementCellMap(fine, coarse)
    mf = thresholded_map(d, fine, mu_fine)
    mc = thresholded_map(d, coarse, mu_coarse)
    bad = morphism_violations(h, mf, mc)
    return ThresholdCheck(
        as_fraction(mu_fine),
        as_fraction(mu_coarse),
        persistent_threshold(mu_fine, fine, coarse),
        tuple(bad),
    )


# -- CSV input ---------------------------------------------------------------


def _read_rows(path) -> list[list[Fraction]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    rows = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            cells = [c.strip() for c in row if c.strip()]
            if not cells or cells[0].startswith("#"):
                continue
            try:
                rows.append([Fraction(c) for c in cells])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise DataError(f"{path}:{lineno}: not a number in {row}") from None
    return rows


def read_observations(path, delay: int | None = None) -> ObservationSet:
    """One row per time step.  With `delay`, the first column is delay-embedded."""
    rows = _read_rows(path)
    if delay is not None:
        return delay_embed([r[0] for r in rows], delay)
    return ObservationSet((rows,))


def read_samples(path) -> SampleSet:
    """One row per pair: x coordinates then y coordinates."""
    rows = _read_rows(path)
    pairs = []
    for r in rows:
        if len(r) % 2:
            raise DataError(f"{path}: sample rows need an even number of columns")
        k = len(r) // 2
        pairs.append((r[:k], r[k:]))
    return SampleSet(tuple(pairs))
