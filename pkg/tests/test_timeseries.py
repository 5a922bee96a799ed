from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from morse_persist.grid import Box, Cell, Grid, refinement_map
from morse_persist.gridmap import is_morphism, minimal_map
from morse_persist.interval import MapSpec
from morse_persist.timeseries import (
    DataError,
    ObservationSet,
    SampleSet,
    delay_embed,
    morita_map,
    observation_map,
    persistent_threshold,
    read_observations,
    read_samples,
    sampled_map,
    threshold_persistence_check,
    thresholded_map,
    transition_counts,
)
from oracles import bin_index

UNIT = Box((0,), (1,))
F = Fraction


def c1(i, depth=1):
    return Cell(depth, (i,))


unit_pts = st.fractions(min_value=0, max_value=1, max_denominator=64)
samples = st.lists(st.tuples(unit_pts, unit_pts), max_size=40).map(lambda ps: SampleSet(tuple(ps)))
series = st.lists(st.lists(unit_pts, min_size=1, max_size=20), min_size=1, max_size=3)


def test_delay_embed():
    o = delay_embed([F(1), F(2), F(3), F(4)], 2)
    assert o.series == (((1, 2), (2, 3), (3, 4)),)
    assert delay_embed([F(1), F(2)], 1).series == (((1,), (2,)),)
    with pytest.raises(DataError):
        delay_embed([F(1)], 2)


def test_observation_two_cycle():
    o = ObservationSet(([F("0.1"), F("0.6"), F("0.2")],))
    m = observation_map(o, Grid(UNIT, 1))
    assert m.edges == {(c1(0), c1(1)), (c1(1), c1(0))}


def test_observation_trivial_cases():
    g = Grid(UNIT, 2)
    assert not observation_map(ObservationSet(([F("0.3")],)), g).vertices
    const = observation_map(ObservationSet(([F("0.3")] * 4,)), g)
    assert const.edges == {(c1(1, 2), c1(1, 2))}


def test_point_outside_box_is_named():
    with pytest.raises(DataError, match="3/2"):
        observation_map(ObservationSet(([F(0), F(3, 2)],)), Grid(UNIT, 1))


def test_sampled_two_cycle():
    d = SampleSet(((F("0.1"), F("0.8")), (F("0.8"), F("0.1"))))
    assert sampled_map(d, Grid(UNIT, 1)).edges == {(c1(0), c1(1)), (c1(1), c1(0))}
    assert not sampled_map(SampleSet(()), Grid(UNIT, 1)).vertices


@given(st.lists(unit_pts, max_size=30), st.integers(0, 6))
def test_exact_samples_inside_minimal_map(xs, depth):
    g = Grid(UNIT, depth)
    d = SampleSet(tuple((x, x * x) for x in xs))
    assert sampled_map(d, g, trim=False).edges <= minimal_map(MapSpec.parse("x^2"), g).edges


@given(series, st.integers(0, 5))
def test_observation_edges_match_binning_oracle(ss, depth):
    o = ObservationSet(tuple(ss))
    m = observation_map(o, Grid(UNIT, depth), trim=False)
    expect = {
        (bin_index(s[j], 0, 1, depth), bin_index(s[j + 1], 0, 1, depth)) for s in ss for j in range(len(s) - 1)
    }
    assert {(a.index[0], b.index[0]) for a, b in m.edges} == expect


@given(series, st.integers(0, 5), st.integers(0, 5))
def test_observation_refinement_is_morphism(ss, a, b):
    o = ObservationSet(tuple(ss))
    fine, coarse = Grid(UNIT, max(a, b)), Grid(UNIT, min(a, b))
    assert is_morphism(refinement_map(fine, coarse), observation_map(o, fine), observation_map(o, coarse))


@given(samples, st.integers(0, 5), st.integers(0, 5))
def test_sampled_refinement_is_morphism(d, a, b):
    fine, coarse = Grid(UNIT, max(a, b)), Grid(UNIT, min(a, b))
    assert is_morphism(refinement_map(fine, coarse), sampled_map(d, fine), sampled_map(d, coarse))


@given(samples, st.integers(0, 5), st.integers(0, 5))
def test_count_consistency(d, a, b):
    fine, coarse = Grid(UNIT, max(a, b)), Grid(UNIT, min(a, b))
    h = refinement_map(fine, coarse)
    tf, tc = transition_counts(d, fine), transition_counts(d, coarse)
    assert sum(tf.n.values()) == len(d.pairs)
    for (G, H), c in tf.n.items():
        assert tc.n[h(G), h(H)] >= c
    # binning commutes with coarsening, so the coarsened counts are the coarse counts
    assert tf.coarsen(h) == tc


def test_observation_v_counts_terminal_points():
    o = ObservationSet(([F("0.1"), F("0.2"), F("0.9")],))
    tc = transition_counts(o, Grid(UNIT, 1))
    assert tc.v == {c1(0): 2, c1(1): 1}
    assert tc.t(c1(1), c1(0)) == 0


@given(samples, st.integers(0, 4))
def test_morita_trivial_thresholds_equal_sampled(d, depth):
    g = Grid(UNIT, depth)
    assert morita_map(d, g, 0, 1) == sampled_map(d, g)


def _pairs(counts: dict) -> SampleSet:
    pts = {"a": F("0.25"), "b": F("0.75")}
    return SampleSet(tuple((pts[x], pts[y]) for (x, y), c in counts.items() for _ in range(c)))


def test_thresholded_examples():
    g = Grid(UNIT, 1)
    d = _pairs({("a", "b"): 3, ("b", "a"): 1})
    assert thresholded_map(d, g, F(1, 2), trim=False).edges == {(c1(0), c1(1))}
    assert thresholded_map(d, g, 0) == sampled_map(d, g)
    assert thresholded_map(d, g, F(99, 100), trim=False).edges == {(c1(0), c1(1))}
    with pytest.raises(DataError):
        thresholded_map(d, g, 1)


def test_morita_examples():
    g = Grid(UNIT, 1)
    d = _pairs({("a", "b"): 2, ("b", "a"): 1})
    tc = transition_counts(d, g)
    assert (tc.v[c1(0)], tc.v[c1(1)]) == (2, 1)
    assert morita_map(d, g, 1, 1).edges == {(c1(0), c1(1)), (c1(1), c1(0))}
    assert (c1(0), c1(1)) not in morita_map(d, g, 2, 1, trim=False).edges
    with pytest.raises(DataError):
        morita_map(d, g, -1, 1)


def test_morita_reverse_cell_without_points():
    # b is only ever a target, so t(b, a) = 0 and a -> b passes any lambda
    g = Grid(UNIT, 1)
    d = SampleSet(((F("0.25"), F("0.75")),))
    assert morita_map(d, g, 100, 1, trim=False).edges == {(c1(0), c1(1))}


def test_persistent_threshold_examples():
    assert persistent_threshold(F(2, 5), Grid(UNIT, 2), Grid(UNIT, 1)) == F(1, 10)
    assert persistent_threshold(F(2, 5), Grid(UNIT, 2), Grid(UNIT, 2)) == F(2, 5)
    sq = Box((0, 0), (1, 1))
    assert persistent_threshold(1, Grid(sq, 3), Grid(sq, 2)) == F(1, 16)


@given(samples, st.fractions(min_value=0, max_value=F(99, 100), max_denominator=100), st.integers(0, 4), st.integers(0, 4))
def test_schedule_always_persists(d, mu, a, b):
    fine, coarse = Grid(UNIT, max(a, b)), Grid(UNIT, min(a, b))
    check = threshold_persistence_check(d, fine, coarse, mu, persistent_threshold(mu, fine, coarse))
    assert check.within_schedule and check.holds


def crafted() -> SampleSet:
    """Dense block in the left coarse cell inflates the coarse n_max."""
    left = [F("0.1"), F("0.4")]
    pairs = [(x, y) for x in left for y in left]
    pairs += [(F("0.6"), F("0.9")), (F("0.9"), F("0.6"))]
    return SampleSet(tuple(pairs))


def test_fixed_mu_counterexample():
    check = threshold_persistence_check(crafted(), Grid(UNIT, 2), Grid(UNIT, 1), F(1, 2), F(1, 2))
    assert not check.holds and not check.within_schedule
    assert (c1(2, 2), c1(3, 2)) in check.violations
    assert check.to_dict()["morphism"] is False
    fixed = threshold_persistence_check(crafted(), Grid(UNIT, 2), Grid(UNIT, 1), F(1, 2), F(1, 8))
    assert fixed.holds


def test_csv_readers(tmp_path):
    p = tmp_path / "obs.csv"
    p.write_text("x\n0.1\n0.6\n0.2\n")
    assert read_observations(p).series == (((F("0.1"),), (F("0.6"),), (F("0.2"),)),)
    assert len(read_observations(p, delay=2).series[0]) == 2
    s = tmp_path / "pairs.csv"
    s.write_text("0.1,0.8\n0.8,0.1\n")
    assert read_samples(s).pairs == (((F("0.1"),), (F("0.8"),)), ((F("0.8"),), (F("0.1"),)))
    bad = tmp_path / "bad.csv"
    bad.write_text("0.1,0.2,0.3\n")
    with pytest.raises(DataError):
        read_samples(bad)
    with pytest.raises(DataError, match="nope.csv"):
        read_samples(tmp_path / "nope.csv")
    junk = tmp_path / "junk.csv"
    junk.write_text("0.1\nabc\n")
    with pytest.raises(DataError, match=":2"):
        read_observations(junk)
