"""Morse decompositions of multivalued grid maps and their persistence under refinement."""
from .grid import Box, Cell, Grid, GridError, RefinementCellMap, build_grid, diameter, realization, refinement_map
from .gridmap import GridMap, MapError, induce_coarse, is_morphism, minimal_map, trim_stranded
from .interval import Interval, MapSpec
from .morse import (
    AugmentedMorseDecomposition,
    MorseDecomposition,
    MorseMorphism,
    augmented,
    finest_decomposition,
    morse_morphism,
    strongly_connected_components,
)
from .persistence import (
    AddEdge,
    AddVertex,
    Barcode,
    MergeTree,
    MergeVertices,
    MorseGraph,
    apply_op,
    barcode,
    check_op,
    elementary_decomposition,
    graph_morphism,
    homology,
    homology_delta,
    induced_homology,
    merge_tree,
    morse_graph,
)
from .recurrence import edge_creates_mixing, is_mixing, merge_creates_mixing, period, period_divides
from .timeseries import (
    ObservationSet,
    SampleSet,
    delay_embed,
    morita_map,
    observation_map,
    sampled_map,
    threshold_persistence_check,
    thresholded_map,
)
from .dot import emit_dot

__version__ = "0.1.0"
