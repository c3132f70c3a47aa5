# tests/test_graph_cut.py
"""Cut construction, the search-tree max-flow kernel and exact segmentation"""
import io
import itertools

import numpy as np
import pytest

from oracles import brute_force_min, reference_max_flow
from src.operators.energy import TvVariant, shape_energy
from src.solvers.graph_cut import (CutProblem, build_cut_problem, cut_segment, dump_problem, load_problem,
                                   max_flow, neighbor_weights)
from src.utils.errors import FieldFormatError, InvalidParameterError


def _random_problem(rng, nodes, density=0.15):
    pairs = [(u, v) for u in range(nodes) for v in range(nodes) if u < v and rng.uniform() < density]
    arc_from = np.array([p[0] for p in pairs], dtype=np.int64)
    arc_to = np.array([p[1] for p in pairs], dtype=np.int64)
    return CutProblem(nodes,
                      rng.uniform(0, 3, nodes) * (rng.uniform(size=nodes) < 0.5),
                      rng.uniform(0, 3, nodes) * (rng.uniform(size=nodes) < 0.5),
                      arc_from, arc_to,
                      rng.uniform(0, 2, len(pairs)), rng.uniform(0, 2, len(pairs)))


def test_neighbor_weights():
    g = np.full((2, 2), 2.0)
    axis = neighbor_weights(g, TvVariant.AXIS)
    assert len(axis.offsets) == 2 and axis.scale == 1.0
    diagonal = neighbor_weights(g)
    assert len(diagonal.offsets) == 4 and diagonal.scale == 0.5
    assert np.allclose(diagonal.weights[2], np.sqrt(2.0))


def test_cut_problem_validation():
    with pytest.raises(InvalidParameterError):
        CutProblem(1, [-1.0], [0.0], [], [], [], [])
    with pytest.raises(InvalidParameterError):
        CutProblem(2, [0.0, 0.0], [0.0, 0.0], [0], [0], [1.0], [1.0])
    with pytest.raises(InvalidParameterError):
        CutProblem(2, [0.0, 0.0], [0.0, 0.0], [0], [2], [1.0], [1.0])


def test_cut_capacity_plus_constant_is_the_energy(rng):
    f = rng.uniform(0, 1, (2, 3))
    g = rng.uniform(0.1, 2.0, (2, 3))
    problem = build_cut_problem(f, g, 0.4)
    for bits in itertools.product([False, True], repeat=6):
        mask = np.array(bits).reshape(2, 3)
        assert problem.cut_capacity(mask) + problem.constant == pytest.approx(shape_energy(mask, f, g, 0.4), abs=1e-12)


def test_balanced_data_term_gives_empty_mask():
    f = np.full((3, 3), 0.5)
    mask, energy = cut_segment(f, 1.0, 0.5)
    assert not np.any(mask) and energy == 0.0


def test_ties_resolve_to_the_smallest_minimizer(rng):
    # quarter steps keep every axis-variant energy exact, so ties are real ties
    for _ in range(5):
        f = rng.choice([0.25, 0.5, 0.75], size=(3, 3))
        mask, energy = cut_segment(f, 0.25, 0.5, TvVariant.AXIS)
        minimizers = [np.array(bits).reshape(3, 3) for bits in itertools.product([False, True], repeat=9)
                      if shape_energy(np.array(bits).reshape(3, 3), f, 0.25, 0.5, TvVariant.AXIS) == energy]
        assert minimizers
        for candidate in minimizers:
            assert not np.any(mask & ~candidate)


def test_two_pixel_instance_by_enumeration():
    alpha = 0.3
    f = np.full((1, 2), alpha + 1)
    g = np.full((1, 2), 0.1)
    mask, energy = cut_segment(f, g, alpha)
    assert np.all(mask)
    energies = {bits: shape_energy(np.array([bits]), f, g, alpha) for bits in itertools.product([0, 1], repeat=2)}
    assert min(energies, key=energies.get) == (1, 1)
    assert energy == pytest.approx(-2.0)


def test_single_node_flow():
    flow, sink_side = max_flow(CutProblem(1, [2.0], [3.0], [], [], [], []))
    assert flow == 2.0
    assert sink_side.tolist() == [True]


def test_series_path_flow_is_the_bottleneck():
    problem = CutProblem(3, [5.0, 0.0, 0.0], [0.0, 0.0, 4.0], [0, 1], [1, 2], [1.5, 3.0], [0.0, 0.0])
    flow, _ = max_flow(problem)
    assert flow == 1.5
    assert reference_max_flow(problem) == 1.5


@pytest.mark.parametrize('nodes', [2, 5, 12, 30, 50])
def test_flow_matches_the_reference(rng, nodes):
    for _ in range(5):
        problem = _random_problem(rng, nodes)
        flow, sink_side = max_flow(problem)
        assert flow == pytest.approx(reference_max_flow(problem), abs=1e-9)
        assert problem.cut_capacity(sink_side) == pytest.approx(flow, abs=1e-9)


@pytest.mark.parametrize('variant', list(TvVariant))
@pytest.mark.parametrize('shape', [(1, 1), (1, 4), (2, 2), (3, 3), (4, 4)])
def test_cut_segment_matches_brute_force(rng, shape, variant):
    f = rng.uniform(0, 1, shape)
    g = rng.uniform(0.1, 2.0, shape)
    alpha = rng.uniform(0.2, 0.8)
    mask, energy = cut_segment(f, g, alpha, variant)
    _, best = brute_force_min(f, g, alpha, variant)
    assert energy == pytest.approx(best, abs=1e-9)
    assert energy == shape_energy(mask, f, g, alpha, variant)


def test_integer_capacities_find_the_same_minimum(rng):
    f = rng.uniform(0, 1, (4, 4))
    g = rng.uniform(0.1, 2.0, (4, 4))
    _, best = brute_force_min(f, g, 0.5)
    _, energy = cut_segment(f, g, 0.5, integer_capacities=True)
    assert energy == pytest.approx(best, abs=1e-5)


def test_extreme_alphas():
    f = np.linspace(0, 1, 12).reshape(3, 4)
    mask, _ = cut_segment(f, 1.0, 1.5)
    assert not np.any(mask)
    mask, _ = cut_segment(np.full((3, 4), 0.7), 1.0, 0.2)
    assert np.all(mask)


def test_scaled_problem_has_integer_capacities(rng):
    problem = build_cut_problem(rng.uniform(0, 1, (3, 3)), rng.uniform(0.1, 2.0, (3, 3)), 0.5).scaled(2 ** 20)
    for caps in (problem.source_caps, problem.sink_caps, problem.arc_caps):
        assert np.all(caps == np.rint(caps))


def test_dump_and_load_preserve_the_flow(rng):
    problem = build_cut_problem(rng.uniform(0, 1, (3, 4)), rng.uniform(0.1, 2.0, (3, 4)), 0.5)
    stream = io.StringIO()
    dump_problem(problem, stream)
    header = stream.getvalue().splitlines()[0]
    assert header == f"{problem.node_count} {problem.arc_count}"
    stream.seek(0)
    loaded = load_problem(stream)
    assert max_flow(loaded)[0] == pytest.approx(max_flow(problem)[0], abs=1e-12)


def test_load_problem_rejects_truncated_input():
    with pytest.raises(FieldFormatError):
        load_problem(io.StringIO("2 1\n0.0 1.0\n"))
