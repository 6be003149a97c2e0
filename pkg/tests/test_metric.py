import numpy as np
import pytest

from fairkc.metric import (
    MetricSpace, ball, build_euclidean, build_from_graph, diameter, make_community, random_euclidean,
)
from fairkc.utils.errors import MetricError


class TestBuildEuclidean:
    """Euclidean metric construction"""

    def test_distances(self):
        space = build_euclidean([[0, 0], [3, 4], [0, 4]])
        assert space.n == 3
        assert space.d(0, 1) == 5.0
        assert space.d(1, 2) == 3.0
        assert np.array_equal(space.distances, space.distances.T)
        assert np.all(np.diag(space.distances) == 0)

    def test_read_only(self):
        space = build_euclidean([[0.0], [1.0]])
        with pytest.raises(ValueError):
            space.distances[0, 1] = 7.0

    def test_empty_input(self):
        with pytest.raises(MetricError):
            build_euclidean([])

    def test_mixed_dimensions(self):
        with pytest.raises(MetricError):
            build_euclidean([[0.0, 1.0], [2.0]])

    def test_colocated_points(self):
        space = build_euclidean([[1.0, 1.0], [1.0, 1.0]])
        assert space.d(0, 1) == 0.0

    def test_random_is_seeded(self):
        a = random_euclidean(20, dim=3, seed=5)
        b = random_euclidean(20, dim=3, seed=5)
        assert np.array_equal(a.distances, b.distances)
        assert a.coordinates.shape == (20, 3)


class TestBuildFromGraph:
    """Shortest-path metrics"""

    def test_path_graph(self):
        space = build_from_graph(4, [(1, 2, 5), (2, 3, 5), (3, 4, 5)])
        assert space.d(0, 3) == 15.0
        assert space.d(1, 3) == 10.0

    def test_shortcut(self):
        space = build_from_graph(3, [(1, 2, 10), (2, 3, 1), (1, 3, 2)])
        assert space.d(0, 1) == 3.0

    def test_duplicate_edge_keeps_cheapest(self):
        space = build_from_graph(2, [(1, 2, 5), (2, 1, 2)])
        assert space.d(0, 1) == 2.0

    def test_disconnected(self):
        with pytest.raises(MetricError):
            build_from_graph(4, [(1, 2, 1), (3, 4, 1)])

    def test_endpoint_out_of_range(self):
        with pytest.raises(MetricError):
            build_from_graph(3, [(1, 4, 1)])

    def test_self_loop(self):
        with pytest.raises(MetricError):
            build_from_graph(2, [(1, 1, 1), (1, 2, 1)])

    def test_non_positive_cost(self):
        with pytest.raises(MetricError):
            build_from_graph(2, [(1, 2, 0)])


class TestInvariants:
    """Metric axioms"""

    def test_random_space_is_metric(self):
        random_euclidean(50, seed=1).check_invariants()

    def test_graph_space_is_metric(self):
        build_from_graph(5, [(1, 2, 3), (2, 3, 4), (3, 4, 1), (4, 5, 9), (1, 5, 2)]).check_invariants()

    def test_triangle_violation(self):
        bad = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        with pytest.raises(MetricError):
            MetricSpace(distances=bad).check_invariants()

    def test_asymmetry(self):
        bad = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(MetricError):
            MetricSpace(distances=bad).check_invariants()

    def test_sampled_check_on_large_space(self):
        random_euclidean(250, seed=2).check_invariants(samples=2000)


class TestSubsets:
    """Diameters, communities and balls"""

    def test_diameter(self, line_space):
        assert diameter(line_space, {1, 2}) == 1.0
        assert diameter(line_space, {0, 1, 2, 3}) == 11.0
        assert diameter(line_space, {2}) == 0.0

    def test_diameter_empty(self, line_space):
        with pytest.raises(MetricError):
            diameter(line_space, set())

    def test_diameter_bad_index(self, line_space):
        with pytest.raises(MetricError):
            diameter(line_space, {0, 9})

    def test_make_community(self, line_space):
        community = make_community(line_space, [2, 1, 2])
        assert community.members == (1, 2)
        assert community.diameter == 1.0
        assert len(community) == 2

    def test_ball(self, line_space):
        assert ball(line_space, 1, 1.0) == [1, 2]
        assert ball(line_space, 0, 5.0) == [0, 1]
