import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from conftest import brute_force_wd, random_diagram_points
from crashtopo.errors import ValidationError
from crashtopo.persistence import PersistenceDiagram, cloud_diagram
from crashtopo.wasserstein import (
    augmented_cost,
    hungarian,
    optimal_matching,
    wd_between,
    wd_distance_matrix,
    wd_to_diagonal,
)

seeds = st.integers(0, 2**32 - 1)


def diagram(rng, max_points=6, h0=False):
    return PersistenceDiagram.from_pairs(random_diagram_points(rng, max_points, h0))


class TestGolden:
    def test_wd2_to_diagonal(self, four_points):
        pd = cloud_diagram(four_points)
        # ((0.25^2 + 1^2 + 7.25/4) ** 0.5) = sqrt(2.875)
        assert wd_to_diagonal(pd, 2) == pytest.approx(math.sqrt(2.875), abs=1e-12)
        assert wd_to_diagonal(pd, 2) == pytest.approx(1.69565, abs=1e-3)

    def test_wd1_to_diagonal(self, four_points):
        pd = cloud_diagram(four_points)
        assert wd_to_diagonal(pd, 1) == pytest.approx((0.5 + 2.0 + math.sqrt(7.25)) / 2, abs=1e-12)

    @pytest.mark.parametrize("p", [1, 2])
    def test_single_points(self, p):
        a = PersistenceDiagram.from_pairs([(0, 2)])
        b = PersistenceDiagram.from_pairs([(0, 1)])
        assert wd_between(a, b, p) == pytest.approx(1.0, abs=1e-12)

    def test_diagonal_cheaper_than_pairing(self):
        a = PersistenceDiagram.from_pairs([(0, 0.2)])
        b = PersistenceDiagram.from_pairs([(5, 5.2)])
        assert wd_between(a, b, 1) == pytest.approx(0.2, abs=1e-12)

    def test_both_empty(self):
        assert wd_between(PersistenceDiagram(), PersistenceDiagram()) == 0.0


class TestHungarian:
    @settings(max_examples=100, deadline=None)
    @given(seeds, st.integers(1, 15))
    def test_matches_scipy(self, seed, n):
        c = np.random.default_rng(seed).uniform(0, 10, (n, n))
        col = hungarian(c)
        assert sorted(col) == list(range(n))
        r, s = linear_sum_assignment(c)
        assert c[np.arange(n), col].sum() == pytest.approx(c[r, s].sum(), abs=1e-9)

    def test_ties(self):
        c = np.ones((4, 4))
        assert sorted(hungarian(c)) == [0, 1, 2, 3]

    def test_rejects_non_square(self):
        with pytest.raises(ValidationError):
            hungarian(np.zeros((2, 3)))


class TestOracle:
    @settings(max_examples=120, deadline=None)
    @given(seeds, st.sampled_from([1, 2]))
    def test_brute_force(self, seed, p):
        rng = np.random.default_rng(seed)
        a, b = diagram(rng), diagram(rng)
        assert wd_between(a, b, p) == pytest.approx(brute_force_wd(a.expanded(), b.expanded(), p), abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(seeds, st.sampled_from([1, 2, 3.5]))
    def test_empty_agrees_with_closed_form(self, seed, p):
        a = diagram(np.random.default_rng(seed), 10)
        assert wd_between(a, PersistenceDiagram(), p) == pytest.approx(wd_to_diagonal(a, p), abs=1e-12)

    def test_augmented_cost_shape(self):
        x = np.array([[0.0, 1.0]])
        y = np.array([[0.0, 2.0], [1.0, 1.5]])
        c = augmented_cost(x, y, 1)
        assert c.shape == (3, 3)
        np.testing.assert_allclose(c[0], [1.0, 1.0, 0.5])
        np.testing.assert_allclose(c[1:, :2], [[1.0, 0.25], [1.0, 0.25]])
        assert not c[1:, 2:].any()


class TestMetricProperties:
    @settings(max_examples=80, deadline=None)
    @given(seeds, st.sampled_from([1, 2]))
    def test_symmetric_bitwise(self, seed, p):
        rng = np.random.default_rng(seed)
        a, b = diagram(rng, 8), diagram(rng, 8)
        assert wd_between(a, b, p) == wd_between(b, a, p)

    @settings(max_examples=80, deadline=None)
    @given(seeds, st.sampled_from([1, 2]))
    def test_identity(self, seed, p):
        a = diagram(np.random.default_rng(seed), 8)
        assert wd_between(a, a, p) == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=80, deadline=None)
    @given(seeds, st.sampled_from([1, 2]))
    def test_triangle(self, seed, p):
        rng = np.random.default_rng(seed)
        a, b, c = diagram(rng, 8), diagram(rng, 8), diagram(rng, 8)
        assert wd_between(a, c, p) <= wd_between(a, b, p) + wd_between(b, c, p) + 1e-9

    @settings(max_examples=60, deadline=None)
    @given(seeds, st.floats(0.01, 50), st.sampled_from([1, 2]))
    def test_homogeneous(self, seed, c, p):
        rng = np.random.default_rng(seed)
        a, b = diagram(rng, 8), diagram(rng, 8)
        assert wd_between(a.scaled(c), b.scaled(c), p) == pytest.approx(c * wd_between(a, b, p), rel=1e-9, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_p_monotone_on_diagonal(self, seed):
        # ||.||_2 <= ||.||_1 for the vector of diagonal distances
        a = diagram(np.random.default_rng(seed), 8)
        assert wd_to_diagonal(a, 2) <= wd_to_diagonal(a, 1) + 1e-12

    def test_distance_matrix(self):
        rng = np.random.default_rng(4)
        ds = [diagram(rng, 5) for _ in range(5)]
        m = wd_distance_matrix(ds, 2)
        assert np.array_equal(m, m.T)
        assert not np.diag(m).any()
        assert m[1, 3] == wd_between(ds[1], ds[3], 2)


class TestMatching:
    def test_covers_every_point_once(self):
        rng = np.random.default_rng(9)
        a, b = diagram(rng, 6), diagram(rng, 6)
        m = optimal_matching(a, b, 2)
        src = [i for i, _ in m.pairs if i is not None]
        tgt = [j for _, j in m.pairs if j is not None]
        assert sorted(src) == list(range(len(a)))
        assert sorted(tgt) == list(range(len(b)))

    def test_json(self):
        a = PersistenceDiagram.from_pairs([(0, 2), (0, 0.1)])
        b = PersistenceDiagram.from_pairs([(0, 1)])
        data = json.loads(optimal_matching(a, b, 2).to_json())
        assert data["p"] == 2
        assert len(data["pairs"]) == 2
        diag = [pr for pr in data["pairs"] if pr["target"]["diagonal"]]
        assert len(diag) == 1 and diag[0]["target"]["birth"] == pytest.approx(0.05)

    @pytest.mark.parametrize("p", [0, 0.5, float("inf"), float("nan")])
    def test_bad_degree(self, p):
        with pytest.raises(ValidationError):
            wd_to_diagonal(PersistenceDiagram(), p)
