from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import ks_2samp

from fairkc.fair import (
    FairConfig, OrderPolicy, draw_trial, expand_batch, expansion_from_uniform, fair_assign, fair_solve,
    sample_expansion, sample_expansions, trial_rng,
)
from fairkc.metric import build_euclidean
from fairkc.unfair import Clustering, assign_to_nearest, gonzalez, scr
from fairkc.utils.errors import FairAlgError


class TestExpansionDraws:
    """Exponential draws by inverse transform"""

    def test_unit_uniform_gives_zero(self):
        x = expansion_from_uniform(0.2, 1.0)
        assert x == 0.0
        assert not np.signbit(x)

    def test_inverse_transform(self):
        assert expansion_from_uniform(2.0, np.exp(-1.0)) == pytest.approx(0.5)

    def test_infinite_rate(self):
        assert np.all(expansion_from_uniform(np.inf, np.array([0.3, 1.0])) == 0.0)

    def test_rate_must_be_positive(self):
        with pytest.raises(FairAlgError):
            expansion_from_uniform(0.0, 0.5)

    def test_single_draw_non_negative(self):
        rng = np.random.default_rng(0)
        assert all(sample_expansion(1.0, rng) >= 0 for _ in range(1000))

    def test_mean(self):
        draws = sample_expansions(0.5, 200000, np.random.default_rng(4))
        assert draws.mean() == pytest.approx(2.0, abs=0.03)

    def test_memoryless(self):
        draws = sample_expansions(1.0, 200000, np.random.default_rng(11))
        excess = draws[draws > 1.0] - 1.0
        fresh = sample_expansions(1.0, 50000, np.random.default_rng(12))
        assert ks_2samp(excess, fresh).pvalue > 0.001


class TestFairConfig:
    """Parameter validation"""

    def test_defaults(self):
        config = FairConfig()
        assert config.psi == 1.0
        assert config.order_policy is OrderPolicy.UNIFORM_RANDOM

    def test_rate(self):
        config = FairConfig(psi=2.0)
        assert config.delta(5.0) == 10.0
        assert config.rate(5.0) == pytest.approx(0.1)
        assert config.rate(0.0) == np.inf

    def test_from_lambda_scale(self):
        config = FairConfig.from_lambda_scale(4.0, rng_seed=3)
        assert config.psi == 0.25
        assert config.rate(8.0) == pytest.approx(0.5)

    def test_order_from_string(self):
        assert FairConfig(order_policy="given").order_policy is OrderPolicy.GIVEN

    @pytest.mark.parametrize("psi", [0.0, -1.0, float("inf"), float("nan")])
    def test_bad_psi(self, psi):
        with pytest.raises(FairAlgError):
            FairConfig(psi=psi)

    def test_bad_order(self):
        with pytest.raises(FairAlgError):
            FairConfig(order_policy="sorted")

    def test_bad_scale(self):
        with pytest.raises(FairAlgError):
            FairConfig.from_lambda_scale(0.0)


class TestDrawTrial:
    """Per-trial order and draws"""

    def test_given_order(self, line_base):
        order, draws = draw_trial(line_base, FairConfig(order_policy="given"), trial_rng(0, 0))
        assert order.tolist() == [0, 1]
        assert draws.shape == (2,)

    def test_random_order_is_permutation(self, small_space):
        base = scr(small_space, 6)
        order, _ = draw_trial(base, FairConfig(), trial_rng(1, 5))
        assert sorted(order.tolist()) == list(range(6))

    def test_streams_are_reproducible(self, line_base):
        a = draw_trial(line_base, FairConfig(), trial_rng(8, 3))
        b = draw_trial(line_base, FairConfig(), trial_rng(8, 3))
        c = draw_trial(line_base, FairConfig(), trial_rng(8, 4))
        assert np.array_equal(a[1], b[1])
        assert not np.array_equal(a[1], c[1])

    def test_zero_radius_base(self):
        space = build_euclidean([[1.0, 1.0]] * 3)
        base = gonzalez(space, 1)
        _, draws = draw_trial(base, FairConfig(), trial_rng(0, 0))
        assert draws.tolist() == [0.0]


class TestExpandBatch:
    """Cluster growth, re-centering and empty clusters"""

    def test_recenters_when_center_taken(self):
        space = build_euclidean([[0.0], [2.0], [10.0], [12.0], [13.0]])
        base = assign_to_nearest(space, [0, 2])
        realisation = expand_batch(space, base, np.array([[0, 1]]), np.array([[8.5, 0.0]])).realisation(0)
        assert realisation.labels.tolist() == [0, 0, 0, 1, 1]
        assert realisation.final_centers.tolist() == [0, 3]
        assert realisation.final_radii.tolist() == [10.0, 1.0]
        assert realisation.max_radius == 10.0
        realisation.validate(space, base)

    def test_empty_cluster(self, line_space, line_base):
        realisation = expand_batch(line_space, line_base, np.array([[0, 1]]),
                                   np.array([[100.0, 0.0]])).realisation(0)
        assert realisation.labels.tolist() == [0, 0, 0, 0]
        assert realisation.final_centers.tolist() == [0, -1]
        assert realisation.non_empty.tolist() == [0]
        assert realisation.final_radii.tolist() == [11.0, 0.0]
        realisation.validate(line_space, line_base)

    def test_zero_draws_reproduce_base(self, small_space):
        base = scr(small_space, 5)
        batch = expand_batch(small_space, base, np.arange(5)[None, :], np.zeros((1, 5)))
        realisation = batch.realisation(0)
        realisation.validate(small_space, base)
        # every point is captured by the first cluster in order that covers it
        assert realisation.max_radius <= 2 * base.max_radius

    def test_batch_matches_single_trials(self, small_space):
        base = scr(small_space, 4)
        config = FairConfig(psi=0.5)
        drawn = [draw_trial(base, config, trial_rng(9, t)) for t in range(20)]
        batch = expand_batch(small_space, base, np.stack([o for o, _ in drawn]), np.stack([x for _, x in drawn]))
        for t in range(20):
            single = fair_assign(small_space, base, config, trial_rng(9, t))
            assert np.array_equal(batch.labels[t], single.labels)
            assert np.array_equal(batch.final_centers[t], single.final_centers)
        assert batch.cluster_counts.tolist() == [int((c >= 0).sum()) for c in batch.final_centers]

    def test_validate_every_trial(self, small_space):
        base = scr(small_space, 4)
        drawn = [draw_trial(base, FairConfig(), trial_rng(2, t)) for t in range(50)]
        batch = expand_batch(small_space, base, np.stack([o for o, _ in drawn]), np.stack([x for _, x in drawn]))
        batch.validate(small_space, base)

        radii = batch.final_radii.copy()
        radii[3] = 2 * (base.per_cluster_radius + batch.draws[3]) + 1.0
        broken = replace(batch, final_radii=radii)
        with pytest.raises(FairAlgError, match="Trial 3"):
            broken.validate(small_space, base)


class TestFairAssign:
    """Single realisations"""

    def test_invariants_hold_in_every_trial(self, small_space):
        for k in (3, 6):
            base = scr(small_space, k)
            for psi in (0.25, 1.0, 4.0):
                config = FairConfig(psi=psi)
                for t in range(100):
                    realisation = fair_assign(small_space, base, config, trial_rng(3, t))
                    realisation.validate(small_space, base)

    def test_default_stream(self, line_space, line_base):
        config = FairConfig(rng_seed=21)
        a = fair_assign(line_space, line_base, config)
        b = fair_assign(line_space, line_base, config, trial_rng(21, 0))
        assert np.array_equal(a.labels, b.labels)
        assert np.array_equal(a.draws, b.draws)

    def test_zero_radius(self):
        space = build_euclidean([[1.0, 1.0]] * 3)
        realisation = fair_assign(space, gonzalez(space, 1), FairConfig())
        assert realisation.labels.tolist() == [0, 0, 0]
        assert realisation.max_radius == 0.0

    def test_inconsistent_base(self, line_space, line_base):
        bad = Clustering(centers=line_base.centers, assignment=line_base.assignment,
                         per_cluster_radius=np.array([1.0, 1.0]), max_radius=1.0)
        with pytest.raises(FairAlgError):
            fair_assign(line_space, bad, FairConfig())

    def test_fair_solve(self, small_space):
        realisation = fair_solve(small_space, 4, "gonz1", FairConfig(rng_seed=2))
        assert realisation.labels.shape == (small_space.n,)
        assert realisation.k == 4
        assert 1 <= realisation.non_empty.size <= 4
        assert len(realisation.clusters) == 4
