import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coactive.feedback import (SimulatedUser, UserModelConfig, compute_slack,
                               expected_alpha_feedback, make_rng, noisy_relevance_feedback,
                               rating_increment_feedback, round_rating, strict_alpha_feedback)
from coactive.tasks import ItemContext, ItemTask, RankingContext, RankingTask
from coactive.utility import GroundTruthUtility, utility


@pytest.fixture
def five_items():
    """Items whose utilities under w = [1] are 2, 5, 6, 9, 10."""
    ctx = ItemContext([[2.0], [5.0], [6.0], [9.0], [10.0]])
    return ItemTask(ctx), ctx, GroundTruthUtility([1.0])


def random_ranking_problem(seed, n_docs=12, dim=4):
    rng = np.random.default_rng(seed)
    ctx = RankingContext(1, rng.standard_normal((n_docs, dim)))
    return RankingTask([ctx]), ctx, GroundTruthUtility(rng.standard_normal(dim)), rng


class TestStrictAlpha:
    def test_smallest_sufficient_item(self, five_items):
        task, ctx, truth = five_items
        assert strict_alpha_feedback(0.5, truth, task, ctx, 0) == 2

    def test_optimal_presentation_returned(self, five_items):
        task, ctx, truth = five_items
        assert strict_alpha_feedback(0.3, truth, task, ctx, 4) == 4

    def test_alpha_one_gives_optimum(self, five_items):
        task, ctx, truth = five_items
        for y in range(5):
            assert strict_alpha_feedback(1.0, truth, task, ctx, y) == 4

    def test_respects_availability(self, five_items):
        task, ctx, truth = five_items
        ctx.available[2] = False
        assert strict_alpha_feedback(0.5, truth, task, ctx, 0) == 3

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 0.3, 0.5, 0.9, 1.0]))
    def test_ranking_zero_slack(self, seed, alpha):
        task, ctx, truth, rng = random_ranking_problem(seed)
        y = rng.permutation(ctx.n_docs)
        y_bar = strict_alpha_feedback(alpha, truth, task, ctx, y)
        assert sorted(y_bar) == list(range(ctx.n_docs))
        u = [truth.utility(task, ctx, z) for z in (truth.best(task, ctx), y, y_bar)]
        assert compute_slack(alpha, *u) == 0.0
        # strictly alpha-informative implies beta-informative for beta <= alpha
        for beta in np.linspace(0.05, alpha, 5):
            assert compute_slack(beta, *u) == 0.0

    def test_ranking_scan_stops_early(self):
        # scores by index: doc 0 best ... doc 5 worst; presented list is nearly optimal
        docs = np.array([[6.0], [5.0], [4.0], [3.0], [2.0], [1.0]])
        ctx = RankingContext(1, docs)
        task = RankingTask([ctx])
        truth = GroundTruthUtility([1.0])
        y = np.array([1, 0, 2, 3, 4, 5])
        # re-sorting the first five already closes the whole gap
        np.testing.assert_array_equal(strict_alpha_feedback(1.0, truth, task, ctx, y),
                                      [0, 1, 2, 3, 4, 5])
        y = np.array([5, 0, 1, 2, 3, 4])
        y_bar = strict_alpha_feedback(1.0, truth, task, ctx, y)
        np.testing.assert_array_equal(y_bar, [0, 1, 2, 3, 4, 5])

    def test_ranking_optimal_returned(self):
        task, ctx, truth, _ = random_ranking_problem(3)
        y = truth.best(task, ctx)
        np.testing.assert_array_equal(strict_alpha_feedback(0.5, truth, task, ctx, y), y)


class TestNoisyRelevance:
    def test_example(self):
        rel = np.array([1, 3, 0, 2, 5, 0, 0, 4, 0, 0])
        y_bar = noisy_relevance_feedback(rel, np.arange(10))
        np.testing.assert_array_equal(y_bar[:5] + 1, [5, 8, 2, 4, 1])
        np.testing.assert_array_equal(y_bar[5:] + 1, [3, 6, 7, 9, 10])

    def test_equal_labels_keep_order(self):
        y = np.array([3, 1, 0, 2, 5, 4, 6])
        np.testing.assert_array_equal(noisy_relevance_feedback(np.ones(7, int), y), y)

    def test_short_list(self):
        y_bar = noisy_relevance_feedback(np.array([0, 1, 2]), np.array([0, 1, 2]))
        np.testing.assert_array_equal(y_bar + 1, [3, 2, 1])

    def test_only_top_ten_inspected(self):
        rel = np.zeros(12, int)
        rel[11] = 4
        y = np.arange(12)
        np.testing.assert_array_equal(noisy_relevance_feedback(rel, y), y)

    def test_can_violate_improvement(self):
        # labels disagree with the utility: feedback lowers utility, slack > 0 at every alpha
        ctx = RankingContext(1, [[3.0], [2.0], [1.0]], labels=[0, 1, 2])
        task = RankingTask([ctx])
        truth = GroundTruthUtility([1.0])
        y = truth.best(task, ctx)
        y_bar = noisy_relevance_feedback(ctx.labels, y)
        u_star, u_y, u_bar = (truth.utility(task, ctx, z) for z in (y, y, y_bar))
        assert u_bar < u_y
        for a in (0.1, 0.5, 1.0):
            assert compute_slack(a, u_star, u_y, u_bar) > 0


class TestRatingIncrement:
    def test_one_higher(self):
        ratings = np.array([3, 2, 4, 4, 5])
        assert rating_increment_feedback(ratings, 0) == 2

    def test_top_rating_returns_same(self):
        assert rating_increment_feedback(np.array([5, 1, 2]), 0) == 0

    def test_no_candidate_returns_same(self):
        assert rating_increment_feedback(np.array([2, 5, 1]), 0) == 0

    def test_unavailable_skipped(self):
        ratings = np.array([3, 4, 4])
        assert rating_increment_feedback(ratings, 0, [True, False, True]) == 2

    @pytest.mark.parametrize("score, rating", [(3.6, 4), (3.5, 4), (3.49, 3), (-2.0, 1),
                                               (9.0, 5), (1.5, 2)])
    def test_rounding(self, score, rating):
        assert round_rating(score) == rating


class TestExpectedAlpha:
    def test_p_one_is_strict(self, five_items):
        task, ctx, truth = five_items
        rng = make_rng(1)
        for _ in range(20):
            assert expected_alpha_feedback(0.5, 1.0, truth, task, ctx, 0, rng) == 2

    def test_p_zero_returns_presented(self, five_items):
        task, ctx, truth = five_items
        rng = make_rng(1)
        for _ in range(20):
            assert expected_alpha_feedback(1.0, 0.0, truth, task, ctx, 0, rng) == 0

    @pytest.mark.parametrize("p, alpha", [(0.5, 1.0), (0.3, 1.0), (0.8, 1.0)])
    def test_mean_gain(self, five_items, p, alpha):
        task, ctx, truth = five_items
        rng = make_rng(7)
        gains = np.array([utility(truth.w_star, task, ctx,
                                  expected_alpha_feedback(alpha, p, truth, task, ctx, 0, rng)) - 2.0
                          for _ in range(10_000)])
        se = gains.std(ddof=1) / np.sqrt(len(gains))
        assert abs(gains.mean() - p * alpha * 8.0) <= 3 * se


class TestSlack:
    def test_example(self):
        assert compute_slack(1.0, 10.0, 2.0, 6.0) == 4.0

    def test_strict_feedback(self):
        assert compute_slack(0.5, 10.0, 2.0, 6.0) == 0.0

    @given(st.floats(0.01, 1.0), st.floats(-50, 50), st.floats(0, 50), st.floats(0, 1))
    def test_non_negative(self, alpha, u_y, gap, frac):
        assert compute_slack(alpha, u_y + gap, u_y, u_y + frac * gap) >= 0.0


class TestUserConfig:
    @pytest.mark.parametrize("kwargs", [dict(kind="oracle"), dict(alpha=0.0), dict(alpha=1.5),
                                        dict(improve_prob=-0.1)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            UserModelConfig(**kwargs)

    def test_label_user_needs_labels(self):
        task, ctx, truth, _ = random_ranking_problem(0)
        user = SimulatedUser(UserModelConfig("noisy_relevance"), truth, task)
        with pytest.raises(TypeError):
            user.respond(ctx, np.arange(ctx.n_docs))
