"""Simulated users that answer a presented object with an improved one."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tasks import (INSPECT_DEPTH, UTILITY_POSITIONS, ItemContext, RankingContext, RankingTask,
                    top_features)
from .utility import GroundTruthUtility, dot, utility

USER_KINDS = ("strict_alpha", "noisy_relevance", "rating_increment", "expected_alpha")
MAX_RATING = 5
MIN_RATING = 1


def make_rng(seed: int) -> np.random.Generator:
    """The one generator used for every stochastic choice (numpy PCG64)."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class UserModelConfig:
    kind: str = "strict_alpha"
    alpha: float = 1.0
    improve_prob: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in USER_KINDS:
            raise ValueError(f"unknown user model {self.kind!r}; choose from {USER_KINDS}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 <= self.improve_prob <= 1.0:
            raise ValueError(f"improve_prob must lie in [0, 1], got {self.improve_prob}")


@dataclass
class FeedbackEvent:
    t: int
    context_id: object
    y: object
    y_bar: object
    u_y: float
    u_y_bar: float
    u_star: float
    slack: float

    @property
    def regret(self) -> float:
        return self.u_star - self.u_y


def compute_slack(alpha: float, u_star: float, u_y: float, u_y_bar: float) -> float:
    """Smallest xi >= 0 making the feedback alpha-informative."""
    return max(0.0, alpha * (u_star - u_y) - (u_y_bar - u_y))


def round_rating(score) -> np.ndarray:
    """Nearest allowed rating, halves rounded away from zero."""
    score = np.asarray(score, dtype=np.float64)
    rounded = np.sign(score) * np.floor(np.abs(score) + 0.5)
    return np.clip(rounded, MIN_RATING, MAX_RATING).astype(np.int64)


# --------------------------------------------------------------------------
# strict alpha-informative users
# --------------------------------------------------------------------------


def _strict_alpha_items(alpha, truth, task, context, y):
    w = truth.w_star
    u_y = utility(w, task, context, y)
    u_star = utility(w, task, context, task.argmax(w, context))
    if compute_slack(alpha, u_star, u_y, u_y) == 0.0:
        return y
    cands = task.candidates(context)
    u = context.item_features[cands] @ w
    order = np.lexsort((cands, u))
    # vectorized utilities pick the order; the scalar path has the final say
    target = u_y + alpha * (u_star - u_y)
    start = np.searchsorted(u[order], target - 1e-9 * (1.0 + abs(target)))
    for j in cands[order[start:]]:
        if compute_slack(alpha, u_star, u_y, utility(w, task, context, j)) == 0.0:
            return int(j)
    return task.argmax(w, context)


def _promote(y: np.ndarray, top: np.ndarray) -> np.ndarray:
    moved = np.zeros(int(y.max()) + 1, dtype=bool)
    moved[top] = True
    return np.concatenate([top, y[~moved[y]]])


def _strict_alpha_ranking(alpha, truth, task: RankingTask, context: RankingContext, y):
    """Walk down the presented list until promoting the best five seen so far suffices."""
    w = truth.w_star
    y = np.asarray(y)
    y_star = task.argmax(w, context)
    u_star = utility(w, task, context, y_star)
    u_y = utility(w, task, context, y)
    if compute_slack(alpha, u_star, u_y, u_y) == 0.0:
        return y
    scores = context.documents @ w
    m = min(task.positions, context.n_docs)
    for depth in range(m, len(y) + 1):
        seen = y[:depth]
        top = seen[np.argsort(-scores[seen], kind="stable")[:m]]
        # same arithmetic as task.features on the promoted ranking
        u_bar = dot(w, top_features(context, top, task.discounts))
        if compute_slack(alpha, u_star, u_y, u_bar) == 0.0:
            return _promote(y, top)
    return y_star


def strict_alpha_feedback(alpha: float, truth: GroundTruthUtility, task, context, y):
    """Least improvement over ``y`` that is strictly alpha-informative.

    Items: the available item of smallest utility meeting the condition.
    Rankings: scan the presented list and move the best five documents
    found so far to the top, stopping as soon as the condition holds.
    Returns ``y`` itself when it is already optimal.
    """
    if isinstance(task, RankingTask):
        return _strict_alpha_ranking(alpha, truth, task, context, y)
    if hasattr(task, "candidates"):
        return _strict_alpha_items(alpha, truth, task, context, y)
    raise TypeError(f"no strict-alpha user for task {type(task).__name__}")


# --------------------------------------------------------------------------
# label-driven users
# --------------------------------------------------------------------------


def noisy_relevance_feedback(labels, y, depth: int = INSPECT_DEPTH,
                             promote: int = UTILITY_POSITIONS) -> np.ndarray:
    """Move the most relevant of the top ``depth`` documents to the top.

    Up to ``promote`` documents are placed first in descending label order
    (ties by presented position); the rest keep their relative order.
    """
    labels = np.asarray(labels)
    y = np.asarray(y)
    inspected = y[:depth]
    top = inspected[np.argsort(-labels[inspected], kind="stable")[:promote]]
    return _promote(y, top)


def rating_increment_feedback(ratings, presented: int, available=None) -> int:
    """First available item rated exactly one above the presented one."""
    ratings = np.asarray(ratings)
    r = ratings[presented]
    if r >= MAX_RATING:
        return presented
    mask = ratings == r + 1
    if available is not None:
        mask &= np.asarray(available, dtype=bool)
    hits = np.flatnonzero(mask)
    return int(hits[0]) if len(hits) else presented


def expected_alpha_feedback(alpha: float, improve_prob: float, truth, task, context, y,
                            rng: np.random.Generator):
    """Strict alpha feedback with probability ``improve_prob``, else ``y`` back."""
    if rng.random() < improve_prob:
        return strict_alpha_feedback(alpha, truth, task, context, y)
    return y


class SimulatedUser:
    """Bind a user model to hidden weights and a task."""

    def __init__(self, config: UserModelConfig, truth: GroundTruthUtility, task):
        self.config = config
        self.truth = truth
        self.task = task
        self.rng = make_rng(config.rng_seed)

    def respond(self, context, y):
        cfg = self.config
        if cfg.kind == "strict_alpha":
            return strict_alpha_feedback(cfg.alpha, self.truth, self.task, context, y)
        if cfg.kind == "expected_alpha":
            return expected_alpha_feedback(cfg.alpha, cfg.improve_prob, self.truth, self.task,
                                           context, y, self.rng)
        if cfg.kind == "noisy_relevance":
            if not isinstance(context, RankingContext) or context.labels is None:
                raise TypeError("noisy_relevance users need ranking contexts with labels")
            return noisy_relevance_feedback(context.labels, y)
        if not isinstance(context, ItemContext) or context.ratings is None:
            raise TypeError("rating_increment users need item contexts with ratings")
        return rating_increment_feedback(context.ratings, y, context.available)
