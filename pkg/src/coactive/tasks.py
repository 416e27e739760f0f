"""Concrete coactive tasks: top-k ranking, item recommendation, adversary.

Rankings are 0-based numpy integer arrays: ``y[i]`` is the index of the
document shown at position ``i + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .utility import JointFeatureMap

UTILITY_POSITIONS = 5
INSPECT_DEPTH = 10


def position_discounts(k: int) -> np.ndarray:
    """``1 / log2(i + 1)`` for positions ``i = 1..k``."""
    return 1.0 / np.log2(np.arange(2, k + 2, dtype=np.float64))


# --------------------------------------------------------------------------
# ranking
# --------------------------------------------------------------------------


@dataclass
class RankingContext:
    query_id: int
    documents: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.documents = np.asarray(self.documents, dtype=np.float64)
        if self.documents.ndim != 2 or self.documents.shape[0] < 1:
            raise ValueError("a ranking context needs a (n_docs, dim) matrix with n_docs >= 1")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.n_docs,):
                raise ValueError("one relevance label per document required")

    @property
    def n_docs(self) -> int:
        return self.documents.shape[0]


def check_ranking(y, n_docs: int, positions: int = UTILITY_POSITIONS) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.dtype.kind not in "iu":
        raise ValueError("ranking must be a 1-D integer sequence")
    if len(y) < min(positions, n_docs):
        raise ValueError(f"ranking needs at least {min(positions, n_docs)} positions")
    if len(y) and (y.min() < 0 or y.max() >= n_docs):
        raise ValueError("ranking refers to a document that does not exist")
    seen = np.zeros(n_docs, dtype=bool)
    seen[y] = True
    if np.count_nonzero(seen) != len(y):
        raise ValueError("ranking repeats a document")
    return y


def top_features(context: RankingContext, top, discounts: np.ndarray) -> np.ndarray:
    """Discounted sum of the documents in ``top``, which must be valid."""
    return discounts[: len(top)] @ context.documents[top]


def ranking_features(context: RankingContext, y, positions: int = UTILITY_POSITIONS,
                     discounts: np.ndarray | None = None) -> np.ndarray:
    y = check_ranking(y, context.n_docs, positions)
    m = min(positions, context.n_docs)
    if discounts is None:
        discounts = position_discounts(positions)
    return top_features(context, y[:m], discounts)


def ranking_argmax(w, context: RankingContext) -> np.ndarray:
    """Sort documents by score, highest first; ties keep index order."""
    scores = context.documents @ np.asarray(w, dtype=np.float64)
    return np.argsort(-scores, kind="stable")


class RankingTask(JointFeatureMap):
    """Rank documents for a stream of queries; utility reads the top positions.

    ``norm_bound`` is the sum of the position discounts times the largest
    document norm, which bounds the norm of any discounted document sum.
    """

    def __init__(self, contexts: list[RankingContext], positions: int = UTILITY_POSITIONS):
        if not contexts:
            raise ValueError("ranking task needs at least one query")
        dims = {c.documents.shape[1] for c in contexts}
        if len(dims) != 1:
            raise ValueError(f"documents disagree on dimension: {sorted(dims)}")
        self.contexts = list(contexts)
        self.positions = positions
        self.dimension = dims.pop()
        self.discounts = position_discounts(positions)
        max_doc_norm = max(float(np.linalg.norm(c.documents, axis=1).max()) for c in contexts)
        self.norm_bound = float(self.discounts.sum()) * max_doc_norm

    def features(self, context: RankingContext, y) -> np.ndarray:
        return ranking_features(context, y, self.positions, self.discounts)

    def argmax(self, w, context: RankingContext) -> np.ndarray:
        return ranking_argmax(w, context)

    def context_stream(self, rng: np.random.Generator, T: int) -> Iterator[RankingContext]:
        """Queries in random order, reshuffled each pass through the data."""
        emitted = 0
        while emitted < T:
            for i in rng.permutation(len(self.contexts)):
                if emitted == T:
                    return
                emitted += 1
                yield self.contexts[i]

    def consume(self, context, y, y_bar) -> None:
        pass


# --------------------------------------------------------------------------
# items
# --------------------------------------------------------------------------


@dataclass
class ItemContext:
    """Candidate items for one user; ``available`` shrinks as items are used."""

    item_features: np.ndarray
    item_ids: np.ndarray | None = None
    available: np.ndarray | None = None
    ratings: np.ndarray | None = None

    def __post_init__(self):
        self.item_features = np.asarray(self.item_features, dtype=np.float64)
        n = self.item_features.shape[0]
        if self.item_ids is None:
            self.item_ids = np.arange(n)
        if self.available is None:
            self.available = np.ones(n, dtype=bool)
        else:
            self.available = np.array(self.available, dtype=bool)
        if self.ratings is not None:
            self.ratings = np.asarray(self.ratings, dtype=np.int64)

    @property
    def n_available(self) -> int:
        return int(self.available.sum())


def item_argmax(w, context: ItemContext) -> int:
    if not context.available.any():
        raise ValueError("no items left to recommend")
    scores = context.item_features @ np.asarray(w, dtype=np.float64)
    scores[~context.available] = -np.inf
    return int(np.argmax(scores))


class ItemTask(JointFeatureMap):
    """Recommend one item per round to a single user.

    Both the presented and the feedback item are withdrawn after each
    round, so the same context object evolves over the run.
    """

    def __init__(self, context: ItemContext):
        self.context = context
        self.dimension = context.item_features.shape[1]
        self.norm_bound = float(np.linalg.norm(context.item_features, axis=1).max())

    def features(self, context: ItemContext, item: int) -> np.ndarray:
        if not context.available[item]:
            raise ValueError(f"item {item} is not available")
        return context.item_features[item]

    def argmax(self, w, context: ItemContext) -> int:
        return item_argmax(w, context)

    def candidates(self, context: ItemContext) -> np.ndarray:
        return np.flatnonzero(context.available)

    def context_stream(self, rng, T: int) -> Iterator[ItemContext]:
        for _ in range(T):
            yield self.context

    def consume(self, context: ItemContext, y: int, y_bar: int) -> None:
        context.available[y] = False
        context.available[y_bar] = False


# --------------------------------------------------------------------------
# lower-bound adversary
# --------------------------------------------------------------------------


@dataclass
class AdversaryState:
    horizon: int
    outputs: list[int] = field(default_factory=list)

    @property
    def done(self) -> bool:
        return len(self.outputs) == self.horizon


def adversary_next(state: AdversaryState, y: int) -> int:
    """Record the learner's sign and answer with the opposite one."""
    if state.done:
        raise RuntimeError(f"adversary horizon {state.horizon} exceeded")
    if y not in (-1, 1):
        raise ValueError(f"adversarial outputs are -1 or +1, got {y!r}")
    state.outputs.append(int(y))
    return -int(y)


def adversary_w_star(state: AdversaryState) -> np.ndarray:
    """Unit-norm utility that makes every recorded output wrong."""
    if not state.done:
        raise RuntimeError("ground truth is only defined once the horizon is reached")
    return -np.asarray(state.outputs, dtype=np.float64) / math.sqrt(state.horizon)


class AdversarialTask(JointFeatureMap):
    """Contexts are the basis vectors e_1..e_T, objects are signs.

    ``phi(e_t, y) = y * e_t``.  Contexts are represented by their 0-based
    coordinate index.  Canonical object order is (-1, +1).
    """

    norm_bound = 1.0

    def __init__(self, horizon: int):
        if horizon < 1:
            raise ValueError("horizon must be positive")
        self.dimension = horizon
        self.state = AdversaryState(horizon)

    def features(self, context: int, y: int) -> np.ndarray:
        if y not in (-1, 1):
            raise ValueError(f"objects are -1 or +1, got {y!r}")
        phi = np.zeros(self.dimension)
        phi[context] = y
        return phi

    def argmax(self, w, context: int) -> int:
        return 1 if w[context] > 0 else -1

    def context_stream(self, rng, T: int) -> Iterator[int]:
        if T > self.dimension:
            raise ValueError("adversarial run cannot exceed its horizon")
        return iter(range(T))

    def feedback(self, context: int, y: int) -> int:
        return adversary_next(self.state, y)

    def w_star(self) -> np.ndarray:
        return adversary_w_star(self.state)

    def consume(self, context, y, y_bar) -> None:
        pass
