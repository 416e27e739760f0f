"""Input parsing (svmlight rankings, rating triples) and synthetic data."""

from __future__ import annotations

import warnings
from typing import Iterable, NamedTuple

import numpy as np

from ..tasks import RankingContext


class FormatError(ValueError):
    pass


def parse_svmlight_ranking(stream: Iterable[str]) -> list[RankingContext]:
    """Read ``<label> qid:<q> <idx>:<val> ...`` lines into ranking contexts.

    Documents are grouped by qid in order of first appearance, even when a
    query's lines are not contiguous.  Feature indices are 1-based and must
    increase within a line; absent indices are zero.  ``#`` starts a comment.
    """
    rows = []  # (qid, label, indices, values)
    dim = 0
    for lineno, raw in enumerate(stream, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = int(tokens[0])
        except ValueError:
            raise FormatError(f"line {lineno}: label {tokens[0]!r} is not an integer") from None
        if len(tokens) < 2 or not tokens[1].startswith("qid:"):
            raise FormatError(f"line {lineno}: expected qid:<q> after the label")
        qid = tokens[1][4:]
        idx, val = [], []
        for tok in tokens[2:]:
            i, sep, v = tok.partition(":")
            try:
                i, v = int(i), float(v)
            except ValueError:
                raise FormatError(f"line {lineno}: malformed feature {tok!r}") from None
            if not sep or i < 1 or (idx and i <= idx[-1]):
                raise FormatError(f"line {lineno}: feature indices must be increasing and >= 1")
            idx.append(i)
            val.append(v)
        if idx:
            dim = max(dim, idx[-1])
        rows.append((qid, label, idx, val))

    groups: dict[str, list] = {}
    for row in rows:
        groups.setdefault(row[0], []).append(row)
    contexts = []
    for qid, members in groups.items():
        docs = np.zeros((len(members), dim))
        for n, (_, _, idx, val) in enumerate(members):
            docs[n, np.asarray(idx, dtype=np.int64) - 1] = val
        labels = np.array([m[1] for m in members])
        contexts.append(RankingContext(_qid_value(qid), docs, labels))
    return contexts


def _qid_value(qid: str):
    try:
        return int(qid)
    except ValueError:
        return qid


class RatingsTriple(NamedTuple):
    user: int
    item: int
    rating: int
    timestamp: int | None = None


def _delimiter(name: str) -> str:
    return "\t" if name in ("tab", "\\t") else name


def parse_ratings(stream: Iterable[str], delimiter: str = "::") -> list[RatingsTriple]:
    """Read ``user<d>item<d>rating[<d>timestamp]`` lines.

    A repeated (user, item) pair keeps the last rating and warns.
    """
    delimiter = _delimiter(delimiter)
    triples: dict[tuple[int, int], RatingsTriple] = {}
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip("\r\n")
        if not line.strip():
            continue
        parts = line.split(delimiter)
        if len(parts) not in (3, 4):
            raise FormatError(f"line {lineno}: expected 3 or 4 fields, got {len(parts)}")
        try:
            user, item, rating = int(parts[0]), int(parts[1]), int(parts[2])
            ts = int(parts[3]) if len(parts) == 4 else None
        except ValueError:
            raise FormatError(f"line {lineno}: non-integer field in {line!r}") from None
        if not 1 <= rating <= 5:
            raise FormatError(f"line {lineno}: rating {rating} outside 1..5")
        key = (user, item)
        if key in triples:
            warnings.warn(f"line {lineno}: duplicate rating for user {user}, item {item}; "
                          "keeping the last one", stacklevel=2)
            del triples[key]
        triples[key] = RatingsTriple(user, item, rating, ts)
    return list(triples.values())


# --------------------------------------------------------------------------
# synthetic data
# --------------------------------------------------------------------------


def unit_sphere(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def synth_ranking(n_queries: int, n_docs: int, dim: int, label_noise: float,
                  rng: np.random.Generator):
    """Random queries with documents on the unit sphere and a planted unit ``w``.

    Labels are ``clip(round(2 + 4 * w.x + noise), 0, 4)``.
    Returns ``(contexts, w_true)``.
    """
    w_true = unit_sphere(rng, 1, dim)[0]
    contexts = []
    for q in range(n_queries):
        docs = unit_sphere(rng, n_docs, dim)
        raw = 2.0 + 4.0 * (docs @ w_true) + label_noise * rng.standard_normal(n_docs)
        labels = np.clip(np.floor(raw + 0.5), 0, 4).astype(np.int64)
        contexts.append(RankingContext(q + 1, docs, labels))
    return contexts, w_true


def synth_ratings(n_users: int, n_items: int, rank: int, density: float, noise: float,
                  rng: np.random.Generator) -> list[RatingsTriple]:
    """Sparse 1..5 ratings from a planted low-rank score matrix.

    Each user rates a ``density`` fraction of items (at least ``rank + 1``).
    """
    users = rng.standard_normal((n_users, rank))
    items = rng.standard_normal((n_items, rank))
    scale = 1.2 / np.sqrt(rank)
    triples = []
    n_rated = max(rank + 1, int(round(density * n_items)))
    for u in range(n_users):
        rated = np.sort(rng.choice(n_items, size=min(n_rated, n_items), replace=False))
        score = 3.0 + scale * (items[rated] @ users[u]) + noise * rng.standard_normal(len(rated))
        ratings = np.clip(np.floor(score + 0.5), 1, 5).astype(np.int64)
        triples.extend(RatingsTriple(u, int(i), int(r)) for i, r in zip(rated, ratings))
    return triples
