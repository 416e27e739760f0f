"""Ground-truth fitting: ridge least squares and ALS item embeddings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateFitError(ValueError):
    pass


def fit_least_squares(features, targets, ridge_lambda: float = 1e-6) -> np.ndarray:
    """argmin_w sum (w.x - r)^2 + lambda ||w||^2.

    Solved as an augmented least-squares problem rather than through the
    normal equations, which would square the condition number.
    """
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    r = np.asarray(targets, dtype=np.float64).ravel()
    if X.shape[0] < 1 or X.shape[0] != r.shape[0]:
        raise ValueError("need at least one example and one target per example")
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be non-negative")
    dim = X.shape[1]
    if ridge_lambda == 0:
        if np.linalg.matrix_rank(X) < dim:
            raise DegenerateFitError("rank-deficient system at ridge_lambda=0; set ridge_lambda > 0")
        A, b = X, r
    else:
        A = np.vstack([X, np.sqrt(ridge_lambda) * np.eye(dim)])
        b = np.concatenate([r, np.zeros(dim)])
    w, *_ = np.linalg.lstsq(A, b, rcond=None)
    return w


@dataclass
class Factorization:
    user_ids: np.ndarray
    item_ids: np.ndarray
    user_factors: np.ndarray
    item_factors: np.ndarray

    def predict(self, u: int, i: int) -> float:
        return float(self.user_factors[u] @ self.item_factors[i])

    def rmse(self, users, items, ratings) -> float:
        pred = np.einsum("ij,ij->i", self.user_factors[users], self.item_factors[items])
        return float(np.sqrt(np.mean((pred - ratings) ** 2)))


def _index(values):
    ids, inverse = np.unique(values, return_inverse=True)
    return ids, inverse


def _solve_rows(target, other, groups, ratings, reg):
    k = other.shape[1]
    eye = reg * np.eye(k)
    for row, (idx, pos) in groups.items():
        V = other[idx]
        if reg > 0:
            target[row] = np.linalg.solve(V.T @ V + eye, V.T @ ratings[pos])
        else:
            target[row] = np.linalg.lstsq(V, ratings[pos], rcond=None)[0]


def _group(rows, cols):
    order = np.argsort(rows, kind="stable")
    bounds = np.flatnonzero(np.diff(rows[order])) + 1
    out = {}
    for pos in np.split(order, bounds):
        if len(pos):
            out[int(rows[pos[0]])] = (cols[pos], pos)
    return out


def factorize_ratings(triples, rank: int = 16, reg: float = 0.1, iters: int = 15,
                      seed: int = 0) -> Factorization:
    """Alternating least squares on the observed entries of the rating matrix.

    Each half-step solves one ridge problem per user (or item) with penalty
    ``reg * ||f||^2``.  Item factors start from N(0, 0.1^2) draws seeded by
    ``seed``.
    """
    if rank < 1:
        raise ValueError("rank must be at least 1")
    if len(triples) == 0:
        raise ValueError("cannot factorize an empty rating set")
    users = np.array([t[0] for t in triples])
    items = np.array([t[1] for t in triples])
    ratings = np.array([t[2] for t in triples], dtype=np.float64)
    user_ids, u_idx = _index(users)
    item_ids, i_idx = _index(items)

    rng = np.random.Generator(np.random.PCG64(seed))
    P = np.zeros((len(user_ids), rank))
    Q = 0.1 * rng.standard_normal((len(item_ids), rank))
    by_user = _group(u_idx, i_idx)
    by_item = _group(i_idx, u_idx)
    for _ in range(iters):
        _solve_rows(P, Q, by_user, ratings, reg)
        _solve_rows(Q, P, by_item, ratings, reg)
    return Factorization(user_ids, item_ids, P, Q)
