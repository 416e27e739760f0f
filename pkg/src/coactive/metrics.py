"""Regret accounting, regret-bound formulas and retrieval metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .utility import utility

DEFAULT_ALPHA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))


def regret_step(truth, task, context, y) -> float:
    """Utility shortfall of ``y`` against the best object under the hidden weights."""
    w = truth.w_star
    return utility(w, task, context, task.argmax(w, context)) - utility(w, task, context, y)


def theorem1_bound(alpha: float, slack_sum: float, R: float, w_star_norm: float, T: int,
                   k: int = 1) -> float:
    """Average-regret bound of the preference perceptron.

    ``k > 1`` gives the bound for updates applied every ``k`` rounds.
    """
    return slack_sum / (alpha * T) + 2.0 * R * w_star_norm * math.sqrt(k) / (alpha * math.sqrt(T))


def corollary1_bound(alpha: float, expected_slack_sum: float, R: float, w_star_norm: float,
                     T: int) -> float:
    """Same form as :func:`theorem1_bound`, with expected slacks."""
    return theorem1_bound(alpha, expected_slack_sum, R, w_star_norm, T)


def theorem2_bound(alpha: float, slack_sum: float, G: float, ball_diameter: float, R: float,
                   T: int, baseline_loss_sum: float) -> float:
    """Bound on the average convex loss of the projected learner."""
    sqrt_t = math.sqrt(T)
    return (baseline_loss_sum / T
            + 2.0 * G * slack_sum / (alpha * T)
            + (ball_diameter * G / (2.0 * sqrt_t)
               + ball_diameter * G / T
               + 4.0 * R * R * G / sqrt_t) / alpha)


def dcg_at_k(relevances, ranking, k: int = 10) -> float:
    if k < 1:
        raise ValueError("k must be at least 1")
    rel = np.asarray(relevances, dtype=np.float64)[np.asarray(ranking)[:k]]
    return float(rel @ (1.0 / np.log2(np.arange(2, len(rel) + 2))))


# convex losses on theta = U(y) - U(y*) <= 0; non-increasing, slopes in [-1, 0]

def hinge_loss(theta: float) -> float:
    return max(0.0, -theta)


def logistic_loss(theta: float) -> float:
    # log(1 + exp(-theta)) without overflow for very negative theta
    return float(np.logaddexp(0.0, -theta))


CONVEX_LOSSES = {"hinge": (hinge_loss, 1.0), "logistic": (logistic_loss, 1.0)}


@dataclass
class RegretTrace:
    """Per-round regret, slack sums on an alpha grid and weight norms."""

    alpha_grid: tuple = DEFAULT_ALPHA_GRID
    regret_inst: list = field(default_factory=list)
    cumulative: list = field(default_factory=list)
    norm_w: list = field(default_factory=list)
    slack_sums: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    _slack_total: np.ndarray | None = None

    def record(self, u_star: float, u_y: float, u_y_bar: float, norm_w: float,
               loss: float | None = None) -> None:
        r = u_star - u_y
        self.regret_inst.append(r)
        self.cumulative.append((self.cumulative[-1] if self.cumulative else 0.0) + r)
        grid = np.asarray(self.alpha_grid, dtype=np.float64)
        xi = np.maximum(0.0, grid * (u_star - u_y) - (u_y_bar - u_y))
        self._slack_total = xi if self._slack_total is None else self._slack_total + xi
        self.slack_sums.append(self._slack_total.copy())
        self.norm_w.append(norm_w)
        if loss is not None:
            self.losses.append(loss)

    def __len__(self) -> int:
        return len(self.regret_inst)

    @property
    def rounds(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def average(self) -> np.ndarray:
        return np.asarray(self.cumulative) / self.rounds

    def slack_sum(self, alpha: float) -> np.ndarray:
        """Cumulative slack at one grid point, per round."""
        i = self.alpha_index(alpha)
        return np.asarray(self.slack_sums)[:, i] if len(self) else np.zeros(0)

    def alpha_index(self, alpha: float) -> int:
        for i, a in enumerate(self.alpha_grid):
            if math.isclose(a, alpha, rel_tol=0, abs_tol=1e-12):
                return i
        raise KeyError(f"alpha {alpha} is not on the slack grid {self.alpha_grid}")

    @property
    def average_loss(self) -> np.ndarray:
        return np.cumsum(self.losses) / self.rounds[: len(self.losses)]


def loglog_slope(T: np.ndarray, reg: np.ndarray) -> float:
    """Least-squares slope of log REG_T against log T."""
    return float(np.polyfit(np.log(T), np.log(reg), 1)[0])
