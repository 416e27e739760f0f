"""Online learners driven only by feature differences phi(y_bar) - phi(y).

The pure update functions operate on immutable :class:`LearnerState`
values; the learner classes wrap them behind a present/observe interface
for the harness.  Learners never see utilities or the hidden weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .utility import scale_add


@dataclass(frozen=True)
class LearnerState:
    w: np.ndarray
    t: int = 1
    update_count: int = 0
    pending: np.ndarray | None = None

    @classmethod
    def zeros(cls, dim: int) -> "LearnerState":
        return cls(w=np.zeros(dim))


@dataclass(frozen=True)
class BatchConfig:
    k: int = 1

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"batch period k must be a positive integer, got {self.k!r}")


@dataclass(frozen=True)
class ConvexLearnerConfig:
    G: float = 1.0
    ball_radius: float = 1.0

    def __post_init__(self):
        if not self.G > 0:
            raise ValueError("G must be positive")
        if not self.ball_radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def diameter(self) -> float:
        return 2.0 * self.ball_radius


def present(state: LearnerState, task, context):
    return task.argmax(state.w, context)


def _difference(phi_bar, phi) -> np.ndarray:
    phi_bar = np.asarray(phi_bar, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    if phi_bar.shape != phi.shape:
        raise ValueError(f"dimension mismatch: {phi_bar.shape} vs {phi.shape}")
    return phi_bar - phi


def perceptron_update(state: LearnerState, phi_bar, phi) -> LearnerState:
    """w <- w + phi_bar - phi."""
    d = _difference(phi_bar, phi)
    return replace(state, w=scale_add(state.w, 1.0, d), t=state.t + 1,
                   update_count=state.update_count + 1)


def batch_update(state: LearnerState, config: BatchConfig, phi_bar, phi) -> LearnerState:
    """Buffer this round's difference; apply the buffered sum every k rounds."""
    d = _difference(phi_bar, phi)
    pending = d if state.pending is None else state.pending + d
    if state.t % config.k == 0:
        return replace(state, w=scale_add(state.w, 1.0, pending), t=state.t + 1,
                       update_count=state.update_count + 1, pending=None)
    return replace(state, t=state.t + 1, pending=pending)


def project_ball(u, rho: float) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    n = float(np.linalg.norm(u))
    if n <= rho:
        return u.copy()
    return (rho / n) * u


def convex_step(state: LearnerState, config: ConvexLearnerConfig, phi_bar, phi) -> LearnerState:
    """Step of size G / sqrt(t) along the difference, then project onto the ball."""
    d = _difference(phi_bar, phi)
    w_bar = scale_add(state.w, config.G / math.sqrt(state.t), d)
    return replace(state, w=project_ball(w_bar, config.ball_radius), t=state.t + 1,
                   update_count=state.update_count + 1)


class PreferencePerceptron:
    name = "perceptron"

    def __init__(self, dim: int):
        self.state = LearnerState.zeros(dim)

    @property
    def w(self) -> np.ndarray:
        return self.state.w

    def present(self, task, context):
        return present(self.state, task, context)

    def observe(self, phi_bar, phi) -> None:
        self.state = perceptron_update(self.state, phi_bar, phi)


class BatchPreferencePerceptron(PreferencePerceptron):
    name = "batch"

    def __init__(self, dim: int, k: int = 1):
        super().__init__(dim)
        self.config = BatchConfig(k)

    def observe(self, phi_bar, phi) -> None:
        self.state = batch_update(self.state, self.config, phi_bar, phi)


class ConvexPreferencePerceptron(PreferencePerceptron):
    name = "convex"

    def __init__(self, dim: int, G: float = 1.0, rho: float = 1.0):
        super().__init__(dim)
        self.config = ConvexLearnerConfig(G, rho)

    def observe(self, phi_bar, phi) -> None:
        self.state = convex_step(self.state, self.config, phi_bar, phi)
