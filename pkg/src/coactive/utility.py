"""Dense vector arithmetic and the joint-feature-map abstraction.

Feature vectors, weights and utilities are plain 1-D ``float64`` numpy
arrays.  Every task implements :class:`JointFeatureMap`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def as_vector(values) -> np.ndarray:
    """Coerce ``values`` to a finite 1-D float64 array (copy)."""
    v = np.array(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"feature vector must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("feature vector has non-finite entries")
    return v


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def dot(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    return float(a @ b)


def norm(a) -> float:
    return math.sqrt(dot(a, a))


def scale_add(w, coeff: float, d) -> np.ndarray:
    """Return ``w + coeff * d`` as a new array; inputs are left untouched."""
    if not math.isfinite(coeff):
        raise ValueError(f"non-finite coefficient {coeff!r}")
    w = np.asarray(w, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    _check_dims(w, d)
    with np.errstate(over="ignore", invalid="ignore"):
        out = w + coeff * d
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("scale_add produced non-finite entries")
    return out


class JointFeatureMap:
    """Map from (context, object) pairs to feature vectors.

    Subclasses set ``dimension`` and ``norm_bound`` (an upper bound on
    ``||features(x, y)||`` over all admissible pairs, declared rather than
    measured) and implement :meth:`features` and :meth:`argmax`.
    """

    dimension: int
    norm_bound: float

    def features(self, context, obj) -> np.ndarray:
        raise NotImplementedError

    def argmax(self, w: np.ndarray, context):
        """Admissible object maximizing ``w . features(context, .)``."""
        raise NotImplementedError


def utility(w, fmap: JointFeatureMap, context, obj) -> float:
    """Linear utility ``w . phi(context, obj)``."""
    return dot(w, fmap.features(context, obj))


@dataclass(frozen=True)
class GroundTruthUtility:
    """Hidden utility weights; only simulators and metrics ever see these."""

    w_star: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = as_vector(self.w_star)
        w.setflags(write=False)
        object.__setattr__(self, "w_star", w)

    @property
    def norm(self) -> float:
        return norm(self.w_star)

    def utility(self, fmap: JointFeatureMap, context, obj) -> float:
        return utility(self.w_star, fmap, context, obj)

    def best(self, fmap: JointFeatureMap, context):
        return fmap.argmax(self.w_star, context)
