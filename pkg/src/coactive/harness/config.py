"""Experiment configuration: a flat ``key = value`` text format.

Blank lines and ``#`` comments are ignored.  Tuples are comma separated.
:func:`serialize` writes every field in declaration order, so
``parse(serialize(cfg)) == cfg`` and serializing a parsed canonical file
reproduces it exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

from ..feedback import USER_KINDS
from ..metrics import CONVEX_LOSSES, DEFAULT_ALPHA_GRID

TASKS = ("ranking", "item", "adversarial")
LEARNERS = ("perceptron", "batch", "convex")
TRUTHS = ("auto", "planted", "fitted")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    task: str = "ranking"
    learner: str = "perceptron"
    user: str = "strict_alpha"
    alpha: float = 1.0
    improve_prob: float = 1.0
    T: int = 1000
    seeds: tuple = (0,)
    alpha_grid: tuple = DEFAULT_ALPHA_GRID
    out: str = "runs/default"
    # learner knobs
    k: int = 1
    G: float = 1.0
    rho: float = 1.0
    loss: str = "hinge"
    # ground truth and data
    truth: str = "auto"
    data_seed: int = 0
    ridge: float = 1e-6
    svmlight: str = ""
    ratings: str = ""
    delimiter: str = "::"
    # synthetic ranking data
    n_queries: int = 50
    n_docs: int = 20
    dim: int = 10
    label_noise: float = 0.5
    # synthetic ratings data and the item embedding
    n_users: int = 200
    n_items: int = 3200
    planted_rank: int = 5
    density: float = 0.1
    rating_noise: float = 0.5
    rank: int = 16
    reg: float = 0.1
    als_iters: int = 15
    check_invariants: bool = False

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> "ExperimentConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.task in TASKS, f"task must be one of {TASKS}, got {self.task!r}")
        need(self.learner in LEARNERS, f"learner must be one of {LEARNERS}, got {self.learner!r}")
        need(self.user in USER_KINDS, f"user must be one of {USER_KINDS}, got {self.user!r}")
        need(self.truth in TRUTHS, f"truth must be one of {TRUTHS}, got {self.truth!r}")
        need(self.loss in CONVEX_LOSSES, f"loss must be one of {tuple(CONVEX_LOSSES)}")
        need(0.0 < self.alpha <= 1.0, "alpha must lie in (0, 1]")
        need(0.0 <= self.improve_prob <= 1.0, "improve_prob must lie in [0, 1]")
        need(self.T >= 1, "T must be at least 1")
        need(len(self.seeds) >= 1, "at least one seed is required")
        need(len(set(self.seeds)) == len(self.seeds), "seeds must be distinct")
        need(all(0.0 < a <= 1.0 for a in self.alpha_grid), "alpha_grid values must lie in (0, 1]")
        need(self.k >= 1, "k must be at least 1")
        need(self.G > 0 and self.rho > 0, "G and rho must be positive")
        need(self.ridge >= 0 and self.reg >= 0, "ridge and reg must be non-negative")
        need(self.rank >= 1 and self.planted_rank >= 1, "ranks must be at least 1")
        need(self.n_queries >= 1 and self.n_docs >= 1 and self.dim >= 1,
             "ranking sizes must be positive")
        need(0.0 < self.density <= 1.0, "density must lie in (0, 1]")
        if self.user == "noisy_relevance":
            need(self.task == "ranking", "noisy_relevance users only apply to the ranking task")
        if self.user == "rating_increment":
            need(self.task == "item", "rating_increment users only apply to the item task")
        if self.task == "adversarial":
            need(self.learner == "perceptron", "the adversarial task runs the plain perceptron")
        if self.task == "item":
            need(self.truth != "planted", "the item task measures regret against fitted utilities")
        if self.task == "ranking" and self.svmlight:
            need(self.truth != "planted", "svmlight data has no planted truth; use truth=fitted")
        return self


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _convert(key: str, text: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            return _parse_bool(text)
        if kind == "tuple":
            parts = [p.strip() for p in text.split(",") if p.strip()]
            conv = int if key == "seeds" else float
            return tuple(conv(p) for p in parts)
        return text
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    return str(value)


def apply_overrides(config: ExperimentConfig, pairs: dict) -> ExperimentConfig:
    changes = {}
    for key, text in pairs.items():
        if key not in _TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        changes[key] = _convert(key, text) if isinstance(text, str) else text
    return config.replace(**changes)


def parse(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        pairs[key] = value
    return apply_overrides(base or ExperimentConfig(), pairs)


def serialize(config: ExperimentConfig) -> str:
    return "".join(f"{f.name} = {_format(getattr(config, f.name))}\n" for f in fields(config))


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
