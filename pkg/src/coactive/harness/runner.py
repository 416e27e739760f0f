"""Multi-seed experiment execution and CSV trace export."""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..feedback import SimulatedUser, UserModelConfig, compute_slack, make_rng, round_rating
from ..learners import BatchPreferencePerceptron, ConvexPreferencePerceptron, PreferencePerceptron
from ..metrics import CONVEX_LOSSES, RegretTrace, theorem1_bound, theorem2_bound
from ..tasks import AdversarialTask, ItemContext, ItemTask, RankingTask
from ..utility import GroundTruthUtility, dot, utility
from . import config as config_mod
from .config import ConfigError, ExperimentConfig
from .data import parse_ratings, parse_svmlight_ranking, synth_ranking, synth_ratings
from .fitting import factorize_ratings, fit_least_squares

log = logging.getLogger(__name__)

TOL = 1e-9


class InvariantViolation(AssertionError):
    pass


class RunAborted(RuntimeError):
    def __init__(self, seed, round_, cause, path=None):
        super().__init__(f"seed {seed} aborted at round {round_}: {cause}")
        self.seed, self.round, self.cause, self.path = seed, round_, cause, path


# --------------------------------------------------------------------------
# problem construction
# --------------------------------------------------------------------------


@dataclass
class Problem:
    """Seed-independent data for one config; hands out fresh task instances."""

    config: ExperimentConfig
    contexts: list = field(default_factory=list)
    w_star: np.ndarray | None = None
    item_features: np.ndarray | None = None
    item_ids: np.ndarray | None = None
    test_users: list = field(default_factory=list)

    def instance(self, seed: int):
        """``(task, truth)``; truth is None when it is only known after the run."""
        cfg = self.config
        if cfg.task == "adversarial":
            return AdversarialTask(cfg.T), None
        if cfg.task == "ranking":
            return RankingTask(self.contexts), GroundTruthUtility(self.w_star)
        obs, ratings = self.test_users[seed % len(self.test_users)]
        M = self.item_features
        w = fit_least_squares(M[obs], ratings, cfg.ridge)
        full = round_rating(M @ w)
        full[obs] = ratings
        ctx = ItemContext(M, self.item_ids, ratings=full)
        return ItemTask(ctx), GroundTruthUtility(w)


def _truth_mode(cfg: ExperimentConfig) -> str:
    if cfg.truth != "auto":
        return cfg.truth
    if cfg.task == "ranking" and not cfg.svmlight and cfg.user != "noisy_relevance":
        return "planted"
    return "fitted"


def build_problem(cfg: ExperimentConfig) -> Problem:
    cfg.validate()
    problem = Problem(cfg)
    if cfg.task == "adversarial":
        return problem
    rng = make_rng(cfg.data_seed)
    if cfg.task == "ranking":
        if cfg.svmlight:
            with open(cfg.svmlight, encoding="utf-8") as fh:
                contexts = parse_svmlight_ranking(fh)
            w_true = None
        else:
            contexts, w_true = synth_ranking(cfg.n_queries, cfg.n_docs, cfg.dim,
                                             cfg.label_noise, rng)
        if not contexts:
            raise ConfigError("ranking data has no queries")
        problem.contexts = contexts
        if _truth_mode(cfg) == "planted":
            problem.w_star = w_true
        else:
            if any(c.labels is None for c in contexts):
                raise ConfigError("fitting the ground truth needs relevance labels")
            X = np.vstack([c.documents for c in contexts])
            r = np.concatenate([c.labels for c in contexts])
            problem.w_star = fit_least_squares(X, r, cfg.ridge)
        return problem

    if cfg.ratings:
        with open(cfg.ratings, encoding="utf-8") as fh:
            triples = parse_ratings(fh, cfg.delimiter)
    else:
        triples = synth_ratings(cfg.n_users, cfg.n_items, cfg.planted_rank, cfg.density,
                                cfg.rating_noise, rng)
    users = np.unique([t.user for t in triples])
    shuffled = rng.permutation(users)
    half = len(shuffled) // 2
    if half == 0:
        raise ConfigError("need at least two users to split into embedding and test halves")
    train_users = set(shuffled[:half].tolist())
    train = [t for t in triples if t.user in train_users]
    fact = factorize_ratings(train, cfg.rank, cfg.reg, cfg.als_iters, cfg.data_seed)
    problem.item_features = fact.item_factors
    problem.item_ids = fact.item_ids
    per_user: dict[int, list] = {}
    for t in triples:
        if t.user not in train_users:
            per_user.setdefault(t.user, []).append(t)
    for u in sorted(per_user):
        rows = per_user[u]
        items = np.array([t.item for t in rows])
        known = np.isin(items, fact.item_ids)
        if known.any():
            pos = np.searchsorted(fact.item_ids, items[known])
            ratings = np.array([t.rating for t in rows])[known]
            problem.test_users.append((pos, ratings))
    if not problem.test_users:
        raise ConfigError("no test user rated any embedded item")
    if 2 * cfg.T > len(fact.item_ids):
        log.warning("T=%d may exhaust the %d candidate items", cfg.T, len(fact.item_ids))
    return problem


def make_learner(cfg: ExperimentConfig, dim: int):
    if cfg.learner == "batch":
        return BatchPreferencePerceptron(dim, cfg.k)
    if cfg.learner == "convex":
        return ConvexPreferencePerceptron(dim, cfg.G, cfg.rho)
    return PreferencePerceptron(dim)


# --------------------------------------------------------------------------
# one seed
# --------------------------------------------------------------------------


@dataclass
class SeedRun:
    seed: int
    trace: RegretTrace
    R: float
    w_star_norm: float
    alpha: float
    k: int = 1
    G: float | None = None
    rho: float | None = None
    loss_at_zero: float | None = None

    def bound_theorem1(self) -> np.ndarray:
        xi = self.trace.slack_sum(self.alpha)
        return np.array([theorem1_bound(self.alpha, xi[t - 1], self.R, self.w_star_norm, t, self.k)
                         for t in self.trace.rounds])

    def bound_theorem2(self) -> np.ndarray:
        xi = self.trace.slack_sum(self.alpha)
        return np.array([theorem2_bound(self.alpha, xi[t - 1], self.G, 2.0 * self.rho, self.R, t,
                                        t * self.loss_at_zero) for t in self.trace.rounds])

    def columns(self) -> dict:
        tr = self.trace
        cols = {
            "round": tr.rounds,
            "regret_inst": np.asarray(tr.regret_inst),
            "regret_avg": tr.average,
            "bound_theorem1": self.bound_theorem1(),
            "norm_w": np.asarray(tr.norm_w),
        }
        for a in tr.alpha_grid:
            cols[f"slack_sum_alpha_{_fmt_alpha(a)}"] = tr.slack_sum(a)
        if self.G is not None:
            cols["loss_avg"] = tr.average_loss
            cols["bound_theorem2"] = self.bound_theorem2()
        return cols


def _fmt_alpha(a: float) -> str:
    return format(a, "g")


def _alpha_grid(cfg: ExperimentConfig) -> tuple:
    grid = tuple(cfg.alpha_grid)
    if not any(math.isclose(a, cfg.alpha, rel_tol=0, abs_tol=1e-12) for a in grid):
        grid = tuple(sorted(grid + (cfg.alpha,)))
    return grid


def _check_round(cfg, learner, task, w_prev, phi_bar, phi, t, u_star, u_y, u_y_bar):
    gain = dot(w_prev, phi_bar - phi)
    if gain > TOL * (1.0 + float(np.abs(w_prev).sum())):
        raise InvariantViolation(f"round {t}: presented object is not the argmax ({gain:.3g} > 0)")
    sq = dot(learner.w, learner.w)
    if cfg.learner == "convex":
        if sq > cfg.rho ** 2 * (1.0 + TOL):
            raise InvariantViolation(f"round {t}: ||w|| = {math.sqrt(sq)} exceeds rho = {cfg.rho}")
    else:
        k = cfg.k if cfg.learner == "batch" else 1
        limit = 4.0 * task.norm_bound ** 2 * k * t
        if sq > limit * (1.0 + TOL):
            raise InvariantViolation(f"round {t}: ||w||^2 = {sq} exceeds 4 R^2 k t = {limit}")
    if cfg.user == "strict_alpha" and u_star is not None:
        if compute_slack(cfg.alpha, u_star, u_y, u_y_bar) != 0.0:
            raise InvariantViolation(f"round {t}: strict-alpha feedback has positive slack")


def run_seed(problem: Problem, seed: int) -> SeedRun:
    cfg = problem.config
    task, truth = problem.instance(seed)
    stream_seq, user_seq = np.random.SeedSequence(seed).spawn(2)
    learner = make_learner(cfg, task.dimension)
    trace = RegretTrace(_alpha_grid(cfg))
    loss_fn = CONVEX_LOSSES[cfg.loss][0] if cfg.learner == "convex" else None
    user = None
    if truth is not None:
        user = SimulatedUser(UserModelConfig(cfg.user, cfg.alpha, cfg.improve_prob, user_seq),
                             truth, task)
    deferred = []
    t = 0
    try:
        for t, ctx in enumerate(task.context_stream(make_rng(stream_seq), cfg.T), 1):
            w_prev = learner.w
            y = learner.present(task, ctx)
            y_bar = task.feedback(ctx, y) if user is None else user.respond(ctx, y)
            phi = task.features(ctx, y)
            phi_bar = task.features(ctx, y_bar)
            learner.observe(phi_bar, phi)
            if not np.all(np.isfinite(learner.w)):
                raise FloatingPointError("weights became non-finite")
            if truth is None:
                deferred.append((phi, phi_bar, ctx))
                u_star = u_y = u_y_bar = None
            else:
                u_star = utility(truth.w_star, task, ctx, task.argmax(truth.w_star, ctx))
                u_y = dot(truth.w_star, phi)
                u_y_bar = dot(truth.w_star, phi_bar)
            if cfg.check_invariants:
                _check_round(cfg, learner, task, w_prev, phi_bar, phi, t, u_star, u_y, u_y_bar)
            norm_w = math.sqrt(dot(learner.w, learner.w))
            if truth is not None:
                loss = loss_fn(u_y - u_star) if loss_fn else None
                trace.record(u_star, u_y, u_y_bar, norm_w, loss)
            else:
                deferred[-1] += (norm_w,)
            task.consume(ctx, y, y_bar)
    except (FloatingPointError, ValueError) as exc:
        if truth is None:
            raise RunAborted(seed, t, exc) from exc
        raise _abort(_seed_run(cfg, seed, trace, task, truth), t, exc) from exc

    if truth is None:
        truth = GroundTruthUtility(task.w_star())
        for phi, phi_bar, ctx, norm_w in deferred:
            u_star = utility(truth.w_star, task, ctx, task.argmax(truth.w_star, ctx))
            trace.record(u_star, dot(truth.w_star, phi), dot(truth.w_star, phi_bar), norm_w)
    return _seed_run(cfg, seed, trace, task, truth)


def _abort(run: SeedRun, t: int, exc: Exception) -> RunAborted:
    err = RunAborted(run.seed, t, exc)
    err.partial = run
    return err


def _seed_run(cfg, seed, trace, task, truth) -> SeedRun:
    run = SeedRun(seed, trace, task.norm_bound, truth.norm, cfg.alpha,
                  k=cfg.k if cfg.learner == "batch" else 1)
    if cfg.learner == "convex":
        fn = CONVEX_LOSSES[cfg.loss]
        run.G, run.rho, run.loss_at_zero = cfg.G, cfg.rho, fn[0](0.0)
    return run


# --------------------------------------------------------------------------
# experiment
# --------------------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_columns(path, cols: dict) -> None:
    names = list(cols)
    n = len(cols[names[0]])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(n):
            writer.writerow([_num(cols[c][i]) for c in names])


def read_columns(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows).reshape(len(rows), len(names))
    return {n: data[:, i] for i, n in enumerate(names)}


def aggregate(runs: list[SeedRun]) -> dict:
    """Mean and standard error across seeds of every trace column."""
    per_seed = [r.columns() for r in runs]
    out = {"round": per_seed[0]["round"]}
    n = len(per_seed)
    for name in per_seed[0]:
        if name == "round":
            continue
        stack = np.vstack([c[name] for c in per_seed])
        out[f"{name}_mean"] = stack.mean(axis=0)
        se = stack.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(stack.shape[1])
        out[f"{name}_se"] = se
    return out


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list
    aggregate: dict
    paths: list = field(default_factory=list)


def trace_path(out_dir, seed: int, partial: bool = False) -> str:
    return os.path.join(out_dir, f"trace_seed{seed}{'.partial' if partial else ''}.csv")


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run every seed, then write one trace per seed plus ``aggregate.csv``."""
    problem = build_problem(cfg)
    if write:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "config.txt"), "w", encoding="utf-8") as fh:
            fh.write(config_mod.serialize(cfg))
    runs, paths = [], []
    for seed in cfg.seeds:
        try:
            run = run_seed(problem, seed)
        except RunAborted as err:
            partial = getattr(err, "partial", None)
            if write and partial is not None and len(partial.trace):
                err.path = trace_path(cfg.out, seed, partial=True)
                write_columns(err.path, partial.columns())
            raise
        runs.append(run)
        log.info("seed %d: REG_T = %.6g", seed, run.trace.average[-1])
        if write:
            paths.append(trace_path(cfg.out, seed))
            write_columns(paths[-1], run.columns())
    agg = aggregate(runs)
    if write:
        paths.append(os.path.join(cfg.out, "aggregate.csv"))
        write_columns(paths[-1], agg)
    return ExperimentResult(cfg, runs, agg, paths)
