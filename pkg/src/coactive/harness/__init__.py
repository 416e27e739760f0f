from .config import ConfigError, ExperimentConfig
from .data import RatingsTriple, parse_ratings, parse_svmlight_ranking
from .fitting import factorize_ratings, fit_least_squares
from .runner import RunAborted, run_experiment

__all__ = [
    "ConfigError", "ExperimentConfig", "RatingsTriple", "parse_ratings",
    "parse_svmlight_ranking", "factorize_ratings", "fit_least_squares", "RunAborted",
    "run_experiment",
]
