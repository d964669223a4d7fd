"""Covariance-adaptive best-arm identification with joint queries."""

from . import baselines, bench, complexity, concentration, convex_bai, core, environments, pairwise_bai
from .concentration import ConfidenceSchedule, make_schedule
from .core import BanditInstance, RunResult, best_arm, gaps, load_instance, save_instance
from .stats import PairStats

__all__ = [
    "BanditInstance", "ConfidenceSchedule", "PairStats", "RunResult",
    "baselines", "bench", "best_arm", "complexity", "concentration",
    "convex_bai", "core", "environments", "gaps", "load_instance",
    "make_schedule", "pairwise_bai", "save_instance",
]

__version__ = "0.1.0"
