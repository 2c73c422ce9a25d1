"""Terminal-distribution statistics and cross-scenario comparisons."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import K_STAR, EnsembleResult


@dataclass(frozen=True)
class TerminalStats:
    """Headline statistics of the terminal K distribution.

    sharpe is None (reported as "n/a", serialized as null) when sd == 0;
    it is never emitted as an infinity.
    """

    mean: float
    sd: float
    cv: float
    sharpe: float | None
    crisis_prob: float


def terminal_stats(ensemble: EnsembleResult, k_star: float = K_STAR) -> TerminalStats:
    """Mean, sample sd (n-1), CV, Sharpe, and strict-< crisis fraction."""
    tk = ensemble.terminal_k
    if tk.size < 2:
        raise ValueError("terminal_stats needs at least 2 paths")
    mean = float(np.mean(tk))
    sd = float(np.std(tk, ddof=1))
    if sd > 0.0:
        cv = sd / mean
        sharpe = mean / sd
    else:
        cv = 0.0
        sharpe = None
    crisis = float(np.mean(tk < k_star))
    return TerminalStats(mean=mean, sd=sd, cv=cv, sharpe=sharpe, crisis_prob=crisis)


def improvement(candidate: float, baseline: float) -> float:
    """Percent change of candidate relative to baseline."""
    if baseline == 0.0:
        raise ValueError("baseline must be nonzero")
    return 100.0 * (candidate - baseline) / baseline


def cv_reduction(candidate_cv: float, baseline_cv: float) -> float:
    """Percent reduction of the coefficient of variation vs baseline."""
    if baseline_cv <= 0.0:
        raise ValueError("baseline_cv must be > 0")
    return 100.0 * (baseline_cv - candidate_cv) / baseline_cv


def histogram(terminal_k: np.ndarray, bin_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width histogram over [min, max]; counts sum to len(terminal_k).

    Returns (counts, bin_edges) with len(edges) == bin_count + 1.
    """
    values = np.asarray(terminal_k, dtype=float)
    if values.size == 0:
        raise ValueError("histogram needs nonempty values")
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    counts, edges = np.histogram(values, bins=bin_count)
    return counts, edges


def first_passage_prob(ensemble: EnsembleResult, k_star: float = K_STAR) -> float:
    """Fraction of paths whose recorded k_series ever drops below k_star.

    Companion metric to the terminal crisis probability; since the grid
    minimum is <= the terminal value, this always dominates it.
    """
    return float(np.mean(ensemble.min_k < k_star))
