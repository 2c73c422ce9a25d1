"""Event-driven exact simulation of capital paths and reproducible ensembles.

Between shocks the dynamics are linear, so paths are advanced with the
exact closed-form flow rather than a discretized integrator: the only
state updates happen at shock events, and grid recordings are pure
observations (flow from the last event, state untouched). Path i of an
ensemble draws from an independent stream derived from
(master_seed, i) -- see rng.py -- which makes results independent of
worker count and completion order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .model import (CapitalState, EffectiveParams, LeverVector, ModelParams,
                    Weights, composite_index, effective_params, flow_raw)
from .rng import SplitMix64

K_STAR = 40.0

COMPONENTS = ("h", "s", "r")

#: Canonical lever settings for the six named scenarios, in report order.
CANONICAL_LEVERS: dict[str, LeverVector] = {
    "baseline": LeverVector(0.0, 0.0, 0.0, 0.0),
    "dev_expertise": LeverVector(0.6, 0.0, 0.0, 0.0),
    "org_memory": LeverVector(0.0, 0.6, 0.0, 0.0),
    "process": LeverVector(0.0, 0.0, 0.5, 0.0),
    "ecosystem": LeverVector(0.0, 0.0, 0.0, 0.5),
    "full_klrm": LeverVector(0.6, 0.6, 0.5, 0.5),
}


@dataclass(frozen=True)
class RunConfig:
    """Ensemble run configuration."""

    n_paths: int = 5000
    horizon: float = 10.0
    record_dt: float = 0.1
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not self.horizon > 0.0:
            raise ValueError("horizon must be > 0")
        if not 0.0 < self.record_dt <= self.horizon:
            raise ValueError("record_dt must be in (0, horizon]")

    def grid_times(self) -> np.ndarray:
        """Uniform recording grid 0 = t_0 < ... < t_m = horizon."""
        n = max(1, round(self.horizon / self.record_dt))
        return np.linspace(0.0, self.horizon, n + 1)


@dataclass(frozen=True)
class ScenarioSpec:
    """A named lever setting plus its run configuration."""

    name: str
    levers: LeverVector
    run: RunConfig

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("scenario name must be nonempty")


@dataclass
class PathRecord:
    """One simulated path: grid K values, terminal state, shock log."""

    grid: np.ndarray
    k_series: np.ndarray
    terminal_state: CapitalState
    shock_log: list[tuple[float, str, float]]


@dataclass
class EnsembleResult:
    """Aggregated ensemble output for one scenario."""

    scenario: str
    config: RunConfig
    grid: np.ndarray
    terminal_k: np.ndarray
    terminal_h: np.ndarray
    terminal_s: np.ndarray
    terminal_r: np.ndarray
    min_k: np.ndarray          # per-path minimum of k_series over the grid
    mean_k_series: np.ndarray
    p05_series: np.ndarray
    p95_series: np.ndarray
    crisis_curve: np.ndarray   # per-grid-time fraction of paths with K < K_STAR


def sample_next_shock(rates: tuple[float, float, float],
                      rng: SplitMix64) -> tuple[str, float] | None:
    """Sample the next shock from superposed Poisson processes.

    Returns (component, wait_time) with wait_time ~ Exponential(sum of
    rates) and the component chosen with probability rate_i / total, or
    None when all rates are zero. Draw order (wait first, then component)
    is fixed: it is part of the reproducibility contract.
    """
    nh, ns, nr = rates
    if min(nh, ns, nr) < 0.0:
        raise ValueError("rates must be >= 0")
    total = nh + ns + nr
    if total <= 0.0:
        return None
    wait = rng.exponential(total)
    x = rng.uniform() * total
    if x < nh:
        comp = "h"
    elif x < nh + ns:
        comp = "s"
    else:
        comp = "r"
    return comp, wait


def apply_shock(state: CapitalState, component: str, magnitude: float) -> CapitalState:
    """Subtract magnitude from one component, clamping at zero."""
    if magnitude < 0.0:
        raise ValueError("magnitude must be >= 0")
    if component == "h":
        return CapitalState(max(state.h - magnitude, 0.0), state.s, state.r)
    if component == "s":
        return CapitalState(state.h, max(state.s - magnitude, 0.0), state.r)
    if component == "r":
        return CapitalState(state.h, state.s, max(state.r - magnitude, 0.0))
    raise ValueError(f"unknown component {component!r}")


def simulate_path(eff: EffectiveParams, init: CapitalState, weights: Weights,
                  config: RunConfig, rng: SplitMix64) -> PathRecord:
    """Reference (pure-Python) single-path simulation.

    Alternates the exact jump-free flow with sampled shock events; K is
    recorded at every grid time by flowing to it exactly (observation
    only, never interpolation and never a state update). Bit-identical to
    the compiled kernel used by run_ensemble.
    """
    grid = config.grid_times()
    rates = (eff.nu_h, eff.nu_s, eff.nu_r)
    mags = {"h": eff.j_h, "s": eff.j_s, "r": eff.j_r}
    t = 0.0
    h, s, r = init.h, init.s, init.r
    nxt = sample_next_shock(rates, rng)
    if nxt is None:
        comp, t_ev = "", np.inf
    else:
        comp, wait = nxt
        t_ev = wait
    shock_log: list[tuple[float, str, float]] = []
    k_series = np.empty(len(grid))
    th, ts, tr = h, s, r
    for k, tg in enumerate(grid):
        while t_ev <= tg:
            h, s, r = flow_raw(h, s, r, eff, t_ev - t)
            t = t_ev
            mag = mags[comp]
            if comp == "h":
                h = max(h - mag, 0.0)
            elif comp == "s":
                s = max(s - mag, 0.0)
            else:
                r = max(r - mag, 0.0)
            shock_log.append((t, comp, mag))
            comp, wait = sample_next_shock(rates, rng)  # type: ignore[misc]
            t_ev = t + wait
        th, ts, tr = flow_raw(h, s, r, eff, tg - t)
        k_series[k] = weights.w_h * th + weights.w_s * ts + weights.w_r * tr
    return PathRecord(grid=grid, k_series=k_series,
                      terminal_state=CapitalState(th, ts, tr),
                      shock_log=shock_log)


def _configure_threads() -> None:
    """Apply the optional KLEVER_THREADS cap (affects speed, never results)."""
    raw = os.environ.get("KLEVER_THREADS")
    if not raw:
        return
    import numba

    n = max(1, int(raw))
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def run_ensemble(scenario: ScenarioSpec, params: ModelParams) -> EnsembleResult:
    """Run the full ensemble for one scenario.

    Path i uses the stream derived from (master_seed, i); aggregation is
    over fully materialized per-path arrays in index order, so the result
    is a pure function of (scenario, params, master_seed).
    """
    eff = effective_params(params, scenario.levers)
    cfg = scenario.run
    _configure_threads()
    grid = cfg.grid_times()
    seed = np.uint64(cfg.master_seed & ((1 << 64) - 1))
    k_mat, term_h, term_s, term_r, min_k = _kernel.ensemble_kernel(
        eff.alpha_h, eff.delta_h, eff.beta, eff.gamma_s, eff.alpha_r, eff.delta_r,
        eff.nu_h, eff.nu_s, eff.nu_r, eff.j_h, eff.j_s, eff.j_r,
        params.init.h, params.init.s, params.init.r,
        params.weights.w_h, params.weights.w_s, params.weights.w_r,
        grid, seed, cfg.n_paths)
    return EnsembleResult(
        scenario=scenario.name,
        config=cfg,
        grid=grid,
        terminal_k=k_mat[:, -1].copy(),
        terminal_h=term_h,
        terminal_s=term_s,
        terminal_r=term_r,
        min_k=min_k,
        mean_k_series=k_mat.mean(axis=0),
        p05_series=np.percentile(k_mat, 5.0, axis=0),
        p95_series=np.percentile(k_mat, 95.0, axis=0),
        crisis_curve=(k_mat < K_STAR).mean(axis=0),
    )


def sample_paths(params: ModelParams, levers: LeverVector, config: RunConfig,
                 n: int) -> list[PathRecord]:
    """First n paths of the ensemble (identical streams), with shock logs."""
    eff = effective_params(params, levers)
    return [simulate_path(eff, params.init, params.weights, config,
                          SplitMix64.for_path(config.master_seed, i))
            for i in range(n)]
