"""Derivative-free calibration of the reference parameter set.

The published statistics (six scenarios x mean / CV / crisis) come with no
base parameters, so the reference set shipped in params/reference.json is
derived here by fitting simulated scenario statistics to those targets.
Every objective evaluation reuses the same master seed (common random
numbers), which turns the noisy Monte Carlo fit into a deterministic
optimization problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .engine import CANONICAL_LEVERS, K_STAR, RunConfig, ScenarioSpec, run_ensemble
from .metrics import TerminalStats, terminal_stats
from .moments import moment_stats
from .model import (CapitalState, InvalidParamsError, LeverGains, ModelParams,
                    Weights)

#: Free parameters searched by calibrate(), in vector order.
FREE_PARAMS = ("alpha_h", "delta_h", "beta", "gamma_s", "alpha_r", "delta_r",
               "nu_h", "nu_s", "nu_r", "j_h", "j_s", "j_r", "h0", "s0", "r0")

#: Lever gains appended to the vector when gains are freed.
GAIN_PARAMS = ("g_p", "g_m", "c_m", "g_pr", "c_pr", "g_r", "c_r")

#: Keeps steady states and shock excursions on the 0-100 score scale.
DEFAULT_BOUNDS: dict[str, tuple[float, float]] = {
    "alpha_h": (0.1, 50.0), "alpha_r": (0.1, 50.0),
    "delta_h": (0.01, 1.0), "delta_r": (0.01, 1.0), "gamma_s": (0.01, 1.0),
    "beta": (0.001, 1.0),
    "nu_h": (0.05, 5.0), "nu_s": (0.05, 5.0), "nu_r": (0.05, 5.0),
    "j_h": (1.0, 40.0), "j_s": (1.0, 40.0), "j_r": (1.0, 40.0),
    "h0": (30.0, 90.0), "s0": (30.0, 90.0), "r0": (30.0, 90.0),
}

DEFAULT_GAIN_BOUNDS: dict[str, tuple[float, float]] = {
    "g_p": (0.0, 4.0), "g_m": (0.0, 4.0), "c_m": (0.0, 1.0),
    "g_pr": (0.0, 0.99), "c_pr": (0.0, 1.0), "g_r": (0.0, 4.0),
    "c_r": (0.0, 1.0),
}

#: Loss returned for parameter vectors the model rejects (bounded penalty,
#: never an infinity, so simplex arithmetic stays finite).
PENALTY_LOSS = 1e9


@dataclass(frozen=True)
class CalibrationTargets:
    """Per-scenario (mean_K, cv_pct, crisis_pct) targets, six canonical rows."""

    scenarios: dict[str, tuple[float, float, float]]
    k_star: float = K_STAR

    def __post_init__(self) -> None:
        missing = set(CANONICAL_LEVERS) - set(self.scenarios)
        if missing:
            raise ValueError(f"targets missing scenarios: {sorted(missing)}")
        for name, (mean, cv, crisis) in self.scenarios.items():
            if not mean > 0.0:
                raise ValueError(f"{name}: target mean must be > 0")
            if cv < 0.0 or crisis < 0.0:
                raise ValueError(f"{name}: cv/crisis must be >= 0")


@dataclass(frozen=True)
class ParamBounds:
    """Box bounds over the free parameters (and gains when freed)."""

    bounds: dict[str, tuple[float, float]]

    def __post_init__(self) -> None:
        for name, (lo, hi) in self.bounds.items():
            if not lo < hi:
                raise ValueError(f"{name}: lower bound must be < upper")

    @classmethod
    def default(cls, free_gains: bool = False) -> "ParamBounds":
        b = dict(DEFAULT_BOUNDS)
        if free_gains:
            b.update(DEFAULT_GAIN_BOUNDS)
        return cls(b)

    def arrays(self, names: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([self.bounds[n][0] for n in names])
        hi = np.array([self.bounds[n][1] for n in names])
        return lo, hi


@dataclass(frozen=True)
class EvalConfig:
    """Simulation settings used for every objective evaluation (CRN)."""

    n_paths: int = 2000
    horizon: float = 10.0
    master_seed: int = 0
    k_star: float = K_STAR

    def run_config(self) -> RunConfig:
        # Terminal-only recording: the loss uses terminal statistics, and
        # those are independent of intermediate grid observations.
        return RunConfig(n_paths=self.n_paths, horizon=self.horizon,
                         record_dt=self.horizon, master_seed=self.master_seed)


def vector_to_params(x: np.ndarray, base: ModelParams,
                     free_gains: bool = False) -> ModelParams:
    """Assemble a ModelParams from a search vector (gains from base unless freed)."""
    v = dict(zip(FREE_PARAMS, (float(xi) for xi in x[:len(FREE_PARAMS)])))
    gains = base.gains
    if free_gains:
        gv = dict(zip(GAIN_PARAMS,
                      (float(xi) for xi in x[len(FREE_PARAMS):])))
        gains = LeverGains(**gv)
    return ModelParams(
        alpha_h=v["alpha_h"], delta_h=v["delta_h"], beta=v["beta"],
        gamma_s=v["gamma_s"], alpha_r=v["alpha_r"], delta_r=v["delta_r"],
        nu_h=v["nu_h"], nu_s=v["nu_s"], nu_r=v["nu_r"],
        j_h=v["j_h"], j_s=v["j_s"], j_r=v["j_r"],
        gains=gains,
        init=CapitalState(v["h0"], v["s0"], v["r0"]),
        weights=base.weights)


def params_to_vector(params: ModelParams, free_gains: bool = False) -> np.ndarray:
    vals = [getattr(params, f) for f in FREE_PARAMS[:12]]
    vals += [params.init.h, params.init.s, params.init.r]
    if free_gains:
        vals += [getattr(params.gains, g) for g in GAIN_PARAMS]
    return np.array(vals)


def scenario_stats(params: ModelParams,
                   eval_config: EvalConfig) -> dict[str, TerminalStats]:
    """Terminal stats for all six canonical scenarios under one master seed."""
    cfg = eval_config.run_config()
    out = {}
    for name, levers in CANONICAL_LEVERS.items():
        res = run_ensemble(ScenarioSpec(name, levers, cfg), params)
        out[name] = terminal_stats(res, eval_config.k_star)
    return out


def loss_from_stats(stats: dict[str, TerminalStats],
                    targets: CalibrationTargets) -> float:
    """Sum over scenarios of squared (relative mean, cv/10pp, crisis pp) errors."""
    loss = 0.0
    for name, (t_mean, t_cv, t_crisis) in targets.scenarios.items():
        st = stats[name]
        loss += ((st.mean - t_mean) / t_mean) ** 2
        loss += ((100.0 * st.cv - t_cv) / 10.0) ** 2
        loss += (100.0 * st.crisis_prob - t_crisis) ** 2
    return loss


def objective(params: ModelParams, targets: CalibrationTargets,
              eval_config: EvalConfig) -> float:
    """Deterministic calibration loss (common random numbers across calls)."""
    try:
        stats = scenario_stats(params, eval_config)
    except InvalidParamsError:
        return PENALTY_LOSS
    return loss_from_stats(stats, targets)


def initial_guess(targets: CalibrationTargets,
                  bounds: ParamBounds,
                  base: ModelParams,
                  free_gains: bool = False,
                  seed: int = 0,
                  horizon: float = 10.0) -> np.ndarray:
    """Seed vector from a global search on the closed-form moment surrogate.

    Surrogate evaluations cost a couple of matrix exponentials instead of a
    full ensemble, so a population search is affordable here; the returned
    point only initializes the simulation-based fit and consumes none of
    its evaluation budget. A penalty keeps scenario mean states away from
    the clamping region where the surrogate loses validity.
    """
    names = FREE_PARAMS + (GAIN_PARAMS if free_gains else ())
    lo, hi = bounds.arrays(names)

    def surrogate(x: np.ndarray) -> float:
        try:
            params = vector_to_params(x, base, free_gains)
        except InvalidParamsError:
            return PENALTY_LOSS
        loss = 0.0
        for name, levers in CANONICAL_LEVERS.items():
            try:
                st, m = moment_stats(params, levers, horizon, targets.k_star)
            except InvalidParamsError:
                return PENALTY_LOSS
            t_mean, t_cv, t_crisis = targets.scenarios[name]
            loss += ((st.mean - t_mean) / t_mean) ** 2
            loss += ((100.0 * st.cv - t_cv) / 10.0) ** 2
            loss += (100.0 * st.crisis_prob - t_crisis) ** 2
            loss += float(np.sum(np.maximum(m - 93.0, 0.0) ** 2)
                          + np.sum(np.maximum(7.0 - m, 0.0) ** 2))
        return loss

    result = scipy.optimize.differential_evolution(
        surrogate, bounds=list(zip(lo, hi)), seed=seed, maxiter=80,
        popsize=10, tol=1e-8, polish=False)
    return np.clip(result.x, lo, hi)


@dataclass
class CalibrationResult:
    params: ModelParams
    loss: float
    n_evals: int
    budget_exhausted: bool
    history: list[tuple[int, float, float]] = field(default_factory=list)


class _StopSearch(Exception):
    pass


def calibrate(targets: CalibrationTargets,
              bounds: ParamBounds | None = None,
              budget: int = 5000,
              seed: int = 0,
              eval_config: EvalConfig | None = None,
              x0: np.ndarray | None = None,
              free_gains: bool = False,
              loss_tol: float = 0.0,
              base: ModelParams | None = None) -> CalibrationResult:
    """Box-bounded derivative-free search over the free parameters.

    Strategy: start from x0 if given, otherwise from a global search on
    the closed-form moment surrogate (see initial_guess; costs no budget),
    then evaluate a seeded scatter of random in-bounds points, then polish
    the best with adaptive Nelder-Mead. budget counts simulation-based
    objective evaluations only.
    Deterministic given (targets, bounds, budget, seed, eval_config).
    Never errors on budget exhaustion: returns best-so-far with
    budget_exhausted set.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if bounds is None:
        bounds = ParamBounds.default(free_gains)
    if eval_config is None:
        eval_config = EvalConfig(master_seed=seed)
    if base is None:
        base = ModelParams(alpha_h=1, delta_h=0.1, beta=0.1, gamma_s=0.1,
                           alpha_r=1, delta_r=0.1, nu_h=0.1, nu_s=0.1,
                           nu_r=0.1, j_h=1, j_s=1, j_r=1)
    names = FREE_PARAMS + (GAIN_PARAMS if free_gains else ())
    lo, hi = bounds.arrays(names)

    history: list[tuple[int, float, float]] = []
    state = {"n": 0, "best_x": None, "best_loss": np.inf}

    def evaluate(x: np.ndarray) -> float:
        if state["n"] >= budget:
            raise _StopSearch()
        x = np.clip(x, lo, hi)
        try:
            params = vector_to_params(x, base, free_gains)
            loss = objective(params, targets, eval_config)
        except InvalidParamsError:
            loss = PENALTY_LOSS
        state["n"] += 1
        if loss < state["best_loss"]:
            state["best_loss"] = loss
            state["best_x"] = x.copy()
        history.append((state["n"], loss, state["best_loss"]))
        if loss <= loss_tol:
            raise _StopSearch()
        return loss

    if x0 is not None:
        start = np.clip(np.asarray(x0, dtype=float), lo, hi)
    else:
        start = initial_guess(targets, bounds, base, free_gains, seed,
                              eval_config.horizon)
    rng = np.random.default_rng(seed)
    try:
        evaluate(start)
        n_scatter = min(40, budget // 10)
        for _ in range(n_scatter):
            evaluate(lo + rng.random(len(names)) * (hi - lo))
        # restarted Nelder-Mead: a fresh simplex at the incumbent escapes
        # the degenerate simplexes NM tends to collapse into in 15+ dims
        while True:
            remaining = budget - state["n"]
            if remaining <= 1:
                break
            scipy.optimize.minimize(
                evaluate, state["best_x"], method="Nelder-Mead",
                bounds=list(zip(lo, hi)),
                options={"maxfev": min(remaining, 600), "adaptive": True,
                         "xatol": 1e-4, "fatol": 1e-6})
            if budget - state["n"] >= remaining:
                break
    except _StopSearch:
        pass

    best_x = state["best_x"]
    return CalibrationResult(
        params=vector_to_params(best_x, base, free_gains),
        loss=float(state["best_loss"]),
        n_evals=state["n"],
        budget_exhausted=state["n"] >= budget,
        history=history)
