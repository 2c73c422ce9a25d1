"""Core knowledge-capital model.

Three coupled linear capital stocks (human H, structural S, relational R)
with continuous growth/decay and Poisson-arriving downward shocks. Four
mitigation levers modulate the effective rates: they boost growth and
coupling terms and cushion shock magnitudes. Between shocks the system is
linear, so the jump-free flow has an exact closed form.

All types are immutable values and all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

STATE_MAX = 100.0

# Threshold for switching to the resonant (t * e^{-dt}) branch of the
# structural-capital solution when the S decay rate nearly equals the H
# decay rate; avoids catastrophic cancellation in the generic branch.
RESONANCE_EPS = 1e-9


class InvalidParamsError(ValueError):
    """Raised when a parameter set violates a model invariant."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidParamsError(msg)


def _finite(*xs: float) -> bool:
    return all(math.isfinite(x) for x in xs)


@dataclass(frozen=True)
class CapitalState:
    """Capital scores (h, s, r) at an instant, each in [0, STATE_MAX]."""

    h: float
    s: float
    r: float

    def __post_init__(self) -> None:
        _require(_finite(self.h, self.s, self.r), "capital scores must be finite")
        for name, v in (("h", self.h), ("s", self.s), ("r", self.r)):
            _require(0.0 <= v <= STATE_MAX, f"{name}={v} outside [0, {STATE_MAX}]")


@dataclass(frozen=True)
class LeverVector:
    """Activation levels of the four mitigation levers, each in [0, 1]."""

    lambda_p: float = 0.0   # people / expertise lever
    lambda_m: float = 0.0   # organizational-memory lever
    lambda_pr: float = 0.0  # process lever
    lambda_r: float = 0.0   # ecosystem / relational lever

    def __post_init__(self) -> None:
        for name, v in (("lambda_p", self.lambda_p), ("lambda_m", self.lambda_m),
                        ("lambda_pr", self.lambda_pr), ("lambda_r", self.lambda_r)):
            _require(_finite(v) and 0.0 <= v <= 1.0, f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class Weights:
    """Composite-index weights; nonnegative and summing to 1."""

    w_h: float = 0.40
    w_s: float = 0.35
    w_r: float = 0.25

    def __post_init__(self) -> None:
        _require(_finite(self.w_h, self.w_s, self.w_r), "weights must be finite")
        _require(min(self.w_h, self.w_s, self.w_r) >= 0.0, "weights must be >= 0")
        _require(abs(self.w_h + self.w_s + self.w_r - 1.0) <= 1e-12,
                 "weights must sum to 1")


@dataclass(frozen=True)
class LeverGains:
    """Dimensionless gains mapping lever activation to rate modulation.

    g_* scale growth boosts (and the process lever's decay reduction);
    c_* scale shock cushioning. Effective rates are kept valid at full
    activation by rejecting c_* > 1 and g_pr > 1 up front; g_pr == 1 at
    lambda_pr == 1 is additionally rejected by effective_params because
    it would zero the structural decay rate.
    """

    g_p: float = 1.0
    g_m: float = 1.0
    c_m: float = 1.0
    g_pr: float = 1.0
    c_pr: float = 1.0
    g_r: float = 1.0
    c_r: float = 1.0

    def __post_init__(self) -> None:
        for name, v in (("g_p", self.g_p), ("g_m", self.g_m), ("c_m", self.c_m),
                        ("g_pr", self.g_pr), ("c_pr", self.c_pr),
                        ("g_r", self.g_r), ("c_r", self.c_r)):
            _require(_finite(v) and v >= 0.0, f"{name}={v} must be >= 0")
        for name, v in (("c_m", self.c_m), ("c_pr", self.c_pr), ("c_r", self.c_r),
                        ("g_pr", self.g_pr)):
            _require(v <= 1.0, f"{name}={v} must be <= 1")


@dataclass(frozen=True)
class ModelParams:
    """Base (un-modulated) model parameters.

    Rates are per year, shock magnitudes in capital-score units.
    """

    alpha_h: float   # human growth rate
    delta_h: float   # human decay rate
    beta: float      # human-to-structural codification coupling
    gamma_s: float   # structural decay rate
    alpha_r: float   # relational growth rate
    delta_r: float   # relational decay rate
    nu_h: float      # shock intensity on H (events/year)
    nu_s: float      # shock intensity on S
    nu_r: float      # shock intensity on R
    j_h: float       # shock magnitude on H
    j_s: float       # shock magnitude on S
    j_r: float       # shock magnitude on R
    gains: LeverGains = field(default_factory=LeverGains)
    init: CapitalState = field(default_factory=lambda: CapitalState(50.0, 50.0, 50.0))
    weights: Weights = field(default_factory=Weights)

    def __post_init__(self) -> None:
        for name, v in (("alpha_h", self.alpha_h), ("beta", self.beta),
                        ("alpha_r", self.alpha_r),
                        ("nu_h", self.nu_h), ("nu_s", self.nu_s), ("nu_r", self.nu_r),
                        ("j_h", self.j_h), ("j_s", self.j_s), ("j_r", self.j_r)):
            _require(_finite(v) and v >= 0.0, f"{name}={v} must be >= 0")
        for name, v in (("delta_h", self.delta_h), ("gamma_s", self.gamma_s),
                        ("delta_r", self.delta_r)):
            _require(_finite(v) and v > 0.0, f"{name}={v} must be > 0")


@dataclass(frozen=True)
class EffectiveParams:
    """Rates and magnitudes after lever modulation; no gains, no levers."""

    alpha_h: float
    delta_h: float
    beta: float
    gamma_s: float
    alpha_r: float
    delta_r: float
    nu_h: float
    nu_s: float
    nu_r: float
    j_h: float
    j_s: float
    j_r: float

    def __post_init__(self) -> None:
        for name, v in (("alpha_h", self.alpha_h), ("beta", self.beta),
                        ("alpha_r", self.alpha_r),
                        ("nu_h", self.nu_h), ("nu_s", self.nu_s), ("nu_r", self.nu_r),
                        ("j_h", self.j_h), ("j_s", self.j_s), ("j_r", self.j_r)):
            _require(_finite(v) and v >= 0.0, f"{name}={v} must be >= 0")
        for name, v in (("delta_h", self.delta_h), ("gamma_s", self.gamma_s),
                        ("delta_r", self.delta_r)):
            _require(_finite(v) and v > 0.0, f"{name}={v} must be > 0")


def composite_index(state: CapitalState, weights: Weights) -> float:
    """Weighted composite knowledge score K = w_h*h + w_s*s + w_r*r."""
    return weights.w_h * state.h + weights.w_s * state.s + weights.w_r * state.r


def effective_params(params: ModelParams, levers: LeverVector) -> EffectiveParams:
    """Apply lever modulation to the base rates.

    Each lever boosts one growth/coupling channel and/or cushions one
    shock magnitude:

    - lambda_p  boosts alpha_h
    - lambda_m  boosts beta and cushions j_h
    - lambda_pr reduces gamma_s and cushions j_s
    - lambda_r  boosts alpha_r and cushions j_r

    Intensities (nu_*) and the pure decay rates delta_h, delta_r pass
    through unchanged: levers soften losses, they do not prevent events.

    Raises InvalidParamsError if any effective decay would be <= 0 or any
    effective magnitude < 0.
    """
    g = params.gains
    eff = dict(
        alpha_h=params.alpha_h * (1.0 + g.g_p * levers.lambda_p),
        delta_h=params.delta_h,
        beta=params.beta * (1.0 + g.g_m * levers.lambda_m),
        gamma_s=params.gamma_s * (1.0 - g.g_pr * levers.lambda_pr),
        alpha_r=params.alpha_r * (1.0 + g.g_r * levers.lambda_r),
        delta_r=params.delta_r,
        nu_h=params.nu_h,
        nu_s=params.nu_s,
        nu_r=params.nu_r,
        j_h=params.j_h * (1.0 - g.c_m * levers.lambda_m),
        j_s=params.j_s * (1.0 - g.c_pr * levers.lambda_pr),
        j_r=params.j_r * (1.0 - g.c_r * levers.lambda_r),
    )
    _require(eff["gamma_s"] > 0.0, "effective gamma_s must stay > 0")
    _require(min(eff["j_h"], eff["j_s"], eff["j_r"]) >= 0.0,
             "effective shock magnitudes must stay >= 0")
    return EffectiveParams(**eff)


def _clamp(x: float) -> float:
    return min(max(x, 0.0), STATE_MAX)


def flow_raw(h: float, s: float, r: float, eff: EffectiveParams,
             dt: float) -> tuple[float, float, float]:
    """Exact jump-free flow on raw floats; result clamped to [0, STATE_MAX].

    This is the single canonical arithmetic sequence; the compiled engine
    kernel mirrors it operation-for-operation so that paths are
    bit-identical between the reference and fast implementations.
    """
    if dt == 0.0:
        return h, s, r
    h_inf = eff.alpha_h / eff.delta_h
    r_inf = eff.alpha_r / eff.delta_r
    eh = math.exp(-eff.delta_h * dt)
    er = math.exp(-eff.delta_r * dt)
    h1 = h_inf + (h - h_inf) * eh
    r1 = r_inf + (r - r_inf) * er
    s_inf = eff.beta * h_inf / eff.gamma_s
    c = h - h_inf
    eg = math.exp(-eff.gamma_s * dt)
    if abs(eff.gamma_s - eff.delta_h) < RESONANCE_EPS:
        # resonant branch: forcing decays at the same rate as S itself
        s1 = s_inf + (s - s_inf) * eg + eff.beta * c * dt * eg
    else:
        b = eff.beta * c / (eff.gamma_s - eff.delta_h)
        s1 = s_inf + (s - s_inf - b) * eg + b * eh
    return _clamp(h1), _clamp(s1), _clamp(r1)


def flow(state: CapitalState, eff: EffectiveParams, dt: float) -> CapitalState:
    """Advance the jump-free linear dynamics exactly by dt >= 0 years."""
    if dt < 0.0:
        raise ValueError("dt must be >= 0")
    h, s, r = flow_raw(state.h, state.s, state.r, eff, dt)
    return CapitalState(h, s, r)
