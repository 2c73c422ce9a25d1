"""Closed-form moment approximation of the jump-linear dynamics.

Between clamps the state follows x' = A x + b plus compensated Poisson
jumps, so the exact first two moments of the unclamped process are

    mean:        m' = A m + b,    b including the drift -nu_i * j_i
    covariance:  V' = A V + V A' + Q,   Q = diag(nu_i * j_i^2)

both solvable with matrix exponentials (the covariance integral via the
Van Loan block-matrix trick). The crisis probability uses a normal
approximation on the terminal composite. None of this sees the [0, 100]
clamp, so the approximation is only trusted well inside the box; the
calibration initializer adds a penalty when scenario means drift toward
the edges. Used to seed the simulation-based fit, never to report results.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm
from scipy.stats import norm

from .engine import K_STAR
from .metrics import TerminalStats
from .model import LeverVector, ModelParams, effective_params


def moment_stats(params: ModelParams, levers: LeverVector,
                 horizon: float = 10.0,
                 k_star: float = K_STAR) -> tuple[TerminalStats, np.ndarray]:
    """Approximate terminal stats and the terminal mean state vector."""
    eff = effective_params(params, levers)
    A = np.array([[-eff.delta_h, 0.0, 0.0],
                  [eff.beta, -eff.gamma_s, 0.0],
                  [0.0, 0.0, -eff.delta_r]])
    b = np.array([eff.alpha_h - eff.nu_h * eff.j_h,
                  -eff.nu_s * eff.j_s,
                  eff.alpha_r - eff.nu_r * eff.j_r])
    Q = np.diag([eff.nu_h * eff.j_h ** 2,
                 eff.nu_s * eff.j_s ** 2,
                 eff.nu_r * eff.j_r ** 2])

    M4 = np.zeros((4, 4))
    M4[:3, :3] = A
    M4[:3, 3] = b
    E4 = expm(M4 * horizon)
    x0 = np.array([params.init.h, params.init.s, params.init.r])
    m = E4[:3, :3] @ x0 + E4[:3, 3]

    M6 = np.zeros((6, 6))
    M6[:3, :3] = -A
    M6[:3, 3:] = Q
    M6[3:, 3:] = A.T
    E6 = expm(M6 * horizon)
    phi = E6[3:, 3:].T
    V = phi @ E6[:3, 3:]

    w = np.array([params.weights.w_h, params.weights.w_s, params.weights.w_r])
    mean_k = float(w @ m)
    var_k = float(w @ V @ w)
    sd_k = float(np.sqrt(max(var_k, 0.0)))
    cv = sd_k / mean_k if mean_k > 0 else np.inf
    sharpe = mean_k / sd_k if sd_k > 0 else None
    crisis = float(norm.cdf((k_star - mean_k) / max(sd_k, 1e-9)))
    return TerminalStats(mean=mean_k, sd=sd_k, cv=cv, sharpe=sharpe,
                         crisis_prob=crisis), m
