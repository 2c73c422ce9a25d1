"""Numba-compiled event-driven path kernel.

Mirrors model.flow_raw and rng.SplitMix64 operation-for-operation so that
kernel paths are bit-identical to the pure-Python reference in engine.py.
State advances only at shock events; grid values are observations computed
by flowing from the last event without mutating the path state.
"""

import numpy as np
from numba import njit, prange

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_C1 = U64(0xBF58476D1CE4E5B9)
_C2 = U64(0x94D049BB133111EB)
_INV_2_53 = 2.0 ** -53
_RESONANCE_EPS = 1e-9
_STATE_MAX = 100.0


@njit(cache=True)
def _mix64(z):
    z ^= z >> U64(30)
    z *= _C1
    z ^= z >> U64(27)
    z *= _C2
    z ^= z >> U64(31)
    return z


@njit(cache=True)
def _stream_state(master_seed, path_index):
    return _mix64(master_seed ^ _mix64((path_index + U64(1)) * _GOLDEN))


@njit(cache=True)
def _next_uniform(z):
    z = z + _GOLDEN
    x = _mix64(z)
    return z, (x >> U64(11)) * _INV_2_53


@njit(cache=True)
def _flow(h, s, r, ah, dh, be, gs, ar, dr, dt):
    if dt == 0.0:
        return h, s, r
    h_inf = ah / dh
    r_inf = ar / dr
    eh = np.exp(-dh * dt)
    er = np.exp(-dr * dt)
    h1 = h_inf + (h - h_inf) * eh
    r1 = r_inf + (r - r_inf) * er
    s_inf = be * h_inf / gs
    c = h - h_inf
    eg = np.exp(-gs * dt)
    if abs(gs - dh) < _RESONANCE_EPS:
        s1 = s_inf + (s - s_inf) * eg + be * c * dt * eg
    else:
        b = be * c / (gs - dh)
        s1 = s_inf + (s - s_inf - b) * eg + b * eh
    h1 = min(max(h1, 0.0), _STATE_MAX)
    s1 = min(max(s1, 0.0), _STATE_MAX)
    r1 = min(max(r1, 0.0), _STATE_MAX)
    return h1, s1, r1


@njit(cache=True)
def path_kernel(ah, dh, be, gs, ar, dr, nh, ns, nr, jh, js, jr,
                h0, s0, r0, wh, ws, wr, grid, z0,
                k_row, log_t, log_c, log_m):
    """Simulate one path; fills k_row (and shock logs up to capacity).

    Returns (terminal_h, terminal_s, terminal_r, min_k, n_events).
    n_events may exceed the log capacity; callers needing full logs must
    re-run with larger buffers.
    """
    total = nh + ns + nr
    z = z0
    t = 0.0
    h = h0
    s = s0
    r = r0
    comp = -1
    if total > 0.0:
        z, u = _next_uniform(z)
        t_ev = -np.log1p(-u) / total
        z, u2 = _next_uniform(z)
        if u2 * total < nh:
            comp = 0
        elif u2 * total < nh + ns:
            comp = 1
        else:
            comp = 2
    else:
        t_ev = np.inf
    cap = log_t.shape[0]
    n_ev = 0
    min_k = np.inf
    th = h
    ts = s
    tr = r
    for k in range(grid.shape[0]):
        tg = grid[k]
        while t_ev <= tg:
            h, s, r = _flow(h, s, r, ah, dh, be, gs, ar, dr, t_ev - t)
            t = t_ev
            if comp == 0:
                mag = jh
                h = max(h - jh, 0.0)
            elif comp == 1:
                mag = js
                s = max(s - js, 0.0)
            else:
                mag = jr
                r = max(r - jr, 0.0)
            if n_ev < cap:
                log_t[n_ev] = t
                log_c[n_ev] = comp
                log_m[n_ev] = mag
            n_ev += 1
            z, u = _next_uniform(z)
            t_ev = t + (-np.log1p(-u) / total)
            z, u2 = _next_uniform(z)
            if u2 * total < nh:
                comp = 0
            elif u2 * total < nh + ns:
                comp = 1
            else:
                comp = 2
        th, ts, tr = _flow(h, s, r, ah, dh, be, gs, ar, dr, tg - t)
        kv = wh * th + ws * ts + wr * tr
        k_row[k] = kv
        if kv < min_k:
            min_k = kv
    return th, ts, tr, min_k, n_ev


@njit(cache=True, parallel=True)
def ensemble_kernel(ah, dh, be, gs, ar, dr, nh, ns, nr, jh, js, jr,
                    h0, s0, r0, wh, ws, wr, grid, master_seed, n_paths):
    """Simulate n_paths independent paths; path i uses stream (seed, i)."""
    ng = grid.shape[0]
    k_mat = np.empty((n_paths, ng))
    term_h = np.empty(n_paths)
    term_s = np.empty(n_paths)
    term_r = np.empty(n_paths)
    min_k = np.empty(n_paths)
    no_log_t = np.empty(0)
    no_log_c = np.empty(0, dtype=np.int8)
    no_log_m = np.empty(0)
    for i in prange(n_paths):
        z0 = _stream_state(master_seed, U64(i))
        th, ts, tr, mk, _ = path_kernel(
            ah, dh, be, gs, ar, dr, nh, ns, nr, jh, js, jr,
            h0, s0, r0, wh, ws, wr, grid, z0,
            k_mat[i], no_log_t, no_log_c, no_log_m)
        term_h[i] = th
        term_s[i] = ts
        term_r[i] = tr
        min_k[i] = mk
    return k_mat, term_h, term_s, term_r, min_k
