"""JSON and CSV serialization for parameters, targets, and results.

All schemas are documented field-by-field in docs/formats.md. Floats are
written with repr precision so that files round-trip exactly and reruns
with identical inputs are byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

import numpy as np

from .engine import CANONICAL_LEVERS, EnsembleResult, RunConfig
from .model import CapitalState, LeverGains, ModelParams, Weights


class FormatError(ValueError):
    """Malformed input file: message carries file and field diagnostics."""


_PARAM_FIELDS = ("alpha_h", "delta_h", "beta", "gamma_s", "alpha_r", "delta_r",
                 "nu_h", "nu_s", "nu_r", "j_h", "j_s", "j_r")
_GAIN_FIELDS = ("g_p", "g_m", "c_m", "g_pr", "c_pr", "g_r", "c_r")


def _get(obj: dict, key: str, where: str) -> Any:
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise FormatError(f"{where}: missing field {key!r}") from None


def params_to_dict(params: ModelParams) -> dict:
    d: dict[str, Any] = {f: getattr(params, f) for f in _PARAM_FIELDS}
    d["gains"] = {f: getattr(params.gains, f) for f in _GAIN_FIELDS}
    d["init"] = {"h": params.init.h, "s": params.init.s, "r": params.init.r}
    d["weights"] = {"w_h": params.weights.w_h, "w_s": params.weights.w_s,
                    "w_r": params.weights.w_r}
    return d


def params_from_dict(d: dict, where: str = "params") -> ModelParams:
    try:
        kwargs = {f: float(_get(d, f, where)) for f in _PARAM_FIELDS}
        g = _get(d, "gains", where)
        gains = LeverGains(**{f: float(_get(g, f, f"{where}.gains")) for f in _GAIN_FIELDS})
        i = _get(d, "init", where)
        init = CapitalState(float(_get(i, "h", f"{where}.init")),
                            float(_get(i, "s", f"{where}.init")),
                            float(_get(i, "r", f"{where}.init")))
        w = _get(d, "weights", where)
        weights = Weights(float(_get(w, "w_h", f"{where}.weights")),
                          float(_get(w, "w_s", f"{where}.weights")),
                          float(_get(w, "w_r", f"{where}.weights")))
        return ModelParams(gains=gains, init=init, weights=weights, **kwargs)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"{where}: {exc}") from exc


def load_params(path: str | Path) -> ModelParams:
    return params_from_dict(_load_json(path), where=str(path))


def save_params(params: ModelParams, path: str | Path) -> None:
    _dump_json(params_to_dict(params), path)


def targets_to_dict(targets: "CalibrationTargets") -> dict:  # noqa: F821
    return {
        "k_star": targets.k_star,
        "scenarios": {
            name: {"mean_k": t[0], "cv_pct": t[1], "crisis_pct": t[2]}
            for name, t in targets.scenarios.items()
        },
    }


def targets_from_dict(d: dict, where: str = "targets"):
    from .calibration import CalibrationTargets

    raw = _get(d, "scenarios", where)
    scenarios = {}
    for name in CANONICAL_LEVERS:
        row = _get(raw, name, f"{where}.scenarios")
        scenarios[name] = (float(_get(row, "mean_k", f"{where}.{name}")),
                           float(_get(row, "cv_pct", f"{where}.{name}")),
                           float(_get(row, "crisis_pct", f"{where}.{name}")))
    try:
        return CalibrationTargets(scenarios=scenarios,
                                  k_star=float(d.get("k_star", 40.0)))
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from exc


def load_targets(path: str | Path):
    return targets_from_dict(_load_json(path), where=str(path))


def save_targets(targets, path: str | Path) -> None:
    _dump_json(targets_to_dict(targets), path)


def ensemble_to_dict(res: EnsembleResult) -> dict:
    return {
        "scenario": res.scenario,
        "config": {"n_paths": res.config.n_paths, "horizon": res.config.horizon,
                   "record_dt": res.config.record_dt,
                   "master_seed": res.config.master_seed},
        "grid": res.grid.tolist(),
        "terminal_k": res.terminal_k.tolist(),
        "terminal_h": res.terminal_h.tolist(),
        "terminal_s": res.terminal_s.tolist(),
        "terminal_r": res.terminal_r.tolist(),
        "min_k": res.min_k.tolist(),
        "mean_k_series": res.mean_k_series.tolist(),
        "p05_series": res.p05_series.tolist(),
        "p95_series": res.p95_series.tolist(),
        "crisis_curve": res.crisis_curve.tolist(),
    }


def ensemble_from_dict(d: dict, where: str = "result") -> EnsembleResult:
    cfg = _get(d, "config", where)
    config = RunConfig(n_paths=int(_get(cfg, "n_paths", f"{where}.config")),
                       horizon=float(_get(cfg, "horizon", f"{where}.config")),
                       record_dt=float(_get(cfg, "record_dt", f"{where}.config")),
                       master_seed=int(_get(cfg, "master_seed", f"{where}.config")))
    arr = lambda key: np.asarray(_get(d, key, where), dtype=float)
    return EnsembleResult(
        scenario=str(_get(d, "scenario", where)), config=config,
        grid=arr("grid"), terminal_k=arr("terminal_k"),
        terminal_h=arr("terminal_h"), terminal_s=arr("terminal_s"),
        terminal_r=arr("terminal_r"), min_k=arr("min_k"),
        mean_k_series=arr("mean_k_series"), p05_series=arr("p05_series"),
        p95_series=arr("p95_series"), crisis_curve=arr("crisis_curve"))


def load_ensemble(path: str | Path) -> EnsembleResult:
    return ensemble_from_dict(_load_json(path), where=str(path))


def save_ensemble(res: EnsembleResult, path: str | Path) -> None:
    _dump_json(ensemble_to_dict(res), path)


def write_terminal_csv(res: EnsembleResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path_index", "terminal_K", "terminal_H", "terminal_S",
                    "terminal_R"])
        for i in range(res.terminal_k.size):
            w.writerow([i, _fmt(res.terminal_k[i]), _fmt(res.terminal_h[i]),
                        _fmt(res.terminal_s[i]), _fmt(res.terminal_r[i])])


def write_series_csv(res: EnsembleResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "mean_K", "p05", "p95", "crisis_prob"])
        for i in range(res.grid.size):
            w.writerow([_fmt(res.grid[i]), _fmt(res.mean_k_series[i]),
                        _fmt(res.p05_series[i]), _fmt(res.p95_series[i]),
                        _fmt(res.crisis_curve[i])])


def write_summary_csv(rows: list[dict], path: str | Path) -> None:
    """rows: one dict per scenario in report order (see cli.cmd_table1)."""
    cols = ["scenario", "mean_K", "sd_K", "cv_pct", "sharpe", "crisis_pct",
            "first_passage_pct"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in rows:
            w.writerow([row["scenario"]] +
                       [_fmt(row[c]) for c in cols[1:]])


def write_calibration_log(history: list[tuple[int, float, float]],
                          path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eval_index", "loss", "best_loss"])
        for idx, loss, best in history:
            w.writerow([idx, repr(float(loss)), repr(float(best))])


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    return repr(float(v))


def _load_json(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc


def _dump_json(obj: dict, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
