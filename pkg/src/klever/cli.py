"""Command-line entry point: run scenarios, reproduce the summary table,
calibrate parameters, and export figure-ready CSV data.

Exit codes: 0 success, 2 usage/config error, 1 internal failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import calibration, io, metrics
from .engine import (CANONICAL_LEVERS, K_STAR, RunConfig, ScenarioSpec,
                     run_ensemble, sample_paths)
from .model import InvalidParamsError, LeverVector

#: Table row order: single levers between baseline and the combined run.
REPORT_ORDER = ("baseline", "dev_expertise", "org_memory", "process",
                "ecosystem", "full_klrm")


class CliError(Exception):
    """User-facing configuration error; maps to exit code 2."""


def _load_params(path: str):
    try:
        return io.load_params(path)
    except (io.FormatError, InvalidParamsError) as exc:
        raise CliError(str(exc)) from exc


def _resolve_scenario(args, cfg: RunConfig) -> ScenarioSpec:
    if args.scenario is not None:
        levers = CANONICAL_LEVERS.get(args.scenario)
        if levers is None:
            known = ", ".join(CANONICAL_LEVERS)
            raise CliError(f"unknown scenario {args.scenario!r}; "
                           f"known scenarios: {known}")
        return ScenarioSpec(args.scenario, levers, cfg)
    try:
        d = io._load_json(args.config)
        name = d["name"]
        levers = LeverVector(**{k: float(v) for k, v in d["levers"].items()})
    except io.FormatError as exc:
        raise CliError(str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{args.config}: malformed scenario config "
                       f"(fields: name, levers.lambda_*): {exc}") from exc
    return ScenarioSpec(name, levers, cfg)


def _stats_row(name: str, res) -> dict:
    st = metrics.terminal_stats(res)
    return {"scenario": name, "mean_K": st.mean, "sd_K": st.sd,
            "cv_pct": 100.0 * st.cv, "sharpe": st.sharpe,
            "crisis_pct": 100.0 * st.crisis_prob,
            "first_passage_pct": 100.0 * metrics.first_passage_prob(res)}


def _print_rows(rows: list[dict], extra_cols: list[str] = ()) -> None:
    cols = ["scenario", "mean_K", "sd_K", "cv_pct", "sharpe", "crisis_pct",
            "first_passage_pct", *extra_cols]
    widths = {c: max(len(c), 14) for c in cols}
    print("  ".join(c.rjust(widths[c]) for c in cols))
    for row in rows:
        cells = []
        for c in cols:
            v = row.get(c)
            if v is None:
                cells.append("n/a".rjust(widths[c]))
            elif isinstance(v, str):
                cells.append(v.rjust(widths[c]))
            else:
                cells.append(f"{v:.4f}".rjust(widths[c]))
        print("  ".join(cells))


def cmd_run(args) -> int:
    params = _load_params(args.params)
    cfg = RunConfig(n_paths=args.paths, horizon=args.horizon,
                    record_dt=args.record_dt, master_seed=args.seed)
    scenario = _resolve_scenario(args, cfg)
    res = run_ensemble(scenario, params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.save_ensemble(res, out / "result.json")
    io.write_terminal_csv(res, out / "terminal.csv")
    io.write_series_csv(res, out / "series.csv")
    _print_rows([_stats_row(scenario.name, res)])
    return 0


def cmd_table1(args) -> int:
    params = _load_params(args.params)
    cfg = RunConfig(n_paths=args.paths, horizon=args.horizon,
                    record_dt=args.record_dt, master_seed=args.seed)
    rows = []
    for name in REPORT_ORDER:
        res = run_ensemble(ScenarioSpec(name, CANONICAL_LEVERS[name], cfg), params)
        rows.append(_stats_row(name, res))
    io.write_summary_csv(rows, args.out)
    base = rows[0]
    for row in rows:
        row["improvement_pct"] = metrics.improvement(row["mean_K"], base["mean_K"])
        row["cv_reduction_pct"] = metrics.cv_reduction(row["cv_pct"], base["cv_pct"])
    _print_rows(rows, extra_cols=["improvement_pct", "cv_reduction_pct"])
    return 0


def cmd_calibrate(args) -> int:
    try:
        targets = io.load_targets(args.targets)
    except (io.FormatError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    bounds = None
    if args.bounds:
        try:
            raw = io._load_json(args.bounds)
            bounds = calibration.ParamBounds(
                {k: (float(v[0]), float(v[1])) for k, v in raw.items()})
        except (io.FormatError, ValueError, TypeError, IndexError) as exc:
            raise CliError(f"{args.bounds}: malformed bounds file: {exc}") from exc
    eval_config = calibration.EvalConfig(n_paths=args.paths, master_seed=args.seed)
    result = calibration.calibrate(
        targets, bounds=bounds, budget=args.budget, seed=args.seed,
        eval_config=eval_config, free_gains=args.free_gains,
        loss_tol=args.loss_tol)
    io.save_params(result.params, args.out)
    if args.log:
        io.write_calibration_log(result.history, args.log)
    print(f"final loss: {result.loss:.6g} after {result.n_evals} evaluations")
    if result.budget_exhausted:
        print("warning: evaluation budget exhausted; returning best-so-far")
    verify = calibration.EvalConfig(n_paths=args.verify_paths,
                                    master_seed=args.seed)
    stats = calibration.scenario_stats(result.params, verify)
    print(f"verification at n={args.verify_paths} (target / simulated):")
    for name in REPORT_ORDER:
        t_mean, t_cv, t_crisis = targets.scenarios[name]
        st = stats[name]
        print(f"  {name:>14}  mean {t_mean:7.2f} / {st.mean:7.2f}"
              f"  cv% {t_cv:5.2f} / {100 * st.cv:5.2f}"
              f"  crisis% {t_crisis:5.2f} / {100 * st.crisis_prob:5.2f}")
    return 0


def cmd_figures(args) -> int:
    params = _load_params(args.params)
    cfg = RunConfig(n_paths=args.paths, horizon=args.horizon,
                    record_dt=args.record_dt, master_seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = {name: run_ensemble(ScenarioSpec(name, CANONICAL_LEVERS[name], cfg),
                                  params)
               for name in REPORT_ORDER}

    import csv

    n_show = 20
    shown = {name: sample_paths(params, CANONICAL_LEVERS[name], cfg, n_show)
             for name in ("baseline", "full_klrm")}
    grid = results["baseline"].grid
    with open(out / "fig2_paths.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["time"]
        for name in ("baseline", "full_klrm"):
            header += [f"{name}_path_{i}" for i in range(n_show)]
            header.append(f"{name}_mean")
        header.append("k_star")
        w.writerow(header)
        for j, t in enumerate(grid):
            row = [repr(float(t))]
            for name in ("baseline", "full_klrm"):
                row += [repr(float(p.k_series[j])) for p in shown[name]]
                row.append(repr(float(results[name].mean_k_series[j])))
            row.append(repr(K_STAR))
            w.writerow(row)

    with open(out / "fig3_hist.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "bin_left", "bin_right", "count"])
        for name in ("baseline", "full_klrm"):
            counts, edges = metrics.histogram(results[name].terminal_k, 40)
            for i, c in enumerate(counts):
                w.writerow([name, repr(float(edges[i])), repr(float(edges[i + 1])),
                            int(c)])

    with open(out / "fig4_crisis.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time"] + list(REPORT_ORDER))
        for j, t in enumerate(grid):
            w.writerow([repr(float(t))] +
                       [repr(float(results[n].crisis_curve[j]))
                        for n in REPORT_ORDER])

    with open(out / "fig5_decomp.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "mean_K", "sd_K"])
        for name in REPORT_ORDER:
            st = metrics.terminal_stats(results[name])
            w.writerow([name, repr(st.mean), repr(st.sd)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="klever",
                                description="Knowledge-capital scenario simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, paths_default=5000):
        sp.add_argument("--params", required=True, help="model parameter JSON")
        sp.add_argument("--paths", type=int, default=paths_default)
        sp.add_argument("--horizon", type=float, default=10.0)
        sp.add_argument("--record-dt", type=float, default=0.1, dest="record_dt")
        sp.add_argument("--seed", type=int, default=42)

    sp = sub.add_parser("run", help="run one scenario and export its ensemble")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--scenario", help="canonical scenario name")
    g.add_argument("--config", help="custom scenario JSON")
    common(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("table1", help="run all six scenarios; write summary.csv")
    common(sp)
    sp.add_argument("--out", default="summary.csv")
    sp.set_defaults(func=cmd_table1)

    sp = sub.add_parser("calibrate", help="fit parameters to target statistics")
    sp.add_argument("--targets", required=True)
    sp.add_argument("--bounds", help="JSON of {param: [lo, hi]}")
    sp.add_argument("--budget", type=int, default=5000)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--paths", type=int, default=2000,
                    help="paths per objective evaluation")
    sp.add_argument("--verify-paths", type=int, default=5000, dest="verify_paths")
    sp.add_argument("--free-gains", action="store_true", dest="free_gains")
    sp.add_argument("--loss-tol", type=float, default=0.0, dest="loss_tol")
    sp.add_argument("--out", required=True, help="output params JSON")
    sp.add_argument("--log", help="optional evaluation log CSV")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("figures", help="export figure-ready CSV data")
    common(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_figures)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
