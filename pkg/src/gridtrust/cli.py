"""Command-line pipeline.

Verbs:
  simulate   generate a bot cohort into a data directory
  serve      run the HTTP experiment service
  ingest     export a data directory's sessions to a JSONL file
  exclude    apply exclusion rules to an export file
  series     build a group's trust series CSV from kept sessions
  analyze    run the full OLS/AIC/ARIMAX/cross-validation workflow
  render     write table and figure files from an analysis report

Global configuration comes from flags, then environment variables
(GRIDTRUST_DATA_DIR, GRIDTRUST_EXPERIMENT_SEED, GRIDTRUST_PORT), then an
optional JSON config file passed with --config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .design import Group, build_plan
from .server import ExperimentService, write_export
from .synth import SimClock, run_bot_cohort

DEFAULT_SEED = 20240512


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _setting(args, cfg: dict, name: str, env: str, default):
    val = getattr(args, name, None)
    if val is not None:
        return val
    if os.environ.get(env):
        return type(default)(os.environ[env])
    if name in cfg:
        return cfg[name]
    return default


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gridtrust", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--data-dir", help="session store directory")
    parser.add_argument("--experiment-seed", type=int, help="shared 64-bit experiment seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a bot cohort")
    p.add_argument("--sessions", type=int, default=20)
    p.add_argument("--bot-seed", type=int, default=1)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--static", help="directory of client assets to serve")

    p = sub.add_parser("ingest", help="export sessions from the store to JSONL")
    p.add_argument("--out", required=True)
    p.add_argument("--no-frames", action="store_true", help="omit frame logs")

    p = sub.add_parser("exclude", help="apply exclusion rules to an export file")
    p.add_argument("--input", required=True)
    p.add_argument("--out-kept", required=True)
    p.add_argument("--out-report", required=True)
    p.add_argument("--break-threshold", type=float, default=pipeline.DEFAULT_BREAK_THRESHOLD)
    p.add_argument("--estimate-max", type=int, default=pipeline.DEFAULT_ESTIMATE_MAX)
    p.add_argument("--unreasonable-trials", type=int, default=pipeline.DEFAULT_UNREASONABLE_TRIALS)

    p = sub.add_parser("series", help="build a group-mean trust series CSV")
    p.add_argument("--input", required=True, help="kept-sessions export file")
    p.add_argument("--group", required=True, choices=["0", "1"])
    p.add_argument("--out", required=True)

    p = sub.add_parser("analyze", help="full analysis to a report JSON")
    p.add_argument("--input", required=True, help="kept-sessions export file")
    p.add_argument("--out", required=True)
    p.add_argument("--p-max", type=int, default=4)
    p.add_argument("--q-max", type=int, default=4)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--fit-seed", type=int, default=0)

    p = sub.add_parser("render", help="render tables from a report JSON")
    p.add_argument("--report", required=True)
    p.add_argument("--out-dir", required=True)

    args = parser.parse_args(argv)
    cfg = _load_config(args.config)
    data_dir = _setting(args, cfg, "data_dir", "GRIDTRUST_DATA_DIR", "./gridtrust-data")
    seed = int(_setting(args, cfg, "experiment_seed", "GRIDTRUST_EXPERIMENT_SEED", DEFAULT_SEED))

    if args.command == "simulate":
        clock = SimClock()
        service = ExperimentService(data_dir, seed, clock=clock)
        records = run_bot_cohort(service, args.sessions, args.bot_seed, clock=clock)
        print(f"simulated {len(records)} bot sessions into {data_dir}")
        return 0

    if args.command == "serve":
        from .httpd import serve_forever

        port = int(_setting(args, cfg, "port", "GRIDTRUST_PORT", 8420))
        service = ExperimentService(data_dir, seed)
        serve_forever(service, args.host, port, args.static)
        return 0

    if args.command == "ingest":
        service = ExperimentService(data_dir, seed)
        n = write_export(service, args.out, include_frames=not args.no_frames)
        print(f"wrote {n} records to {args.out}")
        return 0

    if args.command == "exclude":
        sessions = pipeline.ingest(args.input)
        rules = pipeline.ExclusionRules(
            break_threshold=args.break_threshold,
            estimate_max=args.estimate_max,
            unreasonable_trials=args.unreasonable_trials,
        )
        kept, excluded = pipeline.exclude(sessions, rules)
        kept_ids = {s.session_id for s in kept}
        with open(args.input, "r", encoding="utf-8") as src, open(
            args.out_kept + ".tmp", "w", encoding="utf-8"
        ) as dst:
            for line in src:
                if line.strip() and json.loads(line)["session"] in kept_ids:
                    dst.write(line)
        os.replace(args.out_kept + ".tmp", args.out_kept)
        with open(args.out_report + ".tmp", "w", encoding="utf-8") as fh:
            for r in excluded:
                fh.write(json.dumps(r.to_dict(), separators=(",", ":")) + "\n")
        os.replace(args.out_report + ".tmp", args.out_report)
        print(f"kept {len(kept)} sessions, excluded {len(excluded)}")
        return 0

    if args.command == "series":
        sessions = pipeline.ingest(args.input)
        group = Group(int(args.group))
        series = pipeline.build_series(sessions, group, build_plan(seed, group))
        caps = series.exog[:, :3].argmax(axis=1)
        rows = [("trial", "trust", "capability")] + [
            (i, series.values[i], ("cap20", "cap50", "cap100")[caps[i]])
            for i in range(len(series))
        ]
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out + ".tmp", "w", encoding="utf-8") as fh:
            fh.write("\n".join(",".join(str(v) for v in row) for row in rows) + "\n")
        os.replace(args.out + ".tmp", args.out)
        print(f"wrote {len(series)}-trial series for group {group.value} to {args.out}")
        return 0

    if args.command == "analyze":
        sessions = pipeline.ingest(args.input)
        series = {}
        for group in Group:
            series[group] = pipeline.build_series(sessions, group, build_plan(seed, group))
        report = pipeline.run_analysis(
            series[Group.G0],
            series[Group.G1],
            p_range=range(args.p_max + 1),
            q_range=range(args.q_max + 1),
            d=args.d,
            seed=args.fit_seed,
        )
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out + ".tmp", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        os.replace(args.out + ".tmp", args.out)
        sel = [g.aic.selected for g in report.groups]
        print(f"analysis written to {args.out}; selected orders {[s.as_tuple() for s in sel]}")
        return 0

    if args.command == "render":
        with open(args.report, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        try:
            report = _report_from_dict(data)
        except (KeyError, IndexError, ValueError) as exc:
            pipeline.render_error(args.out_dir, f"cannot render report: {exc}")
            print(f"render failed: {exc}", file=sys.stderr)
            return 1
        files = pipeline.render_tables(report, args.out_dir)
        print(f"wrote {len(files)} files to {args.out_dir}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def _report_from_dict(data: dict) -> pipeline.AnalysisReport:
    """Rehydrate enough of a report JSON to re-render its tables."""
    from .ts import AicGrid, ArimaOrder, ArimaxFit, CorrelogramResult, OlsFit, TrustSeries

    groups = []
    for gd in data["groups"]:
        series = TrustSeries.from_dict(gd["series"])
        od = gd["ols"]
        fitted = _ols_fitted(series, np.array(od["coef"]), od["names"])
        ols = OlsFit(
            coef=np.array(od["coef"]),
            names=tuple(od["names"]),
            stderr=np.array(od["stderr"]),
            tvalues=np.array(od["tvalues"]),
            pvalues=np.array(od["pvalues"]),
            fitted=fitted,
            residuals=series.values - fitted,
            rmse=od["rmse"],
            nobs=od["nobs"],
            df_resid=od["df_resid"],
        )
        ad = gd["aic"]
        table = np.array(
            [[np.nan if v is None else v for v in row] for row in ad["table"]], dtype=np.float64
        )
        grid = AicGrid(
            p_values=tuple(ad["p_values"]),
            q_values=tuple(ad["q_values"]),
            d=ad["d"],
            table=table,
            selected=ArimaOrder(*ad["selected"]) if ad["selected"] else None,
        )
        fd = gd["arimax"]
        preds = np.array([np.nan if v is None else v for v in gd["predictions"]])
        fit = ArimaxFit(
            order=ArimaOrder(*fd["order"]),
            beta=np.array(fd["beta"]),
            beta_names=tuple(fd["beta_names"]),
            phi=np.array(fd["phi"]),
            theta=np.array(fd["theta"]),
            sigma2=fd["sigma2"],
            loglik=fd["loglik"],
            aic=fd["aic"],
            residuals=series.values - preds,
            one_step_rmse=fd["one_step_rmse"],
            stderr=np.array(fd["stderr"]),
            param_names=tuple(fd["param_names"]),
            converged=fd["converged"],
            nfev=fd["nfev"],
            nobs=fd["nobs"],
        )
        groups.append(
            pipeline.GroupAnalysis(
                group=Group[gd["group"]],
                series=series,
                ols=ols,
                residual_acf=CorrelogramResult(
                    np.array(gd["residual_acf"]["values"]), gd["residual_acf"]["band"]
                ),
                residual_pacf=CorrelogramResult(
                    np.array(gd["residual_pacf"]["values"]), gd["residual_pacf"]["band"]
                ),
                aic=grid,
                arimax=fit,
                predictions=preds,
            )
        )
    return pipeline.AnalysisReport(
        groups=(groups[0], groups[1]),
        rmse_matrix=np.array(data["rmse_matrix"]),
        notes=data.get("notes", []),
    )


def _ols_fitted(series, coef, names) -> np.ndarray:
    x, _ = series.select_exog(list(names) if names and names[0] != "intercept" else "capability")
    return x @ coef


if __name__ == "__main__":
    sys.exit(main())
