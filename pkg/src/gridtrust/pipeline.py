"""Analysis pipeline: ingest exported sessions, apply exclusion rules, build
group-mean trust series, run OLS -> diagnostics -> AIC -> ARIMAX ->
cross-validation, and render table/figure data files.

All outputs are deterministic for a given export file and seed, and every
file is written atomically (temp + rename).
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .design import (
    ExperimentPlan,
    Group,
    MAIN_TRIALS,
    PRACTICE_TRIALS,
    SurveyResponse,
    build_plan,
    normalize_trust,
)
from .rng import derive_seed
from .server import SessionStatus
from .ts import (
    AicGrid,
    ArimaOrder,
    ArimaxFit,
    CorrelogramResult,
    OlsFit,
    TrustSeries,
    acf,
    aic_grid,
    arimax_fit,
    cross_validate,
    forecast_one_step,
    ols_baseline,
    pacf,
    plan_exog,
)

DEFAULT_BREAK_THRESHOLD = 600.0  # seconds between consecutive trial uploads
DEFAULT_ESTIMATE_MAX = 49  # grid holds 49 circles; estimates above are noise
DEFAULT_UNREASONABLE_TRIALS = 3


@dataclass
class IngestedTrial:
    trial_index: int
    solo: bool
    survey: SurveyResponse
    outcome: dict
    received_at: float
    raw: dict


@dataclass
class IngestedSession:
    session_id: str
    ordinal: int
    group: Group
    status: SessionStatus
    synthetic: bool
    created_at: float
    trials: list[IngestedTrial] = field(default_factory=list)
    raw: dict = field(default_factory=dict)


def ingest(source: Union[str, Path, Iterable[dict]]) -> list[IngestedSession]:
    """Read an export stream (path or record iterable) into session objects."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            records = [json.loads(line) for line in fh if line.strip()]
    else:
        records = list(source)
    sessions: dict[str, IngestedSession] = {}
    order: list[str] = []
    for rec in records:
        kind = rec.get("kind")
        if kind == "session":
            s = IngestedSession(
                session_id=rec["session"],
                ordinal=rec["ordinal"],
                group=Group[rec["group"]],
                status=SessionStatus(rec["status"]),
                synthetic=rec.get("synthetic", False),
                created_at=rec["created_at"],
                raw=rec,
            )
            sessions[s.session_id] = s
            order.append(s.session_id)
        elif kind == "trial":
            sid = rec["session"]
            if sid not in sessions:
                raise ValueError(f"trial record for unknown session {sid!r}")
            sessions[sid].trials.append(
                IngestedTrial(
                    trial_index=rec["trial"],
                    solo=rec["solo"],
                    survey=SurveyResponse.from_dict(rec["survey"]),
                    outcome=rec["outcome"],
                    received_at=rec["received_at"],
                    raw=rec,
                )
            )
        else:
            raise ValueError(f"unknown record kind {kind!r}")
    for s in sessions.values():
        s.trials.sort(key=lambda t: t.trial_index)
    return [sessions[sid] for sid in order]


class ExclusionReason(enum.Enum):
    INCOMPLETE = "Incomplete"
    OUT_OF_PROTOCOL_BREAK = "OutOfProtocolBreak"
    UNREASONABLE_ANSWERS = "UnreasonableAnswers"


@dataclass(frozen=True)
class ExclusionRules:
    break_threshold: float = DEFAULT_BREAK_THRESHOLD
    estimate_max: int = DEFAULT_ESTIMATE_MAX
    unreasonable_trials: int = DEFAULT_UNREASONABLE_TRIALS


@dataclass
class ExclusionReport:
    session_id: str
    reason: ExclusionReason
    evidence: str

    def to_dict(self) -> dict:
        return {"session": self.session_id, "reason": self.reason.value, "evidence": self.evidence}


def exclude(
    sessions: Sequence[IngestedSession], rules: ExclusionRules = ExclusionRules()
) -> tuple[list[IngestedSession], list[ExclusionReport]]:
    """Apply the exclusion rules; each excluded session gets exactly one
    primary reason (incomplete, then breaks, then unreasonable answers).
    Verdicts depend only on the session itself."""
    kept: list[IngestedSession] = []
    reports: list[ExclusionReport] = []
    for s in sessions:
        report = _judge(s, rules)
        if report is None:
            kept.append(s)
        else:
            reports.append(report)
    return kept, reports


def _judge(s: IngestedSession, rules: ExclusionRules) -> Optional[ExclusionReport]:
    if s.status is not SessionStatus.COMPLETE:
        return ExclusionReport(s.session_id, ExclusionReason.INCOMPLETE, f"status={s.status.value}")
    times = [t.received_at for t in s.trials]
    gaps = np.diff(times)
    if len(gaps) and gaps.max() > rules.break_threshold:
        at = int(np.argmax(gaps))
        return ExclusionReport(
            s.session_id,
            ExclusionReason.OUT_OF_PROTOCOL_BREAK,
            f"gap of {gaps.max():.0f}s before trial {s.trials[at + 1].trial_index} "
            f"(threshold {rules.break_threshold:.0f}s)",
        )
    bad = [
        t.trial_index
        for t in s.trials
        if t.survey.total_estimate > rules.estimate_max
        or t.survey.found_count > t.outcome["truth"]
    ]
    if len(bad) >= rules.unreasonable_trials:
        return ExclusionReport(
            s.session_id,
            ExclusionReason.UNREASONABLE_ANSWERS,
            f"{len(bad)} trials with impossible answers (first at {bad[:3]})",
        )
    return None


def build_series(
    sessions: Sequence[IngestedSession],
    group: Group,
    plan: ExperimentPlan,
) -> TrustSeries:
    """Group-mean trust per main trial: the mean over subjects of the
    normalized third (trust) statement, aligned with the plan's factors."""
    members = [s for s in sessions if s.group is group]
    if not members:
        raise ValueError(f"no sessions in group {group.name}")
    sums = np.zeros(MAIN_TRIALS)
    counts = np.zeros(MAIN_TRIALS)
    for s in members:
        for t in s.trials:
            if t.solo:
                continue
            i = t.trial_index - PRACTICE_TRIALS
            if not 0 <= i < MAIN_TRIALS:
                raise ValueError(f"main trial index {t.trial_index} out of range")
            sums[i] += normalize_trust(t.survey.likert[2])
            counts[i] += 1
    if (counts == 0).any():
        missing = int(np.argmax(counts == 0)) + PRACTICE_TRIALS
        raise ValueError(f"group {group.name} has no ratings for trial {missing}")
    return TrustSeries(values=sums / counts, exog=plan_exog(plan), group=group)


# --- full analysis ----------------------------------------------------------


@dataclass
class GroupAnalysis:
    group: Group
    series: TrustSeries
    ols: OlsFit
    residual_acf: CorrelogramResult
    residual_pacf: CorrelogramResult
    aic: AicGrid
    arimax: ArimaxFit
    predictions: np.ndarray

    def to_dict(self) -> dict:
        return {
            "group": self.group.name,
            "series": self.series.to_dict(),
            "ols": self.ols.to_dict(),
            "residual_acf": {"values": self.residual_acf.values.tolist(), "band": self.residual_acf.band},
            "residual_pacf": {"values": self.residual_pacf.values.tolist(), "band": self.residual_pacf.band},
            "aic": self.aic.to_dict(),
            "arimax": self.arimax.to_dict(),
            "predictions": [None if np.isnan(v) else v for v in self.predictions],
        }


@dataclass
class AnalysisReport:
    groups: tuple[GroupAnalysis, GroupAnalysis]
    rmse_matrix: np.ndarray  # rows: fitted-on group, cols: evaluated-on group
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "groups": [g.to_dict() for g in self.groups],
            "rmse_matrix": self.rmse_matrix.tolist(),
            "ols_rmse": [g.ols.rmse for g in self.groups],
            "notes": self.notes,
        }


def analyze_group(
    series: TrustSeries,
    group: Group,
    p_range: Sequence[int] = range(5),
    q_range: Sequence[int] = range(5),
    d: int = 1,
    seed: int = 0,
    max_lag: int = 20,
    exog_columns: str = "capability",
) -> GroupAnalysis:
    """One group's OLS -> residual diagnostics -> AIC grid -> best ARIMAX."""
    ols = ols_baseline(series, exog_columns=exog_columns)
    res_acf = acf(ols.residuals, max_lag)
    res_pacf = pacf(ols.residuals, max_lag)
    grid_seed = derive_seed(seed, group.value, 101)
    grid = aic_grid(series, p_range, q_range, d=d, exog_columns=exog_columns, seed=grid_seed)
    if grid.selected is None:
        raise RuntimeError(f"every AIC cell failed for group {group.name}")
    fit = arimax_fit(series, grid.selected, exog_columns=exog_columns, seed=grid_seed)
    preds = forecast_one_step(fit, series, exog_columns=exog_columns)
    return GroupAnalysis(
        group=group,
        series=series,
        ols=ols,
        residual_acf=res_acf,
        residual_pacf=res_pacf,
        aic=grid,
        arimax=fit,
        predictions=preds,
    )


def run_analysis(
    series0: TrustSeries,
    series1: TrustSeries,
    p_range: Sequence[int] = range(5),
    q_range: Sequence[int] = range(5),
    d: int = 1,
    seed: int = 0,
    exog_columns: str = "capability",
) -> AnalysisReport:
    """Both groups end to end plus the 2x2 cross-validation RMSE matrix
    (diagonal: own one-step RMSE; off-diagonal: parameters applied unchanged
    to the other group's series)."""
    g0 = analyze_group(series0, Group.G0, p_range, q_range, d, seed, exog_columns=exog_columns)
    g1 = analyze_group(series1, Group.G1, p_range, q_range, d, seed, exog_columns=exog_columns)
    matrix = np.array(
        [
            [g0.arimax.one_step_rmse, cross_validate(g0.arimax, series1, exog_columns=exog_columns)],
            [cross_validate(g1.arimax, series0, exog_columns=exog_columns), g1.arimax.one_step_rmse],
        ]
    )
    return AnalysisReport(groups=(g0, g1), rmse_matrix=matrix)


# --- rendering ---------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _csv(rows: Iterable[Sequence]) -> str:
    return "\n".join(",".join("" if v is None else str(v) for v in row) for row in rows) + "\n"


def render_tables(report: AnalysisReport, out_dir: str | Path) -> list[Path]:
    """Write delimiter-separated and human-readable tables plus per-figure
    data series; returns the list of files written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, text: str) -> None:
        path = out / name
        _atomic_write(path, text)
        written.append(path)

    emit("report.json", json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")

    for g in report.groups:
        tag = f"group{g.group.value}"
        ols = g.ols
        emit(
            f"ols_{tag}.csv",
            _csv(
                [("term", "coef", "stderr", "t", "p")]
                + [
                    (n, ols.coef[i], ols.stderr[i], ols.tvalues[i], ols.pvalues[i])
                    for i, n in enumerate(ols.names)
                ]
                + [("rmse", ols.rmse, None, None, None)]
            ),
        )
        lines = [f"OLS ({tag}): trust ~ {' + '.join(ols.names)}", ""]
        lines.append(f"{'term':<12}{'coef':>12}{'stderr':>12}{'t':>10}{'p':>10}")
        for i, n in enumerate(ols.names):
            lines.append(
                f"{n:<12}{ols.coef[i]:>12.4f}{ols.stderr[i]:>12.4f}"
                f"{ols.tvalues[i]:>10.2f}{ols.pvalues[i]:>10.3g}"
            )
        lines += ["", f"RMSE: {ols.rmse:.4f}   nobs: {ols.nobs}"]
        emit(f"ols_{tag}.txt", "\n".join(lines) + "\n")

        grid = g.aic
        emit(
            f"aic_{tag}.csv",
            _csv(
                [("p\\q",) + tuple(grid.q_values)]
                + [
                    (p,) + tuple(None if np.isnan(v) else v for v in grid.table[i])
                    for i, p in enumerate(grid.p_values)
                ]
            ),
        )
        lines = [f"AIC over ARIMA(p,{grid.d},q) orders ({tag}); rows p, columns q", ""]
        corner = "p\\q"
        header = f"{corner:>5}" + "".join(f"{q:>10}" for q in grid.q_values)
        lines.append(header)
        for i, p in enumerate(grid.p_values):
            cells = "".join(
                f"{'--':>10}" if np.isnan(v) else f"{v:>10.2f}" for v in grid.table[i]
            )
            lines.append(f"{p:>5}" + cells)
        sel = grid.selected
        lines += ["", f"selected order: ({sel.p},{sel.d},{sel.q})" if sel else "no cell converged"]
        emit(f"aic_{tag}.txt", "\n".join(lines) + "\n")

        fit = g.arimax
        z, pv = fit.zvalues(), fit.pvalues()
        params = fit.params()
        emit(
            f"arimax_{tag}.csv",
            _csv(
                [("term", "coef", "stderr", "z", "p")]
                + [
                    (n, params[i], fit.stderr[i], z[i], pv[i])
                    for i, n in enumerate(fit.param_names)
                ]
                + [
                    ("loglik", fit.loglik, None, None, None),
                    ("aic", fit.aic, None, None, None),
                    ("one_step_rmse", fit.one_step_rmse, None, None, None),
                ]
            ),
        )
        lines = [
            f"ARIMAX({fit.order.p},{fit.order.d},{fit.order.q}) ({tag})",
            "",
            f"{'term':<12}{'coef':>12}{'stderr':>12}{'z':>10}{'p':>10}",
        ]
        for i, n in enumerate(fit.param_names):
            lines.append(
                f"{n:<12}{params[i]:>12.4f}{fit.stderr[i]:>12.4f}{z[i]:>10.2f}{pv[i]:>10.3g}"
            )
        lines += [
            "",
            f"loglik: {fit.loglik:.3f}   AIC: {fit.aic:.2f}   one-step RMSE: {fit.one_step_rmse:.4f}",
        ]
        emit(f"arimax_{tag}.txt", "\n".join(lines) + "\n")

        # figure data
        caps = g.series.exog[:, :3].argmax(axis=1)
        strats = g.series.exog[:, 3:].argmax(axis=1)
        emit(
            f"series_{tag}.csv",
            _csv(
                [("trial", "trust", "capability", "strategy", "prediction", "ols_residual")]
                + [
                    (
                        i,
                        g.series.values[i],
                        ("cap20", "cap50", "cap100")[caps[i]],
                        ("lawnmower", "random", "omniscient")[strats[i]],
                        None if np.isnan(g.predictions[i]) else g.predictions[i],
                        g.ols.residuals[i],
                    )
                    for i in range(len(g.series))
                ]
            ),
        )
        emit(
            f"correlogram_{tag}.csv",
            _csv(
                [("lag", "acf", "pacf", "band")]
                + [
                    (k, g.residual_acf.values[k], g.residual_pacf.values[k], g.residual_acf.band)
                    for k in range(len(g.residual_acf.values))
                ]
            ),
        )

    m = report.rmse_matrix
    emit(
        "rmse_matrix.csv",
        _csv(
            [("fit\\eval", "group0", "group1"),
             ("group0", m[0, 0], m[0, 1]),
             ("group1", m[1, 0], m[1, 1])]
        ),
    )
    dag = "†"
    cross01 = f"{m[0, 1]:.4f}{dag}"
    cross10 = f"{m[1, 0]:.4f}{dag}"
    lines = [
        "One-step prediction RMSE (rows: fitted on; columns: evaluated on).",
        "Dagger marks cross-validated cells.",
        "",
        f"{'':>10}{'group0':>12}{'group1':>12}",
        f"{'group0':>10}{m[0, 0]:>12.4f}{cross01:>12}",
        f"{'group1':>10}{cross10:>12}{m[1, 1]:>12.4f}",
        "",
        f"OLS RMSE: group0 {report.groups[0].ols.rmse:.4f}, group1 {report.groups[1].ols.rmse:.4f}",
    ]
    emit("rmse_matrix.txt", "\n".join(lines) + "\n")
    return written


def render_error(out_dir: str | Path, message: str) -> Path:
    """Explicit failure marker for an empty or broken report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "render_error.txt"
    _atomic_write(path, message + "\n")
    return path


def analysis_from_export(
    export_path: str | Path,
    experiment_seed: int,
    rules: ExclusionRules = ExclusionRules(),
    p_range: Sequence[int] = range(5),
    q_range: Sequence[int] = range(5),
    d: int = 1,
    seed: int = 0,
) -> tuple[AnalysisReport, list[ExclusionReport]]:
    """Convenience composition: ingest -> exclude -> series -> analysis."""
    sessions = ingest(export_path)
    kept, excluded = exclude(sessions, rules)
    series = {}
    for group in Group:
        plan = build_plan(experiment_seed, group)
        series[group] = build_series(kept, group, plan)
    report = run_analysis(series[Group.G0], series[Group.G1], p_range, q_range, d, seed)
    return report, excluded
