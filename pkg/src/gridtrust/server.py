"""Experiment service: session lifecycle, trial delivery, trajectory
ingestion, survey capture, and durable storage.

Storage is append-only line-delimited JSON: one event file per session plus
a small index file, no database. A session's cursor and score are derived
from its event log on load, so a crash can never leave the cursor ahead of
the stored trials. Uploaded trajectories are validated by replaying the key
trace through the spotlight kinematics; any mismatch is rejected at ingest.

Capability is never exposed numerically on any endpoint: clients only see
the searcher's color.
"""

from __future__ import annotations

import enum
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Callable, Iterator, Optional

import numpy as np

from .design import (
    ExperimentPlan,
    Group,
    SurveyResponse,
    TOTAL_TRIALS,
    assign_group,
    build_plan,
    questionnaire_dict,
)
from .rng import derive_seed
from .sim import (
    TrialConfig,
    WorldConfig,
    as_path,
    as_report,
    count_intersections,
    n_frames,
    simulate_keys,
    subject_start,
    trial_score,
)

FRAME_SLACK = 1.05  # uploaded frame count may exceed the nominal length by 5%


class SessionStatus(enum.Enum):
    ACTIVE = "Active"
    COMPLETE = "Complete"
    ABANDONED = "Abandoned"


class ServiceError(Exception):
    """Protocol violation; ``code`` is a stable machine-readable tag."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


@dataclass
class SessionRecord:
    session_id: str
    ordinal: int
    group: Group
    created_at: float
    status: SessionStatus = SessionStatus.ACTIVE
    trial_cursor: int = 0
    cumulative_score: int = 0
    synthetic: bool = False

    def to_dict(self) -> dict:
        return {
            "session": self.session_id,
            "ordinal": self.ordinal,
            "group": self.group.name,
            "created_at": self.created_at,
            "status": self.status.value,
            "trial_cursor": self.trial_cursor,
            "cumulative_score": self.cumulative_score,
            "synthetic": self.synthetic,
        }


@dataclass
class TrialLog:
    """One uploaded trial: the subject's frames plus the survey answers."""

    session_id: str
    trial_index: int
    keys: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    survey: SurveyResponse
    server_recv_at: float = 0.0

    def frames_dict(self) -> dict:
        return {
            "keys": self.keys.astype(int).tolist(),
            "pos": self.pos.tolist(),
            "vel": self.vel.tolist(),
        }

    @classmethod
    def frames_from_dict(cls, d: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.asarray(d["keys"], dtype=np.uint8),
            np.asarray(d["pos"], dtype=np.float64),
            np.asarray(d["vel"], dtype=np.float64),
        )


@dataclass
class _SessionState:
    record: SessionRecord
    lock: threading.Lock = field(default_factory=threading.Lock)
    pending_frames: Optional[dict] = None  # accumulated upload for the current trial
    responses: dict = field(default_factory=dict)  # trial_index -> submit response


class ExperimentService:
    """In-process service object; the HTTP layer is a thin wrapper."""

    def __init__(
        self,
        data_dir: str | FsPath,
        experiment_seed: int,
        world: Optional[WorldConfig] = None,
        clock: Callable[[], float] = time.time,
    ):
        self.data_dir = FsPath(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.index_path = self.data_dir / "index.jsonl"
        self.experiment_seed = experiment_seed
        self.world = world or WorldConfig()
        self.world.validate()
        self.clock = clock
        self._plans: dict[Group, ExperimentPlan] = {
            g: build_plan(experiment_seed, g, self.world) for g in Group
        }
        self._lock = threading.RLock()
        self._sessions: dict[str, _SessionState] = {}
        self._load()

    # -- persistence -------------------------------------------------------

    def _load(self) -> None:
        if not self.index_path.exists():
            return
        for entry in _read_jsonl(self.index_path):
            rec = SessionRecord(
                session_id=entry["session"],
                ordinal=entry["ordinal"],
                group=Group[entry["group"]],
                created_at=entry["created_at"],
                synthetic=entry.get("synthetic", False),
            )
            state = _SessionState(record=rec)
            for event in _read_jsonl(self._session_path(rec.session_id)):
                if event.get("event") == "trial":
                    rec.trial_cursor = event["trial"] + 1
                    rec.cumulative_score = event["outcome"]["cumulative_score"]
                    state.responses[event["trial"]] = event["outcome"]
                elif event.get("event") == "status":
                    rec.status = SessionStatus(event["status"])
            self._sessions[rec.session_id] = state

    def _session_path(self, session_id: str) -> FsPath:
        return self.sessions_dir / f"{session_id}.jsonl"

    def _append(self, session_id: str, event: dict) -> None:
        line = json.dumps(event, separators=(",", ":"))
        with open(self._session_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()

    # -- session lifecycle ---------------------------------------------------

    def create_session(self, synthetic: bool = False) -> SessionRecord:
        with self._lock:
            ordinal = len(self._sessions)
            sid = f"s{ordinal:05d}{derive_seed(self.experiment_seed, ordinal) & 0xFFFFFFFF:08x}"
            rec = SessionRecord(
                session_id=sid,
                ordinal=ordinal,
                group=assign_group(ordinal),
                created_at=self.clock(),
                synthetic=synthetic,
            )
            with open(self.index_path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "session": sid,
                            "ordinal": ordinal,
                            "group": rec.group.name,
                            "created_at": rec.created_at,
                            "synthetic": synthetic,
                        },
                        separators=(",", ":"),
                    )
                    + "\n"
                )
                fh.flush()
            self._append(sid, {"event": "created", **rec.to_dict()})
            self._sessions[sid] = _SessionState(record=rec)
            return rec

    def _state(self, session_id: str) -> _SessionState:
        state = self._sessions.get(session_id)
        if state is None:
            raise ServiceError("unknown_session", f"no session {session_id!r}")
        return state

    def session(self, session_id: str) -> SessionRecord:
        return self._state(session_id).record

    def abandon(self, session_id: str) -> SessionRecord:
        state = self._state(session_id)
        with state.lock:
            if state.record.status is SessionStatus.ACTIVE:
                state.record.status = SessionStatus.ABANDONED
                self._append(session_id, {"event": "status", "status": "Abandoned", "at": self.clock()})
            return state.record

    # -- trial delivery ------------------------------------------------------

    def plan_for(self, group: Group) -> ExperimentPlan:
        return self._plans[group]

    def get_trial(self, session_id: str, trial_index: int) -> dict:
        """Trial payload for clients: geometry, searcher path and prompts.

        Exposes the searcher only through its color and path; neither the
        capability fraction nor the strategy name ever leaves the server.
        """
        state = self._state(session_id)
        rec = state.record
        if rec.status is not SessionStatus.ACTIVE:
            raise ServiceError("session_closed", f"session is {rec.status.value}")
        if trial_index != rec.trial_cursor:
            raise ServiceError(
                "out_of_order",
                f"next trial is {rec.trial_cursor}, requested {trial_index}",
            )
        trial = self._plans[rec.group].trial(trial_index)
        searcher = as_path(trial, self.world)
        color = trial.searcher_color
        return {
            "trial_index": trial_index,
            "solo": trial.solo,
            "duration": self.world.trial_duration,
            "warning_lead": self.world.warning_lead,
            "outliers": sorted(trial.outlier_cells),
            "color": color.value if color else None,
            "as_path": searcher.pos.tolist() if searcher else None,
            "questionnaire": questionnaire_dict(trial.solo),
            "world": self.world.to_dict(),
        }

    # -- trial submission ----------------------------------------------------

    def _validate_frames(
        self, trial: TrialConfig, keys: np.ndarray, pos: np.ndarray, vel: np.ndarray
    ) -> None:
        n = len(pos)
        nominal = n_frames(self.world.trial_duration, self.world.tick_rate)
        if not (2 <= n <= int(nominal * FRAME_SLACK) + 1):
            raise ServiceError("bad_frames", f"frame count {n} outside 2..{int(nominal * FRAME_SLACK) + 1}")
        if pos.shape != (n, 2) or vel.shape != (n, 2) or len(keys) != n:
            raise ServiceError("bad_frames", "frames arrays have inconsistent shapes")
        start = subject_start(self.world)
        if tuple(pos[0]) != start or tuple(vel[0]) != (0.0, 0.0):
            raise ServiceError("bad_frames", "trajectory must start at rest in the field center")
        replay = simulate_keys(start, (0.0, 0.0), keys[:-1], self.world)
        if not (np.array_equal(replay.pos, pos) and np.array_equal(replay.vel, vel)):
            raise ServiceError("replay_mismatch", "frames do not replay from the logged key trace")

    def upload_frames(
        self,
        session_id: str,
        trial_index: int,
        frames: dict,
        final: bool = True,
    ) -> dict:
        """Accept a frame batch (clients may stream several per trial).

        On the final batch the full trajectory is validated by replay and the
        searcher's report for the trial is returned.
        """
        state = self._state(session_id)
        with state.lock:
            rec = state.record
            if rec.status is not SessionStatus.ACTIVE:
                raise ServiceError("session_closed", f"session is {rec.status.value}")
            if trial_index != rec.trial_cursor:
                raise ServiceError("out_of_order", f"next trial is {rec.trial_cursor}")
            pending = state.pending_frames
            if pending is None or pending["trial"] != trial_index:
                pending = {"trial": trial_index, "keys": [], "pos": [], "vel": []}
                state.pending_frames = pending
            pending["keys"].extend(frames.get("keys", []))
            pending["pos"].extend(frames.get("pos", []))
            pending["vel"].extend(frames.get("vel", []))
            if not final:
                return {"accepted": len(pending["pos"]), "final": False}

            keys, pos, vel = TrialLog.frames_from_dict(pending)
            trial = self._plans[rec.group].trial(trial_index)
            self._validate_frames(trial, keys, pos, vel)
            pending["validated"] = True
            report = self._as_outcome(trial)
            out = {"accepted": len(pos), "final": True}
            if report is not None:
                color = trial.searcher_color
                assert color is not None
                out["as_report"] = report[1]
                out["color"] = color.value
            return out

    def _as_outcome(self, trial: TrialConfig) -> Optional[tuple[int, int]]:
        """(intersected, reported) for the trial's searcher, None when solo."""
        if trial.solo:
            return None
        searcher = as_path(trial, self.world)
        assert searcher is not None and trial.capability is not None
        hits = count_intersections(searcher, trial.outlier_cells, self.world)
        return hits, as_report(hits, trial.capability)

    def submit_survey(self, session_id: str, trial_index: int, survey: SurveyResponse) -> dict:
        """Finalize a trial: persist frames+survey atomically, advance the
        cursor, and reveal the truth count and score."""
        state = self._state(session_id)
        with state.lock:
            rec = state.record
            if trial_index in state.responses:  # duplicate submission: idempotent
                return dict(state.responses[trial_index])
            if rec.status is not SessionStatus.ACTIVE:
                raise ServiceError("session_closed", f"session is {rec.status.value}")
            if trial_index != rec.trial_cursor:
                raise ServiceError("out_of_order", f"next trial is {rec.trial_cursor}")
            pending = state.pending_frames
            if pending is None or pending["trial"] != trial_index or not pending.get("validated"):
                raise ServiceError("no_frames", "trial frames must be uploaded before the survey")

            trial = self._plans[rec.group].trial(trial_index)
            try:
                survey.validate(trial.solo)
            except ValueError as exc:
                raise ServiceError("bad_survey", str(exc)) from None

            truth = len(trial.outlier_cells)
            delta = trial_score(survey.total_estimate, truth)
            rec.cumulative_score += delta
            as_out = self._as_outcome(trial)
            outcome = {
                "truth": truth,
                "score_delta": delta,
                "cumulative_score": rec.cumulative_score,
                "as_intersected": as_out[0] if as_out else None,
                "as_reported": as_out[1] if as_out else None,
            }
            event = {
                "event": "trial",
                "session": session_id,
                "trial": trial_index,
                "solo": trial.solo,
                "frames": {
                    "keys": [int(k) for k in pending["keys"]],
                    "pos": pending["pos"],
                    "vel": pending["vel"],
                },
                "survey": survey.to_dict(),
                "outcome": outcome,
                "received_at": self.clock(),
            }
            self._append(session_id, event)
            rec.trial_cursor = trial_index + 1
            state.responses[trial_index] = outcome
            state.pending_frames = None
            if rec.trial_cursor == TOTAL_TRIALS:
                rec.status = SessionStatus.COMPLETE
                self._append(session_id, {"event": "status", "status": "Complete", "at": self.clock()})
            return dict(outcome)

    def submit_trial(self, log: TrialLog) -> dict:
        """One-shot submission (frames plus survey), used by bots and tests."""
        state = self._state(log.session_id)
        if log.trial_index in state.responses:
            return dict(state.responses[log.trial_index])
        self.upload_frames(log.session_id, log.trial_index, log.frames_dict(), final=True)
        return self.submit_survey(log.session_id, log.trial_index, log.survey)

    def get_score(self, session_id: str) -> dict:
        rec = self._state(session_id).record
        return {
            "cumulative_score": rec.cumulative_score,
            "trial_cursor": rec.trial_cursor,
            "status": rec.status.value,
        }

    # -- export --------------------------------------------------------------

    def export_sessions(
        self,
        status: Optional[SessionStatus] = None,
        group: Optional[Group] = None,
        synthetic: Optional[bool] = None,
        include_frames: bool = True,
    ) -> Iterator[dict]:
        """Stream all sessions and their trials as records, ordered by
        (session ordinal, trial index). Reads the event files directly, so a
        concurrent writer cannot tear a record."""
        with self._lock:
            states = sorted(self._sessions.values(), key=lambda s: s.record.ordinal)
        for state in states:
            rec = state.record
            if status is not None and rec.status is not status:
                continue
            if group is not None and rec.group is not group:
                continue
            if synthetic is not None and rec.synthetic != synthetic:
                continue
            yield {"kind": "session", **rec.to_dict(), "experiment_seed": self.experiment_seed}
            trials = []
            for event in _read_jsonl(self._session_path(rec.session_id)):
                if event.get("event") == "trial":
                    record = {
                        "kind": "trial",
                        "session": rec.session_id,
                        "trial": event["trial"],
                        "solo": event["solo"],
                        "survey": event["survey"],
                        "outcome": event["outcome"],
                        "received_at": event["received_at"],
                    }
                    if include_frames:
                        record["frames"] = event["frames"]
                    trials.append(record)
            trials.sort(key=lambda r: r["trial"])
            yield from trials


def _read_jsonl(path: FsPath) -> Iterator[dict]:
    """Parse a line-delimited JSON file, skipping a torn trailing line."""
    if not path.exists():
        return
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.endswith("\n"):
                return  # partial write at EOF from an interrupted append
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError:
                return


def write_export(service: ExperimentService, path: str | FsPath, **filters) -> int:
    """Write the export stream to a file; returns the record count."""
    count = 0
    tmp = FsPath(str(path) + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for record in service.export_sessions(**filters):
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")
            count += 1
    tmp.replace(path)
    return count
