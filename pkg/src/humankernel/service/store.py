"""Durable study store: stimuli, ranking tasks, responses, and rankings kept
in line-delimited JSON files under one root directory.

Writes funnel through a single lock per store; each appended record is
flushed and fsynced before the call returns, so acknowledged records survive
a crash. Loads tolerate a torn trailing line (an interrupted append).
"""

from __future__ import annotations

import json
import math
import os
import threading

from ..experiments.occam import Candidate, OccamTask
from ..responses import (RankingRecord, ResponseRecord, Stimulus,
                         _load_jsonl, _record_to_dict, _response_from_dict,
                         _ranking_from_dict, _stimulus_from_dict)

__all__ = ["StudyStore", "task_to_dict", "task_from_dict"]


def task_to_dict(task: OccamTask) -> dict:
    return {
        "task_id": task.task_id,
        "X": list(task.X),
        "y": list(task.y),
        "display_grid": list(task.display_grid),
        "candidates": [
            {"label": c.label, "log_lengthscale": c.log_lengthscale,
             "lml": c.lml, "curve": list(c.curve)}
            for c in task.candidates
        ],
    }


def task_from_dict(d: dict) -> OccamTask:
    return OccamTask(
        task_id=d["task_id"], X=tuple(d["X"]), y=tuple(d["y"]),
        display_grid=tuple(d["display_grid"]),
        candidates=tuple(
            Candidate(label=c["label"], log_lengthscale=c["log_lengthscale"],
                      lml=c["lml"], curve=tuple(c["curve"]))
            for c in d["candidates"]),
    )


class StudyStore:
    """File-backed store with referential checks on append."""

    def __init__(self, root):
        self.root = os.fspath(root)
        os.makedirs(self.root, exist_ok=True)
        self._lock = threading.Lock()
        self.stimuli: dict[str, Stimulus] = {}
        self.tasks: dict[str, OccamTask] = {}
        self.responses: list[ResponseRecord] = []
        self.rankings: list[RankingRecord] = []
        self._load()

    # -- paths ------------------------------------------------------------
    def _path(self, name: str) -> str:
        return os.path.join(self.root, name + ".jsonl")

    @property
    def responses_path(self) -> str:
        return self._path("responses")

    @property
    def rankings_path(self) -> str:
        return self._path("rankings")

    # -- loading ----------------------------------------------------------
    def _load(self) -> None:
        if os.path.exists(self._path("stimuli")):
            for s in _load_jsonl(self._path("stimuli"), _stimulus_from_dict,
                                 allow_partial_tail=True):
                self.stimuli[s.id] = s
        if os.path.exists(self._path("tasks")):
            for t in _load_jsonl(self._path("tasks"), task_from_dict,
                                 allow_partial_tail=True):
                self.tasks[t.task_id] = t
        if os.path.exists(self.responses_path):
            self.responses = _load_jsonl(self.responses_path,
                                         _response_from_dict,
                                         allow_partial_tail=True)
        if os.path.exists(self.rankings_path):
            self.rankings = _load_jsonl(self.rankings_path,
                                        _ranking_from_dict,
                                        allow_partial_tail=True)

    # -- appends ----------------------------------------------------------
    def _append(self, name: str, payload: dict) -> None:
        line = json.dumps(payload, sort_keys=True)
        with open(self._path(name), "a") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def add_stimulus(self, stimulus: Stimulus) -> None:
        with self._lock:
            if stimulus.id in self.stimuli:
                raise ValueError(f"duplicate stimulus id {stimulus.id!r}")
            self._append("stimuli", _record_to_dict(stimulus))
            self.stimuli[stimulus.id] = stimulus

    def add_task(self, task: OccamTask) -> None:
        with self._lock:
            if task.task_id in self.tasks:
                raise ValueError(f"duplicate task id {task.task_id!r}")
            self._append("tasks", task_to_dict(task))
            self.tasks[task.task_id] = task

    def append_response(self, rec: ResponseRecord) -> None:
        stim = self.stimuli.get(rec.stimulus_id)
        if stim is None:
            raise KeyError(f"unknown stimulus {rec.stimulus_id!r}")
        if len(rec.y_star) != len(stim.X_test):
            raise ValueError(
                f"y_star length {len(rec.y_star)} != test grid length "
                f"{len(stim.X_test)}")
        if not all(math.isfinite(v) for v in rec.y_star):
            raise ValueError("y_star must be finite")
        with self._lock:
            self._append("responses", _record_to_dict(rec))
            self.responses.append(rec)

    def append_ranking(self, rec: RankingRecord) -> None:
        if rec.task_id not in self.tasks:
            raise KeyError(f"unknown task {rec.task_id!r}")
        with self._lock:
            self._append("rankings", _record_to_dict(rec))
            self.rankings.append(rec)

    # -- study flow --------------------------------------------------------
    def study_items(self):
        """Default presentation order: stimuli, then ranking tasks, in
        insertion order."""
        return ([("stimulus", sid) for sid in self.stimuli]
                + [("task", tid) for tid in self.tasks])

    def next_item(self, participant_id: str, items=None):
        """First study item this participant has not answered, else None."""
        answered_stimuli = {r.stimulus_id for r in self.responses
                            if r.participant_id == participant_id}
        answered_tasks = {r.task_id for r in self.rankings
                          if r.participant_id == participant_id}
        for kind, item_id in (items if items is not None else
                              self.study_items()):
            if kind == "stimulus" and item_id not in answered_stimuli:
                return kind, item_id
            if kind == "task" and item_id not in answered_tasks:
                return kind, item_id
        return None
