"""Response data model and processing: stimuli, extrapolation and ranking
records, DrawSet assembly, response filtering, and agglomerative clustering.

Stores are line-delimited JSON; whole-file saves go through write-then-rename
so a crashed writer never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .gp import DrawSet

__all__ = [
    "Stimulus", "ResponseRecord", "RankingRecord",
    "to_drawset", "total_variation", "value_range", "filter_responses",
    "agglomerative_cluster",
    "load_stimuli", "save_stimuli",
    "load_responses", "save_responses",
    "load_rankings", "save_rankings",
    "export_responses_csv",
]


@dataclass(frozen=True)
class Stimulus:
    id: str
    X_train: tuple[float, ...]
    y_train: tuple[float, ...]
    X_test: tuple[float, ...]
    family: str = "gp-sample"  # gp-sample | sawtooth | step
    generator_params: dict = field(default_factory=dict)
    y_range: tuple[float, float] | None = None  # display range for the UI

    def __post_init__(self):
        Xtr = tuple(float(x) for x in self.X_train)
        Xte = tuple(float(x) for x in self.X_test)
        for name, grid in (("X_train", Xtr), ("X_test", Xte)):
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if set(Xtr) & set(Xte):
            raise ValueError("X_test must be disjoint from X_train")
        if len(self.y_train) != len(Xtr):
            raise ValueError("y_train length must match X_train")
        object.__setattr__(self, "X_train", Xtr)
        object.__setattr__(self, "y_train", tuple(float(v) for v in self.y_train))
        object.__setattr__(self, "X_test", Xte)


@dataclass(frozen=True)
class ResponseRecord:
    participant_id: str
    stimulus_id: str
    y_star: tuple[float, ...]
    response_time_s: float
    submitted_at: float  # unix seconds

    def __post_init__(self):
        ys = tuple(float(v) for v in self.y_star)
        if not all(np.isfinite(ys)):
            raise ValueError("y_star must be finite")
        if not (self.response_time_s > 0):
            raise ValueError("response_time_s must be > 0")
        object.__setattr__(self, "y_star", ys)


@dataclass(frozen=True)
class RankingRecord:
    participant_id: str
    task_id: str
    order: tuple[int, ...]  # position 1 = best fit; permutation of 1..7
    plausibility_answer: str | None = None  # likely | unlikely
    submitted_at: float = 0.0

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        if sorted(order) != list(range(1, 8)):
            raise ValueError("order must be a permutation of 1..7")
        if self.plausibility_answer not in (None, "likely", "unlikely"):
            raise ValueError("plausibility_answer must be likely/unlikely")
        object.__setattr__(self, "order", order)


# ---------------------------------------------------------------------------
# processing
# ---------------------------------------------------------------------------

def to_drawset(stimulus: Stimulus, responses) -> tuple[DrawSet, list[str]]:
    """Stack responses into a DrawSet (one column per participant).

    Duplicate (participant, stimulus) submissions keep the latest; the
    returned warning list names the superseded ones.
    """
    responses = list(responses)
    if not responses:
        raise ValueError("no responses for stimulus")
    warnings: list[str] = []
    latest: dict[str, ResponseRecord] = {}
    for r in responses:
        if r.stimulus_id != stimulus.id:
            raise ValueError(
                f"response by {r.participant_id} references stimulus "
                f"{r.stimulus_id!r}, expected {stimulus.id!r}")
        if len(r.y_star) != len(stimulus.X_test):
            raise ValueError(
                f"response by {r.participant_id} has {len(r.y_star)} values, "
                f"grid has {len(stimulus.X_test)}")
        prev = latest.get(r.participant_id)
        if prev is not None:
            keep, drop = (r, prev) if r.submitted_at >= prev.submitted_at else (prev, r)
            warnings.append(
                f"duplicate submission by {r.participant_id}; kept "
                f"submitted_at={keep.submitted_at}")
            latest[r.participant_id] = keep
        else:
            latest[r.participant_id] = r
    ordered = sorted(latest.values(), key=lambda r: (r.participant_id, r.submitted_at))
    Y = np.column_stack([np.asarray(r.y_star) for r in ordered])
    ds = DrawSet(np.asarray(stimulus.X_train), np.asarray(stimulus.y_train),
                 np.asarray(stimulus.X_test), Y)
    return ds, warnings


def total_variation(y_star) -> float:
    y = np.asarray(y_star, dtype=float).ravel()
    if y.size < 1:
        raise ValueError("empty response")
    return float(np.sum(np.abs(np.diff(y))))


def value_range(y_star) -> float:
    """max - min; alternative variability measure to total_variation."""
    y = np.asarray(y_star, dtype=float).ravel()
    return float(np.max(y) - np.min(y))


def filter_responses(responses, rt_min_s: float = 50.0, rt_max_s: float = 200.0,
                     tv_max: float = 3.0, measure=total_variation):
    """Partition responses by the response-time window and variability cap.

    Pass iff rt_min_s <= response_time_s <= rt_max_s (inclusive) and
    measure(y_star) <= tv_max.  Returns (pass list, fail list).
    """
    if rt_min_s <= 0 or rt_max_s <= 0 or rt_min_s >= rt_max_s:
        raise ValueError("need 0 < rt_min_s < rt_max_s")
    ok, bad = [], []
    for r in responses:
        good = (rt_min_s <= r.response_time_s <= rt_max_s
                and measure(r.y_star) <= tv_max)
        (ok if good else bad).append(r)
    return ok, bad


def agglomerative_cluster(responses, k: int) -> list[int]:
    """Average-linkage agglomerative clustering of y_star vectors under
    Euclidean distance, down to k clusters.

    Deterministic: exact distance ties merge the lexicographically smallest
    cluster pair, clusters identified by their smallest member index.
    Returns a label (0..k-1) per response, labels ordered by smallest member.
    """
    responses = list(responses)
    n = len(responses)
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= number of responses")
    pts = np.asarray([r.y_star for r in responses], dtype=float)
    D = np.sqrt(np.maximum(
        np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2), 0.0))
    clusters: list[list[int]] = [[i] for i in range(n)]
    while len(clusters) > k:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                d = float(np.mean(D[np.ix_(clusters[a], clusters[b])]))
                key = (d, min(clusters[a][0], clusters[b][0]),
                       max(clusters[a][0], clusters[b][0]))
                if best is None or key < best[0]:
                    best = (key, a, b)
        _, a, b = best
        merged = sorted(clusters[a] + clusters[b])
        clusters = [c for i, c in enumerate(clusters) if i not in (a, b)]
        clusters.append(merged)
    clusters.sort(key=lambda c: c[0])
    labels = [0] * n
    for lab, members in enumerate(clusters):
        for i in members:
            labels[i] = lab
    return labels


# ---------------------------------------------------------------------------
# persistence (JSON lines, write-then-rename)
# ---------------------------------------------------------------------------

def _record_to_dict(rec) -> dict:
    d = asdict(rec)
    for key in ("X_train", "y_train", "X_test", "y_star", "order", "y_range"):
        if key in d and d[key] is not None:
            d[key] = list(d[key])
    return d


def _save_jsonl(path, records, to_dict=_record_to_dict) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        for rec in records:
            fh.write(json.dumps(to_dict(rec)) + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _load_jsonl(path, from_dict, allow_partial_tail: bool = False) -> list:
    out = []
    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for i, line in enumerate(lines, start=1):
        try:
            out.append(from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            if allow_partial_tail and i == len(lines):
                break  # interrupted final append; earlier records stand
            raise ValueError(f"{path}: malformed record at line {i}: {e}") from e
    return out


def _stimulus_from_dict(d: dict) -> Stimulus:
    return Stimulus(
        id=d["id"], X_train=tuple(d["X_train"]), y_train=tuple(d["y_train"]),
        X_test=tuple(d["X_test"]), family=d.get("family", "gp-sample"),
        generator_params=d.get("generator_params", {}),
        y_range=tuple(d["y_range"]) if d.get("y_range") else None,
    )


def _response_from_dict(d: dict) -> ResponseRecord:
    return ResponseRecord(
        participant_id=d["participant_id"], stimulus_id=d["stimulus_id"],
        y_star=tuple(d["y_star"]), response_time_s=float(d["response_time_s"]),
        submitted_at=float(d["submitted_at"]),
    )


def _ranking_from_dict(d: dict) -> RankingRecord:
    return RankingRecord(
        participant_id=d["participant_id"], task_id=d["task_id"],
        order=tuple(d["order"]),
        plausibility_answer=d.get("plausibility_answer"),
        submitted_at=float(d.get("submitted_at", 0.0)),
    )


def save_stimuli(path, stimuli):
    _save_jsonl(path, stimuli)


def load_stimuli(path, allow_partial_tail: bool = False) -> list[Stimulus]:
    return _load_jsonl(path, _stimulus_from_dict, allow_partial_tail)


def save_responses(path, responses):
    _save_jsonl(path, responses)


def load_responses(path, allow_partial_tail: bool = False) -> list[ResponseRecord]:
    return _load_jsonl(path, _response_from_dict, allow_partial_tail)


def save_rankings(path, rankings):
    _save_jsonl(path, rankings)


def load_rankings(path, allow_partial_tail: bool = False) -> list[RankingRecord]:
    return _load_jsonl(path, _ranking_from_dict, allow_partial_tail)


def export_responses_csv(path, stimuli, responses) -> None:
    """One row per grid point; fixed column order."""
    grid = {s.id: s.X_test for s in stimuli}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["participant_id", "stimulus_id", "x", "y", "response_time_s"])
        for r in responses:
            xs = grid.get(r.stimulus_id)
            if xs is None:
                raise ValueError(f"response references unknown stimulus {r.stimulus_id!r}")
            for x, y in zip(xs, r.y_star):
                writer.writerow([r.participant_id, r.stimulus_id,
                                 f"{x:.12g}", f"{y:.12g}", f"{r.response_time_s:.12g}"])
