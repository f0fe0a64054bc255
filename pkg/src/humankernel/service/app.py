"""FastAPI application for running a study against a StudyStore.

Candidate curves for ranking tasks are presented in a per-participant
shuffled order derived from a keyed hash of (participant_id, task_id,
study_seed), so reloads see the same order. Submitted rankings reference
on-screen positions plus the shuffle token; the server de-shuffles them back
to internal candidate labels before storing.
"""

from __future__ import annotations

import hashlib
import time

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse

from ..responses import RankingRecord, ResponseRecord
from . import schemas
from .store import StudyStore

__all__ = ["create_app", "shuffle_for"]


def shuffle_for(participant_id: str, task_id: str, study_seed: int):
    """Stable presentation permutation and its token.

    perm[position-1] = internal candidate label shown at that position.
    """
    key = f"{participant_id}|{task_id}|{study_seed}".encode()
    digest = hashlib.sha256(key).hexdigest()
    rng = np.random.default_rng(int(digest[:16], 16))
    perm = [int(v) + 1 for v in rng.permutation(7)]
    return perm, digest[:32]


def create_app(store: StudyStore, study_seed: int = 0, items=None) -> FastAPI:
    app = FastAPI(title="function-extrapolation study service")
    app.state.store = store

    @app.get("/api/health", response_model=schemas.Health)
    def health():
        return schemas.Health()

    @app.get("/api/study/{participant_id}/next",
             response_model=schemas.NextItem,
             response_model_exclude_none=True)
    def next_item(participant_id: str):
        nxt = store.next_item(participant_id, items)
        if nxt is None:
            return schemas.NextItem(done=True)
        kind, item_id = nxt
        return schemas.NextItem(done=False, kind=kind, id=item_id)

    @app.get("/api/stimuli/{stimulus_id}", response_model=schemas.StimulusOut)
    def get_stimulus(stimulus_id: str):
        stim = store.stimuli.get(stimulus_id)
        if stim is None:
            raise HTTPException(404, f"unknown stimulus {stimulus_id!r}")
        return schemas.StimulusOut(
            id=stim.id, X_train=list(stim.X_train),
            y_train=list(stim.y_train), X_test=list(stim.X_test),
            family=stim.family, y_range=stim.y_range)

    @app.post("/api/responses", response_model=schemas.ResponseOut)
    def post_response(body: schemas.ResponseIn):
        try:
            rec = ResponseRecord(
                participant_id=body.participant_id,
                stimulus_id=body.stimulus_id,
                y_star=tuple(body.y_star),
                response_time_s=body.response_time_s,
                submitted_at=time.time())
            store.append_response(rec)
        except KeyError as e:
            raise HTTPException(404, str(e)) from e
        except ValueError as e:
            raise HTTPException(400, str(e)) from e
        return schemas.ResponseOut(
            participant_id=rec.participant_id, stimulus_id=rec.stimulus_id,
            y_star=list(rec.y_star), response_time_s=rec.response_time_s,
            submitted_at=rec.submitted_at)

    @app.get("/api/occam/{task_id}", response_model=schemas.OccamTaskOut)
    def get_occam(task_id: str, participant_id: str = Query(min_length=1)):
        task = store.tasks.get(task_id)
        if task is None:
            raise HTTPException(404, f"unknown task {task_id!r}")
        perm, token = shuffle_for(participant_id, task_id, study_seed)
        by_label = {c.label: c for c in task.candidates}
        curves = [schemas.CandidateCurve(position=pos,
                                         curve=list(by_label[lab].curve))
                  for pos, lab in enumerate(perm, start=1)]
        return schemas.OccamTaskOut(
            task_id=task.task_id, X=list(task.X), y=list(task.y),
            display_grid=list(task.display_grid), curves=curves,
            shuffle_token=token)

    @app.post("/api/rankings", response_model=schemas.RankingOut)
    def post_ranking(body: schemas.RankingIn):
        if body.task_id not in store.tasks:
            raise HTTPException(404, f"unknown task {body.task_id!r}")
        perm, token = shuffle_for(body.participant_id, body.task_id,
                                  study_seed)
        if body.shuffle_token != token:
            raise HTTPException(409, "shuffle_token mismatch")
        if sorted(body.order) != list(range(1, 8)):
            raise HTTPException(400,
                                "order must be a permutation of positions 1..7")
        internal = tuple(perm[pos - 1] for pos in body.order)
        try:
            rec = RankingRecord(
                participant_id=body.participant_id, task_id=body.task_id,
                order=internal, plausibility_answer=body.plausibility_answer,
                submitted_at=time.time())
            store.append_ranking(rec)
        except KeyError as e:
            raise HTTPException(404, str(e)) from e
        except ValueError as e:
            raise HTTPException(400, str(e)) from e
        return schemas.RankingOut(
            participant_id=rec.participant_id, task_id=rec.task_id,
            order=list(rec.order),
            plausibility_answer=rec.plausibility_answer,
            submitted_at=rec.submitted_at)

    def _export(records, to_line) -> PlainTextResponse:
        body = "".join(to_line(r) for r in records)
        return PlainTextResponse(body, media_type="application/x-ndjson")

    @app.get("/api/export/responses")
    def export_responses():
        import json

        from ..responses import _record_to_dict
        return _export(store.responses,
                       lambda r: json.dumps(_record_to_dict(r),
                                            sort_keys=True) + "\n")

    @app.get("/api/export/rankings")
    def export_rankings():
        import json

        from ..responses import _record_to_dict
        return _export(store.rankings,
                       lambda r: json.dumps(_record_to_dict(r),
                                            sort_keys=True) + "\n")

    return app
