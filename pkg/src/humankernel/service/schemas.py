"""Request/response bodies for the study service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class Health(BaseModel):
    status: str = "ok"


class NextItem(BaseModel):
    done: bool = False
    kind: str | None = None  # "stimulus" | "task"
    id: str | None = None


class StimulusOut(BaseModel):
    id: str
    X_train: list[float]
    y_train: list[float]
    X_test: list[float]
    family: str
    y_range: tuple[float, float] | None = None


class ResponseIn(BaseModel):
    participant_id: str = Field(min_length=1)
    stimulus_id: str
    y_star: list[float]
    response_time_s: float = Field(gt=0)


class ResponseOut(ResponseIn):
    submitted_at: float


class CandidateCurve(BaseModel):
    position: int  # 1-based on-screen position (shuffled, unlabeled)
    curve: list[float]


class OccamTaskOut(BaseModel):
    task_id: str
    X: list[float]
    y: list[float]
    display_grid: list[float]
    curves: list[CandidateCurve]
    shuffle_token: str


class RankingIn(BaseModel):
    participant_id: str = Field(min_length=1)
    task_id: str
    shuffle_token: str
    order: list[int] = Field(min_length=7, max_length=7)  # display positions, best first
    plausibility_answer: str | None = None


class RankingOut(BaseModel):
    participant_id: str
    task_id: str
    order: list[int]  # internal labels, best first
    plausibility_answer: str | None
    submitted_at: float
