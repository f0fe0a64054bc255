"""HTTP facade: persistent study store plus the FastAPI application that
serves stimuli and ranking tasks and ingests participant submissions."""

from .store import StudyStore
from .app import create_app

__all__ = ["StudyStore", "create_app"]
