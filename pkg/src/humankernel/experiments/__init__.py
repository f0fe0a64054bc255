"""Experiment drivers: kernel reconstruction from extrapolation draws,
progressive function learning, unconventional stimuli, Occam's-razor
ranking tasks, and a marginal-likelihood bias study."""

from .reconstruction import run_reconstruction
from .progressive import run_progressive
from .unconventional import run_unconventional
from .occam import build_occam_task, aggregate_rankings, run_occam
from .bias import run_bias_study

__all__ = [
    "run_reconstruction", "run_progressive", "run_unconventional",
    "build_occam_task", "aggregate_rankings", "run_occam", "run_bias_study",
]
