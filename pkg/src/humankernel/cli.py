"""Command-line entry point.

Experiment subcommands run in-process and write CSV/SVG reports; `serve`
starts the HTTP study service over a store directory; `export` is a thin
HTTP client for dumping collected records from a running service.
"""

from __future__ import annotations

import json

import click

from .experiments import (run_bias_study, run_occam, run_progressive,
                          run_reconstruction, run_unconventional)
from .experiments.report import emit_report


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise click.ClickException("config must be a JSON object")
    return cfg


def _run_and_emit(driver, seed, out, config, **overrides):
    kwargs = _load_config(config)
    kwargs.update(overrides)
    kwargs["seed"] = seed
    result = driver(**kwargs)
    files = emit_report(result["report"], out)
    for f in files:
        click.echo(f)


def _experiment_options(fn):
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--out", type=click.Path(), required=True,
                      help="Output directory for CSV/SVG report files.")(fn)
    fn = click.option("--config", type=click.Path(exists=True), default=None,
                      help="JSON object of experiment parameters.")(fn)
    return fn


@click.group()
def main():
    """GP kernel-learning experiments and study service."""


@main.command()
@_experiment_options
def reconstruct(seed, out, config):
    """Kernel reconstruction from extrapolation draws."""
    _run_and_emit(run_reconstruction, seed, out, config)


@main.command()
@_experiment_options
def progressive(seed, out, config):
    """Progressive function learning over stimulus sequences."""
    _run_and_emit(run_progressive, seed, out, config)


@main.command()
@_experiment_options
def unconventional(seed, out, config):
    """Sawtooth/step extrapolation with clustering and filters."""
    _run_and_emit(run_unconventional, seed, out, config)


@main.command()
@_experiment_options
def occam(seed, out, config):
    """Occam's-razor ranking tasks and marginal-likelihood structure."""
    _run_and_emit(run_occam, seed, out, config)


@main.command()
@_experiment_options
def bias(seed, out, config):
    """Length-scale estimation bias study."""
    _run_and_emit(run_bias_study, seed, out, config)


@main.command()
@click.option("--store", type=click.Path(), required=True,
              help="Store root directory (created if missing).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--study-seed", type=int, default=0, show_default=True)
@click.option("--demo", is_flag=True,
              help="Seed an empty store with a demo study (two stimuli "
                   "and one ranking task).")
def serve(store, host, port, study_seed, demo):
    """Run the HTTP study service."""
    import uvicorn

    from .service import StudyStore, create_app

    st = StudyStore(store)
    if demo and not st.stimuli and not st.tasks:
        from .experiments.occam import build_occam_task
        from .experiments.stimuli import make_sawtooth, make_step
        st.add_stimulus(make_sawtooth(2.0, 1.0, n_test=20,
                                      stimulus_id="sawtooth-1"))
        st.add_stimulus(make_step([2.5], [0.0, 3.0], n_test=20,
                                  stimulus_id="step-1"))
        st.add_task(build_occam_task(seed=study_seed))
    uvicorn.run(create_app(st, study_seed=study_seed), host=host, port=port)


@main.command()
@click.argument("kind", type=click.Choice(["responses", "rankings"]))
@click.option("--url", default="http://127.0.0.1:8000", show_default=True,
              help="Base URL of a running service.")
def export(kind, url):
    """Dump collected records from a running service as JSON lines."""
    import httpx

    resp = httpx.get(f"{url}/api/export/{kind}")
    resp.raise_for_status()
    click.echo(resp.text, nl=False)


if __name__ == "__main__":
    main()
