"""Command-line entry points for analysis, reporting, simulation, and serving."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import pipeline
from .errors import ParetoSearchError, ParseError, SchemaError
from .rationality import DEFAULT_GRID, DEFAULT_THRESHOLD


def _fail(exc: ParetoSearchError) -> None:
    click.echo(f"error: {exc}", err=True)
    code = 2 if isinstance(exc, (SchemaError, ParseError)) else 1
    sys.exit(code)


@click.group()
def main():
    """Human search-game toolkit: collect sessions and analyze rationality."""


@main.command()
@click.option("--sessions", "sessions_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--threshold", default=DEFAULT_THRESHOLD, show_default=True, type=float)
@click.option("--grid", default=DEFAULT_GRID, show_default=True, type=int)
@click.option("--noise", default=1e-8, show_default=True, type=float)
@click.option("--raw-objectives", is_flag=True, help="Skip min-max normalization of the two objectives.")
@click.option("--seed", default=0, show_default=True, type=int, help="Reserved; analysis is deterministic.")
def analyze(sessions_path, out_dir, threshold, grid, noise, raw_objectives, seed):
    """Score every decision in a session log; write records.csv."""
    del seed  # step 1 is deterministic end to end
    try:
        sessions = pipeline.load_sessions(sessions_path)
        records = pipeline.step1(
            sessions,
            threshold=threshold,
            grid=grid,
            noise=noise,
            raw_objectives=raw_objectives,
        )
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        pipeline.save_records(out / "records.csv", records)
        click.echo(f"wrote {len(records)} records to {out / 'records.csv'}")
    except ParetoSearchError as exc:
        _fail(exc)


@main.command()
@click.option("--records", "records_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--k", default=2, show_default=True, type=int)
@click.option("--cf", default=0.02, show_default=True, type=float,
              help="Confidence factor for the inverted-order tree.")
@click.option("--seed", default=0, show_default=True, type=int)
def report(records_path, out_dir, k, cf, seed):
    """Aggregate records into signatures, clusters, trees, and summaries."""
    try:
        records = pipeline.load_records(records_path)
        bundle = pipeline.step2(records, out_dir=out_dir, k=k, seed=seed, cf_inverted=cf)
        click.echo(
            "Pareto counts per measure: "
            + ", ".join(f"{t}={n}" for t, n in bundle.pareto_counts.items())
        )
        for name, tree in bundle.trees.items():
            click.echo(
                f"tree[{name}] cf={tree.confidence_factor} nodes={tree.nodes} "
                f"train={tree.train_accuracy:.4f} valid={tree.valid_accuracy:.4f}"
            )
    except ParetoSearchError as exc:
        _fail(exc)


@main.command()
@click.option("--policy", default="random", show_default=True)
@click.option("--games", default=1, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--clicks", default=pipeline.MAX_CLICKS, show_default=True, type=int)
@click.option("--out", "out_path", default="-", show_default=True,
              help="Output JSONL path, - for stdout.")
def simulate(policy, games, seed, clicks, out_path):
    """Generate synthetic game sessions for testing."""
    try:
        sessions = pipeline.simulate(games, seed=seed, policy=policy, clicks=clicks)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if out_path == "-":
        import json

        for s in sessions:
            click.echo(json.dumps(pipeline.session_to_dict(s)))
    else:
        pipeline.save_sessions(out_path, sessions)
        click.echo(f"wrote {len(sessions)} sessions to {out_path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--data-dir", default="./game_data", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--static-dir", default=None, type=click.Path(file_okay=False),
              help="Directory with the built UI bundle to host at /.")
@click.option("--shuffle-seed", default=None, type=int,
              help="Shuffle the task order with this seed (stored with the data).")
def serve(host, port, data_dir, static_dir, shuffle_seed):
    """Run the click-to-query game service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir, shuffle_seed=shuffle_seed, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
