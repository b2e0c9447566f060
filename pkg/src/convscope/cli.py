"""Command-line entry points: ingest, layout, gen-fixture, serve, verify."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import tinynet
from .errors import ConvscopeError
from .layout import EDGE_FACETS, FACETS, FacetState, LayoutParams, assemble, serialize_document
from .snapshot import parse_snapshot, serialize_snapshot

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INTERNAL = 2


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        _fail(str(exc), EXIT_INVALID)
        raise  # unreachable


@click.group()
def main() -> None:
    """Turn CNN training snapshots into clustered-graph visualizations."""


@main.command()
@click.argument("file", type=click.Path())
def ingest(file: str) -> None:
    """Validate a snapshot file and print its id."""
    raw = _read(file)
    try:
        snapshot = parse_snapshot(raw)
    except ConvscopeError as exc:
        _fail(str(exc), EXIT_INVALID)
    except Exception as exc:  # anything not raised by validation itself
        _fail(f"internal: {exc}", EXIT_INTERNAL)
    click.echo(snapshot.id)


@main.command()
@click.argument("file", type=click.Path())
@click.option("--out", type=click.Path(), default=None, help="Output path (default stdout).")
@click.option("--facet", default="features", type=click.Choice(FACETS))
@click.option("--classes", default=None, help="Comma-separated class indices.")
@click.option("--quantile", default=1.0, type=float)
@click.option("--tau", default=None, type=float)
@click.option("--stop", default=None, type=float)
@click.option("--edge-facet", default="weight", type=click.Choice(EDGE_FACETS))
@click.option("--method", default="meanshift", type=click.Choice(["meanshift", "kmeans"]))
@click.option("--kmeans-k", default=None, type=int)
@click.option("--bandwidth", default=None, type=float)
@click.option("--seed", default=0, type=int)
def layout(
    file: str,
    out: str | None,
    facet: str,
    classes: str | None,
    quantile: float,
    tau: float | None,
    stop: float | None,
    edge_facet: str,
    method: str,
    kmeans_k: int | None,
    bandwidth: float | None,
    seed: int,
) -> None:
    """Build the layout document for a snapshot file."""
    raw = _read(file)
    try:
        snapshot = parse_snapshot(raw)
        selection = None
        if classes:
            selection = tuple(int(part) for part in classes.split(","))
        params = LayoutParams(
            method=method, k=kmeans_k, bandwidth=bandwidth, seed=seed,
            tau=tau, stop=stop, edge_facet=edge_facet,
        )
        state = FacetState(facet=facet, classes=selection, quantile=quantile)
        doc = serialize_document(assemble(snapshot, params, state))
    except (ConvscopeError, ValueError) as exc:
        _fail(str(exc), EXIT_INVALID)
    except Exception as exc:
        _fail(f"internal: {exc}", EXIT_INTERNAL)
    if out is None:
        click.echo(doc.decode())
    else:
        Path(out).write_bytes(doc)


@main.command("gen-fixture")
@click.option("--dead-relu", is_flag=True, help="Emit the mostly-dead diagnostic net.")
@click.option("--seed", default=0, type=int)
@click.option("--out", type=click.Path(), default=None, help="Output path (default stdout).")
def gen_fixture(dead_relu: bool, seed: int, out: str | None) -> None:
    """Generate a synthetic snapshot file."""
    try:
        if dead_relu:
            net = tinynet.dead_relu_net(seed=seed)
            name = f"dead-relu-{seed}"
        else:
            net = tinynet.fixture_net(seed=seed)
            name = f"fixture-{seed}"
        data = tinynet.make_dataset(net, images_per_class=4, seed=seed)
        snapshot = tinynet.emit_snapshot(net, data, name)
        text = serialize_snapshot(snapshot)
    except Exception as exc:
        _fail(f"internal: {exc}", EXIT_INTERNAL)
    if out is None:
        click.echo(text)
    else:
        Path(out).write_text(text)


@main.command()
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--data-dir", type=click.Path(), default=None, help="Overrides CONVSCOPE_DATA.")
def serve(port: int, host: str, data_dir: str | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(data_dir), host=host, port=port, log_level="info")


@main.command()
def verify() -> None:
    """Run every cross-check oracle in-process and report pass/fail."""
    from .verification import run_checks

    sys.exit(run_checks(report=click.echo))


if __name__ == "__main__":
    main()
