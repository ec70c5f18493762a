"""Command-line entry points: serve, validate-feed, simulate."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import simulator
from .api import ServiceConfig, serve as run_serve
from .errors import TransitError
from .feed import load_feed
from .tracker import VehicleStore


@click.group()
def main():
    """Real-time transit tracking service."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def serve(config_path):
    """Start the HTTP service."""
    try:
        config = ServiceConfig.from_json_file(config_path)
        if not Path(config.feed_dir).is_dir():
            raise TransitError(f"feed_dir does not exist: {config.feed_dir}")
        run_serve(config)
    except (TransitError, OSError, ValueError, KeyError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


@main.command("validate-feed")
@click.argument("feed_dir", type=click.Path(exists=True))
def validate_feed(feed_dir):
    """Load a feed directory and print a validation report."""
    try:
        feed = load_feed(feed_dir)
    except TransitError as e:
        click.echo(f"INVALID: {type(e).__name__}: {e}")
        sys.exit(1)
    click.echo(f"OK: {len(feed.stops)} stops, {len(feed.routes)} routes, "
               f"{len(feed.patterns)} patterns, {len(feed.trips)} trips")


@main.command()
@click.option("--feed", "feed_dir", required=True, type=click.Path(exists=True))
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--post", "post_url", default=None, help="POST fixes to a live service")
@click.option("--out", "out_path", default=None, type=click.Path(), help="write trace JSONL here")
@click.option("--realtime", is_flag=True, help="sleep between emissions instead of simulated time")
def simulate(feed_dir, scenario_path, post_url, out_path, realtime):
    """Generate GPS traces for a scenario and replay them."""
    try:
        feed = load_feed(feed_dir)
        spec = simulator.ScenarioSpec.from_json(json.loads(Path(scenario_path).read_text()))
    except (TransitError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)

    if out_path:
        lines = []
        for i, run in enumerate(spec.runs):
            trace = simulator.generate_trace(feed, run, spec.seed, i, spec.start_of_day_ts)
            lines.append(simulator.trace_to_jsonl(trace))
        Path(out_path).write_text("".join(lines), encoding="utf-8")
        click.echo(f"wrote trace to {out_path}")
        if not post_url:
            return

    if post_url:
        target = simulator.HttpTarget(post_url)
    else:
        target = simulator.InProcessTarget(VehicleStore(feed), feed)
    report = simulator.run_scenario(feed, spec, target, realtime=realtime)
    click.echo(simulator.report_to_json(report), nl=False)


if __name__ == "__main__":
    main()
