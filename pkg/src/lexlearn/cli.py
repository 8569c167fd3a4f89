"""Command-line interface: KG validation, EIG inspection, simulations, serving."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .design import select_bundle
from .inference import NoiseConfig, prior
from .session import SessionConfig
from .simulator import compare_policies, trial_rows
from .taxonomy import KGError, load_kg


@click.group()
def main() -> None:
    """Lexical-learning engine for search: learn what an unknown query word means."""


def _load(kg_path: str):
    try:
        return load_kg(Path(kg_path).read_bytes())
    except FileNotFoundError:
        raise click.ClickException(f"no such file: {kg_path}")
    except KGError as exc:
        raise click.ClickException(str(exc))


@main.command("validate-kg")
@click.argument("kg_file")
def validate_kg(kg_file: str) -> None:
    """Validate a KG document; exit 0 if it satisfies every invariant."""
    kg = _load(kg_file)
    click.echo(f"{kg.id}: {len(kg.products)} products, {len(kg.nodes)} nodes, valid")


@main.command("eig-table")
@click.option("--kg", "kg_file", required=True, help="KG document to load.")
@click.option("--bundle-size", default=2, show_default=True)
@click.option("--epsilon", default=0.05, show_default=True)
def eig_table(kg_file: str, bundle_size: int, epsilon: float) -> None:
    """Print the EIG table for the prior belief, sorted by descending EIG."""
    kg = _load(kg_file)
    noise = NoiseConfig(epsilon=epsilon)
    try:
        _, reports = select_bundle(prior(kg), kg, bundle_size, noise)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps([r.to_dict() for r in reports], indent=2))


@main.command("simulate")
@click.option("--kg", "kg_file", required=True)
@click.option("--query", required=True)
@click.option("--true-node", required=True)
@click.option("--policy", type=click.Choice(["eig", "random", "both"]), default="both",
              show_default=True)
@click.option("--trials", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--epsilon", default=0.05, show_default=True)
@click.option("--threshold", default=0.95, show_default=True)
@click.option("--max-steps", default=20, show_default=True)
@click.option("--bundle-size", default=2, show_default=True)
@click.option("--out", "out_file", default=None, help="Write the JSON summary here.")
@click.option("--csv", "csv_file", default=None, help="Write per-trial rows here.")
def simulate(
    kg_file: str,
    query: str,
    true_node: str,
    policy: str,
    trials: int,
    seed: int,
    epsilon: float,
    threshold: float,
    max_steps: int,
    bundle_size: int,
    out_file: str | None,
    csv_file: str | None,
) -> None:
    """Run seeded simulated-user trials and print a deterministic JSON summary."""
    kg = _load(kg_file)
    if true_node not in kg.nodes:
        raise click.ClickException(f"unknown node id: {true_node}")
    config = SessionConfig(
        bundle_size=bundle_size,
        noise=NoiseConfig(epsilon=epsilon),
        convergence_threshold=threshold,
        max_steps=max_steps,
    )
    policies = ("eig", "random") if policy == "both" else (policy,)
    summary = compare_policies(
        kg, query, true_node, config, trials, seed, policies=policies
    )
    rows = trial_rows(summary)
    summary.pop("_results")
    text = json.dumps(summary, indent=2, sort_keys=True)
    if out_file:
        Path(out_file).write_text(text + "\n", encoding="utf-8")
    click.echo(text)
    if csv_file:
        with open(csv_file, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(
                f, fieldnames=["seed", "policy", "steps", "status", "true_node_mass"]
            )
            writer.writeheader()
            writer.writerows(rows)


@main.command("serve")
@click.option("--bind", default="127.0.0.1:8000", show_default=True,
              help="host:port to listen on.")
@click.option("--kg-dir", required=True, help="Directory of KG documents (*.json).")
@click.option("--log-dir", required=True, help="Directory for session logs.")
def serve(bind: str, kg_dir: str, log_dir: str) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise click.ClickException(f"--bind must be host:port, got {bind!r}")
    try:
        app = create_app(Path(kg_dir), Path(log_dir))
    except (FileNotFoundError, KGError) as exc:
        raise click.ClickException(str(exc))
    uvicorn.run(app, host=host, port=int(port))


if __name__ == "__main__":
    sys.exit(main())
