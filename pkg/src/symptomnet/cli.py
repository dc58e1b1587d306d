"""Command-line entry points driving the full train/calibrate/evaluate workflow.

Subcommands: generate, fit, predict, calibrate, evaluate, serve. All outputs
are deterministic for fixed seeds (byte-identical files across runs).
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import model, synthgen, workflow
from .data import load_csv, save_csv
from .estimation import EssConfig, fit_bdeu
from .graph import BayesNet, load_network, save_network, validate_network
from .pipeline import (
    fit_calibrator,
    load_binner,
    load_calibrators,
    save_binner,
    save_calibrators,
)


def _cohort_domains() -> dict[str, tuple[str, ...]]:
    domains = {
        model.DEPRESSION: model.CONDITION_STATES,
        model.ANXIETY: model.CONDITION_STATES,
        **{s: model.SEVERITY_STATES for s in model.SYMPTOMS},
        **{n: model.SEVERITY_STATES for n in model.SURROGATES},
        "diagnosis": ("no", "yes"),
    }
    for column, fractions in synthgen.DEFAULT_GROUPS.items():
        domains[column] = tuple(fractions)
    return domains


def load_cohort(path: str | Path):
    return load_csv(path, _cohort_domains())


@click.group()
def main():
    """Symptom-level depression/anxiety assessment toolkit."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Generator config JSON; defaults are used when omitted.")
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--n-dev", default=30000, show_default=True, type=int)
@click.option("--n-cal", default=6000, show_default=True, type=int)
@click.option("--n-test", default=5000, show_default=True, type=int)
def generate(config_path, out_dir, seed, n_dev, n_cal, n_test):
    """Write development/calibration/test cohort CSVs with disjoint user ids."""
    base = {}
    if config_path:
        base = json.loads(Path(config_path).read_text())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    splits = (("development", n_dev), ("calibration", n_cal), ("test", n_test))
    id_start = int(base.get("id_start", 0))
    for offset, (name, n) in enumerate(splits):
        params = dict(base)
        params.update(n=n, seed=seed + offset, id_start=id_start)
        config = synthgen.GeneratorConfig.from_dict(params)
        table = synthgen.sample_cohort(config)
        save_csv(table, out / f"{name}.csv")
        (out / f"{name}.config.json").write_text(
            json.dumps(config.to_dict(), indent=1) + "\n"
        )
        id_start += n
    click.echo(f"wrote {len(splits)} cohort splits to {out}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--network-spec", "spec_path", type=click.Path(exists=True), default=None,
              help="Optional structure-only network JSON; default is the built-in topology.")
@click.option("--ess", default=8000.0, show_default=True, type=float)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--bins-out", type=click.Path(), default=None,
              help="Where to write the fitted quartile binner (default: <out>.bins.json).")
@click.option("--no-condition-edge", is_flag=True, help="Drop the Depression->Anxiety edge.")
def fit(data_path, spec_path, ess, out_path, bins_out, no_condition_edge):
    """Fit quartile bins and Bayesian CPDs on a development cohort CSV."""
    table = load_cohort(data_path)
    if spec_path:
        spec = load_network(spec_path).spec
    else:
        spec = model.assessment_network(condition_edge=not no_condition_edge)
    binner = workflow.fit_binner(table)
    train = workflow.training_table(workflow.discretize(table, binner))
    cpds = fit_bdeu(spec, train, EssConfig(ess))
    report = validate_network(spec, cpds)
    if not report.ok:
        raise click.ClickException("fitted network invalid: " + "; ".join(report.violations))
    save_network(BayesNet(spec, cpds), out_path)
    save_binner(binner, bins_out or f"{out_path}.bins.json")
    click.echo(f"wrote network to {out_path}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--network", "network_path", required=True, type=click.Path(exists=True))
@click.option("--bins", "bins_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def predict(data_path, network_path, bins_path, out_path):
    """Score a cohort CSV: raw condition probabilities plus target labels."""
    table = load_cohort(data_path)
    net = load_network(network_path)
    binner = load_binner(bins_path)
    disc = workflow.discretize(table, binner)
    scores = workflow.condition_scores(net, disc)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["depression_score", "depression_label", "anxiety_score", "anxiety_label"]
        )
        dep_labels = workflow.condition_labels(table, model.DEPRESSION)
        anx_labels = workflow.condition_labels(table, model.ANXIETY)
        for i in range(table.n_rows):
            writer.writerow([
                repr(float(scores[model.DEPRESSION][i])),
                int(dep_labels[i]),
                repr(float(scores[model.ANXIETY][i])),
                int(anx_labels[i]),
            ])
    click.echo(f"wrote scores to {out_path}")


@main.command()
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True),
              help="Prediction CSV from the predict command.")
@click.option("--labels", "labels_path", type=click.Path(exists=True), default=None,
              help="Optional separate labels CSV; defaults to labels in --scores.")
@click.option("--bags", default=10, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
def calibrate(scores_path, labels_path, bags, seed, out_path):
    """Fit bagged isotonic calibrators for both conditions."""
    with open(scores_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    label_rows = rows
    if labels_path:
        with open(labels_path, newline="") as fh:
            label_rows = list(csv.DictReader(fh))
        if len(label_rows) != len(rows):
            raise click.ClickException("scores and labels files differ in length")
    calibrators = {}
    for condition, prefix in ((model.DEPRESSION, "depression"), (model.ANXIETY, "anxiety")):
        scores = np.array([float(r[f"{prefix}_score"]) for r in rows])
        labels = np.array([int(r[f"{prefix}_label"]) for r in label_rows])
        defined = labels >= 0
        calibrators[condition] = fit_calibrator(
            scores[defined], labels[defined], n_bags=bags, seed=seed
        )
    save_calibrators(calibrators, out_path)
    click.echo(f"wrote calibrators to {out_path}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--network", "network_path", required=True, type=click.Path(exists=True))
@click.option("--bins", "bins_path", required=True, type=click.Path(exists=True))
@click.option("--calibrator", "calibrator_path", type=click.Path(exists=True), default=None)
@click.option("--threshold", default=0.5, show_default=True, type=float)
@click.option("--groups", default="sex,age_group", show_default=True,
              help="Comma-separated demographic columns for the fairness battery.")
@click.option("--report", "report_path", required=True, type=click.Path())
def evaluate(data_path, network_path, bins_path, calibrator_path, threshold, groups, report_path):
    """Run the full metrics battery on a cohort CSV and write a JSON report."""
    table = load_cohort(data_path)
    net = load_network(network_path)
    binner = load_binner(bins_path)
    calibrators = load_calibrators(calibrator_path) if calibrator_path else None
    disc = workflow.discretize(table, binner)
    group_columns = tuple(g for g in groups.split(",") if g)
    report = workflow.evaluation_report(
        net, disc, calibrators=calibrators, threshold=threshold, group_columns=group_columns
    )
    Path(report_path).write_text(json.dumps(report, indent=1) + "\n")
    click.echo(f"wrote report to {report_path}")


@main.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--network", "network_path", required=True, type=click.Path(exists=True))
@click.option("--calibrator", "calibrator_path", type=click.Path(exists=True), default=None)
def serve(port, host, network_path, calibrator_path):
    """Run the assessment HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(network_path, calibrator_path)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    sys.exit(main())
