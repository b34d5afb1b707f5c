"""Command-line entry point: ``llmke run | evaluate | audit | compare | record-fixtures``."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import __version__
from .context import WikipediaClient, assemble_context
from .dataset import DatasetError, load_records, relation_profile
from .evaluation import EvaluationReport, overall_report
from .gap_audit import SparqlClient, audit_gaps, fetch_wikidata_truth, findings_jsonl, render_findings
from .http import LookupStore, MissingFixtureError, TransportError
from .pipeline import (RunAborted, RunConfig, compare_runs, config_from_manifest, format_comparison,
                       load_predictions, run)
from .prompting import PromptSetting

ABORTS = (RunAborted, MissingFixtureError, DatasetError, TransportError, FileNotFoundError, ValueError)


def _fail(e: Exception) -> None:
    click.echo(f"error: {e}", err=True)
    sys.exit(2)


def run_options(f):
    opts = [
        click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False)),
        click.option("--train", "train_path", type=click.Path(exists=True, dir_okay=False),
                     help="Training split for few-shot demonstrations."),
        click.option("--truth", "truth_path", type=click.Path(exists=True, dir_okay=False),
                     help="Ground truth; when given, a report is written."),
        click.option("--out", "output_dir", type=click.Path(file_okay=False), help="Run output directory."),
        click.option("--model", "model_name", default=None, help="Chat model name [gpt-4]."),
        click.option("--setting", type=click.Choice([s.value for s in PromptSetting]), default=None),
        click.option("--disambiguation", "disambiguation_mode",
                     type=click.Choice(["baseline", "improved"]), default=None),
        click.option("--fixtures", "fixture_dir", type=click.Path(file_okay=False), default=None),
        click.option("--cache-dir", type=click.Path(file_okay=False), default=None),
        click.option("--parallelism", type=int, default=None),
        click.option("--context-budget", type=int, default=None),
        click.option("--temperature", type=float, default=None),
        click.option("--max-output-tokens", type=int, default=None),
        click.option("--base-url", default=None, help="Chat-completions API base URL."),
        click.option("--key-env", default=None, help="Environment variable holding the API key."),
        click.option("--manifest", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="Start from the config recorded in a previous run's manifest."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _config(provider: str | None, record: bool, manifest: str | None, **kw) -> RunConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    if provider is not None:
        kw["provider"] = provider
    if record:
        kw["record"] = True
    if manifest:
        return config_from_manifest(manifest, **kw)
    for required in ("input_path", "train_path", "output_dir"):
        if required not in kw:
            raise click.UsageError(f"--{required.split('_')[0]} is required (or pass --manifest)")
    return RunConfig(**kw)


def _summarize(result) -> None:
    click.echo(f"wrote {len(result.predictions)} predictions to {result.predictions_path}")
    if result.report is not None:
        click.echo(result.report.to_text(), nl=False)


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", count=True)
def main(verbose: int) -> None:
    """Probe LLMs for Wikidata objects, link them to QIDs, and score them."""
    level = logging.WARNING - 10 * verbose
    logging.basicConfig(level=max(level, logging.DEBUG), format="%(levelname)s %(name)s: %(message)s")


@main.command("run")
@run_options
@click.option("--provider", type=click.Choice(["live", "replay"]), default=None)
def run_cmd(provider, manifest, **kw):
    """Run the probing + linking pipeline over an input split."""
    try:
        result = run(_config(provider, False, manifest, **kw))
    except ABORTS as e:
        _fail(e)
    _summarize(result)


@main.command("record-fixtures")
@run_options
def record_cmd(manifest, **kw):
    """Live run that also records every reply and lookup into --fixtures."""
    try:
        result = run(_config("live", True, manifest, **kw))
    except ABORTS as e:
        _fail(e)
    _summarize(result)


@main.command("evaluate")
@click.option("--predictions", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--truth", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--labels", is_flag=True, help="Score case-folded labels instead of IDs (debugging).")
def evaluate_cmd(predictions, truth, out_dir, labels):
    """Score a predictions file against ground truth."""
    try:
        report = overall_report(load_predictions(predictions), load_records(truth, expect_truth=True),
                                mode="label" if labels else "id")
    except ABORTS as e:
        _fail(e)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
        (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    click.echo(report.to_text(), nl=False)


@main.command("compare")
@click.argument("report_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("report_b", type=click.Path(exists=True, dir_okay=False))
def compare_cmd(report_a, report_b):
    """Per-relation F1 deltas between two report.json files (B minus A)."""
    a = EvaluationReport.from_dict(json.loads(Path(report_a).read_text(encoding="utf-8")))
    b = EvaluationReport.from_dict(json.loads(Path(report_b).read_text(encoding="utf-8")))
    try:
        rows = compare_runs(a, b)
    except ValueError as e:
        _fail(e)
    click.echo(format_comparison(rows, Path(report_a).parent.name or "A", Path(report_b).parent.name or "B"),
               nl=False)


@main.command("audit")
@click.option("--predictions", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--snapshot", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Wikidata truth snapshot (challenge JSONL) instead of live SPARQL.")
@click.option("--contexts", type=click.Path(exists=True, dir_okay=False), default=None,
              help="contexts.jsonl from a context-setting run, for corroboration.")
@click.option("--fetch-context", is_flag=True, help="Fetch Wikipedia context for rows lacking one.")
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None)
@click.option("--offline", is_flag=True, help="Serve lookups from --cache-dir only.")
@click.option("--aligned-below", type=float, default=0.25, show_default=True)
@click.option("--gap-at-least", type=float, default=0.75, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def audit_cmd(predictions, snapshot, contexts, fetch_context, cache_dir, offline, aligned_below,
              gap_at_least, out_dir):
    """Rank rows whose predictions diverge from current Wikidata."""
    preds = load_predictions(predictions)
    store = LookupStore(Path(cache_dir) / "lookups.jsonl" if cache_dir else None, offline=offline)
    if snapshot:
        truth = {r.key: set(r.object_ids) for r in load_records(snapshot, expect_truth=True)}
    else:
        sparql = SparqlClient(store)
        truth = lambda qid, rel: fetch_wikidata_truth(qid, rel, sparql)  # noqa: E731
    ctx: dict = {}
    if contexts:
        with open(contexts, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    ctx[(row["SubjectEntityID"], row["Relation"])] = row.get("Context", "")
    wiki = WikipediaClient(store) if fetch_context else None

    def context_for(p):
        text = ctx.get((p.subject_qid, p.relation.value))
        if text is None and wiki is not None:
            text = assemble_context(p, relation_profile(p.relation), wiki).render()
        return text or ""

    try:
        findings = audit_gaps(preds, truth, context_for, aligned_below, gap_at_least)
    except ABORTS as e:
        _fail(e)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "findings.jsonl").write_text(findings_jsonl(findings), encoding="utf-8")
        (out / "findings.txt").write_text(render_findings(findings), encoding="utf-8")
    click.echo(render_findings(findings), nl=False)


if __name__ == "__main__":
    main()
