"""Command line entry points: ingest, ask, eval, serve."""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .config import AppConfig, load_config
from .errors import DeskQaError
from .evaluate import REPORT_FORMATS, load_dataset, render_report, run_eval
from .fusion import MODES, candidate_to_dict
from .ingest import ingest_corpus, load_manifest
from .llm import BACKENDS
from .pipeline import (
    AnswerPipeline,
    build_pipeline_from_corpus,
    build_pipeline_from_snapshot,
)
from .snapshot import save_snapshot


def _load_app_config(config_path: str | None, **overrides) -> AppConfig:
    cfg = load_config(config_path) if config_path else AppConfig()
    updates = {key: value for key, value in overrides.items() if value is not None}
    nested = {}
    if "mode" in updates:
        nested["retrieval"] = dataclasses.replace(cfg.retrieval, mode=updates.pop("mode"))
    for key in ("n_dense", "n_sparse", "n_hybrid"):
        if key in updates:
            nested.setdefault("retrieval", cfg.retrieval)
            nested["retrieval"] = dataclasses.replace(
                nested["retrieval"], **{key: updates.pop(key)}
            )
    if "backend" in updates:
        nested["generation"] = dataclasses.replace(
            cfg.generation, backend=updates.pop("backend")
        )
    return dataclasses.replace(cfg, **updates, **nested)


def _pipeline(cfg: AppConfig) -> AnswerPipeline:
    if Path(cfg.index_dir, "meta.json").exists():
        return build_pipeline_from_snapshot(cfg)
    return build_pipeline_from_corpus(cfg)


@click.group()
def main() -> None:
    """Question answering over an ingested document corpus."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--manifest", type=click.Path(), default=None, help="Corpus manifest JSON.")
@click.option("--index-dir", type=click.Path(), default=None, help="Snapshot output directory.")
def ingest(config_path, manifest, index_dir) -> None:
    """Ingest the corpus and persist sparse + dense index snapshots."""
    cfg = _load_app_config(config_path, manifest=manifest, index_dir=index_dir)
    if not cfg.manifest:
        raise click.UsageError("a corpus manifest is required (--manifest or config)")
    if not Path(cfg.manifest).exists():
        raise click.UsageError(f"manifest not found: {cfg.manifest}")
    try:
        result = ingest_corpus(load_manifest(cfg.manifest), cfg.chunking)
        provider = cfg.embedder.build()
        from .fusion import HybridRetriever

        retriever = HybridRetriever(
            provider=provider, k1=cfg.bm25.k1, b=cfg.bm25.b
        ).fit(result.chunks)
        save_snapshot(
            cfg.index_dir, result.chunks, result.documents, retriever.sparse_, retriever.dense_
        )
    except DeskQaError as exc:
        raise click.ClickException(str(exc)) from exc
    for warning in result.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(
        f"docs={len(result.documents)} chunks={len(result.chunks)} "
        f"terms={len(retriever.sparse_.postings_)} dimension={retriever.dense_.dimension_}"
    )
    click.echo(f"snapshot written to {cfg.index_dir}")


@main.command()
@click.argument("question")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--index-dir", type=click.Path(), default=None)
@click.option("--mode", type=click.Choice(MODES), default=None)
@click.option("--adh/--no-adh", "adh", default=None)
@click.option("--n-dense", type=int, default=None)
@click.option("--n-sparse", type=int, default=None)
@click.option("--n-hybrid", type=int, default=None)
@click.option("--backend", type=click.Choice(BACKENDS), default=None)
@click.option("--debug", is_flag=True, help="Also print the fused candidate table.")
def ask(question, config_path, index_dir, mode, adh, n_dense, n_sparse, n_hybrid, backend, debug) -> None:
    """Answer one question against the ingested corpus."""
    cfg = _load_app_config(
        config_path,
        index_dir=index_dir,
        mode=mode,
        n_dense=n_dense,
        n_sparse=n_sparse,
        n_hybrid=n_hybrid,
        backend=backend,
    )
    try:
        pipeline = _pipeline(cfg)
        result = pipeline.ask(question, mode=cfg.retrieval.mode, adh=adh)
    except DeskQaError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(result.answer)
    click.echo("")
    click.echo("Sources:")
    for chunk in result.sources:
        click.echo(f"  {chunk.chunk_id} ({chunk.doc_id}) {pipeline.doc_uri(chunk.doc_id)}")
    if debug:
        click.echo("")
        click.echo(json.dumps([candidate_to_dict(c) for c in result.candidates], indent=2))


def _parse_arm(raw: str) -> tuple[str, bool]:
    mode, _, adh = raw.partition(":")
    if mode not in MODES:
        raise click.UsageError(f"unknown mode {mode!r} in arm {raw!r}")
    if adh not in ("", "on", "off"):
        raise click.UsageError(f"arm {raw!r} must end with :on or :off")
    return mode, adh != "off"


@main.command(name="eval")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--dataset", type=click.Path(), required=True, help="JSON Lines QA dataset.")
@click.option(
    "--arm",
    "arms",
    multiple=True,
    help="mode[:on|off], repeatable; default runs all four modes with ADH on.",
)
@click.option("--format", "fmt", type=click.Choice(REPORT_FORMATS), default="markdown")
@click.option("--output", type=click.Path(), default=None, help="Write the report here.")
@click.option("--parallelism", type=int, default=1)
def eval_command(config_path, dataset, arms, fmt, output, parallelism) -> None:
    """Run retrieval/ADH ablation arms over a dataset and render a report."""
    cfg = _load_app_config(config_path)
    arm_list = [_parse_arm(raw) for raw in arms] or [(mode, True) for mode in MODES]
    try:
        examples = load_dataset(dataset)
        pipeline = _pipeline(cfg)
        report = run_eval(
            examples,
            pipeline,
            arm_list,
            dataset_name=Path(dataset).stem,
            parallelism=parallelism,
        )
        rendered = render_report(report, fmt)
    except DeskQaError as exc:
        raise click.ClickException(str(exc)) from exc
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(rendered, encoding="utf-8", newline="\n")
        click.echo(f"report written to {output}")
    else:
        click.echo(rendered, nl=False)
    errored = sum(arm.errors for arm in report.arms)
    if errored:
        click.echo(f"{errored} example run(s) errored and scored 0", err=True)


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--ui-dir", type=click.Path(), default=None, help="Static UI directory to serve.")
def serve(config_path, host, port, ui_dir) -> None:
    """Run the HTTP question-answering service."""
    import uvicorn

    from .service import create_app

    cfg = _load_app_config(config_path, host=host, port=port)
    try:
        pipeline = _pipeline(cfg)
    except DeskQaError as exc:
        raise click.ClickException(str(exc)) from exc
    app = create_app(
        pipeline,
        feedback_path=cfg.feedback_path,
        history_depth=cfg.history_depth,
        session_ttl_seconds=cfg.session_ttl_seconds,
        default_mode=cfg.retrieval.mode,
        ui_dir=ui_dir,
        transcript_path=cfg.transcript_path,
    )
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")


if __name__ == "__main__":
    sys.exit(main())
