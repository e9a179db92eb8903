"""Command-line surface: ingest, ask, batch, grade, extract, serve, stats.

Exit codes: 0 success, 1 fatal, 2 partial success (some rows/files/pages
failed), 64 usage errors such as a negative chunk count. Data goes to
stdout, logs and errors to stderr.
"""

from __future__ import annotations

import json
import socket
import sys
from pathlib import Path

import click

from . import genealogy, grading, qa
from .config import resolve_config
from .corpus import DocumentStore, corpus_stats
from .errors import CorruptIndex, InputCsvMalformed, KleioError
from .gateway import MockChatBackend, make_backend
from .index import VectorIndex

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2
EXIT_USAGE = 64


def _err(message: str) -> None:
    click.echo(f"kleio: {message}", err=True)


def _load_index(cfg, must_exist: bool = False) -> VectorIndex:
    index_dir = Path(cfg.index_dir)
    if (index_dir / "manifest.json").exists():
        return VectorIndex.load(index_dir)
    if must_exist:
        raise CorruptIndex(f"no index at {index_dir}; run `kleio ingest` first")
    return VectorIndex(cfg.embed_dim)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="TOML config file (default ~/.config/kleio/config.toml).")
@click.option("--store", "store_dir", default=None, help="Document store directory.")
@click.option("--index", "index_dir", default=None, help="Vector index directory.")
@click.pass_context
def main(ctx, config_path, store_dir, index_dir):
    """Retrieval-augmented question answering over a private corpus."""
    ctx.obj = resolve_config(
        flags={"store_dir": store_dir, "index_dir": index_dir},
        config_path=config_path,
    )


@main.command()
@click.argument("path", type=click.Path())
@click.pass_obj
def ingest(cfg, path):
    """Ingest a file or directory into the store and vector index."""
    try:
        store = DocumentStore(cfg.store_dir)
        index = _load_index(cfg)
        summary = qa.ingest_and_index(
            path, store, index, cfg.embedder_profile(), cfg.chunking_config(),
        )
        index.save(cfg.index_dir)
    except KleioError as exc:
        _err(str(exc))
        sys.exit(EXIT_FATAL)
    click.echo(f"{summary.documents_added} documents, {summary.chunks_indexed} chunks")
    for failed_path, error in summary.failures:
        _err(f"failed: {failed_path}: {error}")
    sys.exit(EXIT_PARTIAL if summary.failures else EXIT_OK)


@main.command()
@click.argument("question")
@click.option("--chunks", "-k", "k", default=4, type=int, show_default=True,
              help="Number of chunks to retrieve.")
@click.pass_obj
def ask(cfg, question, k):
    """Answer one question, printing sources underneath."""
    if k < 0:
        _err("--chunks must be >= 0")
        sys.exit(EXIT_USAGE)
    try:
        index = _load_index(cfg, must_exist=True)
        answer = qa.ask(question, k, index, cfg.embedder_profile(),
                        cfg.model_profile())
    except KleioError as exc:
        _err(str(exc))
        sys.exit(EXIT_FATAL)
    click.echo(answer.text)
    for source in answer.sources:
        click.echo(f"[{source.rank}] {source.doc_title} "
                   f"({source.chunk_id}, {source.score:.4f})")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(),
              help="Question CSV (header: id,category,question).")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Report CSV to write.")
@click.option("--chunks", "-k", "k", default=4, type=int, show_default=True)
@click.pass_obj
def batch(cfg, in_path, out_path, k):
    """Answer a CSV of questions into a report CSV."""
    if k < 0:
        _err("--chunks must be >= 0")
        sys.exit(EXIT_USAGE)
    try:
        index = _load_index(cfg, must_exist=True)
        summary = qa.run_batch(in_path, k, index, cfg.embedder_profile(),
                               cfg.model_profile(), out_path)
    except InputCsvMalformed as exc:
        _err(str(exc))
        sys.exit(EXIT_FATAL)
    except KleioError as exc:
        _err(str(exc))
        sys.exit(EXIT_FATAL)
    click.echo(f"{summary.rows_processed} rows -> {out_path}")
    for row_id, stage in summary.row_errors:
        _err(f"row {row_id} failed at stage {stage}")
    sys.exit(EXIT_PARTIAL if summary.row_errors else EXIT_OK)


@main.command()
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--grades", "grades_path", required=True, type=click.Path())
@click.option("--format", "fmt", default="markdown",
              type=click.Choice(["markdown", "csv"]), show_default=True)
@click.pass_obj
def grade(cfg, report_path, grades_path, fmt):
    """Aggregate pass/fail grades into a per-category accuracy table."""
    try:
        report_rows, _ = qa.read_report_csv(report_path)
        grade_records = grading.read_grades_csv(grades_path)
        if not grade_records:
            _err("grades file has no rows")
            sys.exit(EXIT_FATAL)
        report_ids = {row.id for row in report_rows}
        unknown = [g.id for g in grade_records if g.id not in report_ids]
        if unknown:
            _err(f"grades reference ids missing from the report: {unknown[:5]}")
            sys.exit(EXIT_FATAL)
        table = grading.aggregate(grade_records)
    except KleioError as exc:
        _err(str(exc))
        sys.exit(EXIT_FATAL)
    click.echo(grading.render_table(table, fmt), nl=False)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(),
              help="Pages file; pages separated by form-feed (U+000C).")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Records CSV to write.")
@click.option("--gold", "gold_path", default=None, type=click.Path(),
              help="Gold records CSV to diff against.")
@click.option("--mock-script", "script_path", default=None, type=click.Path(),
              help="JSON file mapping prompt substrings to mock responses.")
@click.pass_obj
def extract(cfg, in_path, out_path, gold_path, script_path):
    """Extract person tables from genealogical pages via the model."""
    try:
        pages_text = Path(in_path).read_text(encoding="utf-8")
    except OSError as exc:
        _err(f"cannot read {in_path}: {exc}")
        sys.exit(EXIT_FATAL)
    pages = [p for p in pages_text.split("\x0c") if p.strip()]
    if not pages:
        _err("no pages in input")
        sys.exit(EXIT_FATAL)

    profile = cfg.model_profile()
    if script_path:
        script = json.loads(Path(script_path).read_text(encoding="utf-8"))
        backend = MockChatBackend(script=script)
    else:
        backend = make_backend(profile)

    run = genealogy.extract_from_pages(pages, profile, chat_backend=backend)
    genealogy.write_records_csv(list(run.records), out_path)
    click.echo(f"{len(run.records)} records from {len(pages)} pages -> {out_path}")
    for page, name, suggestion in run.suggestions:
        click.echo(f"page {page}: {name} -> suggest {suggestion}")

    if gold_path:
        try:
            gold = [record for _, record in genealogy.read_records_csv(gold_path)]
        except KleioError as exc:
            _err(str(exc))
            sys.exit(EXIT_FATAL)
        diff = genealogy.diff_extraction(gold, [r for _, r in run.records])
        click.echo(
            f"diff vs gold: {diff.total('correct')} correct, "
            f"{diff.total('missing')} missing, {diff.total('wrong')} wrong, "
            f"{diff.total('spurious')} spurious"
        )
        for disc in diff.discrepancies:
            if disc.kind != "missing" or disc.got:
                click.echo(f"  {disc.kind}: {disc.record_key} / {disc.field}: "
                           f"expected {disc.expected!r}, got {disc.got!r}")

    page_errors = [r for r in run.reports if r.status == "error"]
    for report in page_errors:
        _err(f"page {report.page} failed: {report.detail}")
    sys.exit(EXIT_PARTIAL if page_errors else EXIT_OK)


@main.command()
@click.option("--port", default=7071, type=int, show_default=True)
@click.option("--host", default=None, help="Bind address (default 127.0.0.1).")
@click.option("--allow-remote", is_flag=True,
              help="Required to bind a non-localhost address.")
@click.option("--session-log", "session_log", default=None, type=click.Path(),
              help="Append conversation turns to this JSONL file.")
@click.option("--ui-dir", "ui_dir", default=None, type=click.Path(),
              help="Static web UI build to serve at /.")
@click.pass_obj
def serve(cfg, port, host, allow_remote, session_log, ui_dir):
    """Run the HTTP service (endpoints under /api/)."""
    import uvicorn

    from .service import ServiceState, create_app, mount_ui

    if host is None:
        host = "127.0.0.1"
    if host not in ("127.0.0.1", "localhost") and not allow_remote:
        _err(f"refusing to bind {host} without --allow-remote")
        sys.exit(EXIT_FATAL)

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        _err(f"cannot bind {host}:{port}: {exc}")
        sys.exit(EXIT_FATAL)
    finally:
        probe.close()

    try:
        state = ServiceState(
            store=DocumentStore(cfg.store_dir),
            index=_load_index(cfg),
            embedder_profile=cfg.embedder_profile(),
            model_profile=cfg.model_profile(),
            session_log=Path(session_log) if session_log else None,
        )
    except KleioError as exc:
        _err(str(exc))
        sys.exit(EXIT_FATAL)
    app = create_app(state)
    if ui_dir:
        mount_ui(app, ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    sys.exit(EXIT_OK)


@main.command()
@click.pass_obj
def stats(cfg):
    """Print corpus statistics for the document store."""
    store = DocumentStore(cfg.store_dir)
    result = corpus_stats(store)
    click.echo(f"documents: {result.document_count}")
    click.echo(f"total words: {result.total_words}")
    click.echo(f"unique word forms: {result.unique_word_forms}")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
