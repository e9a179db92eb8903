"""Prompt assembly, grounding, ask(), and the CSV batch runner."""

import pytest

from kleio.corpus import DocumentStore
from kleio.embedder import EmbedderProfile
from kleio.errors import ContextOverflow, InputCsvMalformed, PipelineError
from kleio.gateway import ABSTENTION, MockChatBackend, ModelProfile
from kleio.index import VectorIndex
from kleio.qa import (
    ContextChunk,
    ReportRow,
    SourceAttribution,
    ask,
    build_prompt,
    format_source_cell,
    grounding_score,
    ingest_and_index,
    read_questions_csv,
    read_report_csv,
    run_batch,
    write_report_csv,
)

from conftest import planted_question, planted_sentence


def ctx(chunk_id, text, score):
    return ContextChunk(chunk_id, text, score)


class TestBuildPrompt:
    def test_zero_hits_question_only(self):
        bundle = build_prompt("What is migration?", [], ModelProfile())
        assert bundle.context_chunks == ()
        user = "What is migration?"
        assert bundle.question == user
        assert "[SOURCE" not in user

    def test_four_sources_in_score_order(self):
        contexts = [ctx(f"c{i}", f"text {i}", 1.0 - i / 10) for i in range(4)]
        bundle = build_prompt("q?", contexts, ModelProfile())
        assert len(bundle.context_chunks) == 4
        scores = [c.score for c in bundle.context_chunks]
        assert scores == sorted(scores, reverse=True)

    def test_overflow_drops_lowest_scored_first(self):
        profile = ModelProfile(context_tokens=1024, max_answer_tokens=512)
        # each chunk ~1000 chars = 250 tokens; budget 512 fits one
        contexts = [ctx(f"c{i}", "x" * 1000, 1.0 - i / 10) for i in range(8)]
        bundle = build_prompt("q?", contexts, profile)
        kept = [c.chunk_id for c in bundle.context_chunks]
        assert kept == ["c0"]
        assert bundle.token_estimate <= profile.prompt_budget

    def test_bare_question_overflow_raises(self):
        profile = ModelProfile(context_tokens=600, max_answer_tokens=512)
        with pytest.raises(ContextOverflow):
            build_prompt("x" * 4000, [], profile)

    def test_budget_always_respected(self):
        profile = ModelProfile(context_tokens=2048, max_answer_tokens=512)
        contexts = [ctx(f"c{i}", "y" * 700, 1.0 - i / 100) for i in range(20)]
        bundle = build_prompt("why?", contexts, profile)
        assert bundle.token_estimate <= profile.prompt_budget


class TestGroundingScore:
    def test_verbatim_sentence_scores_one(self):
        chunk = "The famine began in 1845 across the island provinces."
        assert grounding_score(chunk, [chunk]) == pytest.approx(1.0)

    def test_disjoint_answer_scores_zero(self):
        assert grounding_score(
            "Completely unrelated assertion about astronomy telescopes.",
            ["parish registers and baptism entries"],
        ) == pytest.approx(0.0)

    def test_half_grounded_two_sentences(self):
        chunk = "The canal opened in 1806 with great celebration."
        answer = ("The canal opened in 1806 with great celebration. "
                  "Meanwhile unrelated astronomy flourished elsewhere entirely.")
        assert grounding_score(answer, [chunk]) == pytest.approx(0.5)

    def test_empty_context_scores_zero(self):
        assert grounding_score("Any answer sentence here.", []) == 0.0

    def test_bounds(self):
        score = grounding_score("Some words appear here.", ["words appear"])
        assert 0.0 <= score <= 1.0

    def test_token_subset_monotonicity(self):
        chunk = "The assembly voted for emancipation reform in the spring session."
        verbatim = "The assembly voted for emancipation reform in the spring session."
        paraphrase = "The assembly supported emancipation reform measures."
        assert grounding_score(verbatim, [chunk]) >= \
            grounding_score(paraphrase, [chunk])


def build_index(corpus_dir, tmp_path, dim=384):
    store = DocumentStore(tmp_path / "store")
    index = VectorIndex(dim)
    summary = ingest_and_index(corpus_dir, store, index, EmbedderProfile(dim=dim))
    return store, index, summary


class TestAsk:
    def test_planted_fact_answered_with_sources(self, planted_corpus, tmp_path):
        _, index, summary = build_index(planted_corpus.corpus_dir, tmp_path)
        assert summary.documents_added == 20
        name, verb, year = planted_corpus.facts[0]
        answer = ask(
            planted_question(name, verb), 4, index,
            EmbedderProfile(), ModelProfile(),
            chat_backend=MockChatBackend(corpus_aware=True),
        )
        assert answer.text == planted_sentence(name, verb, year)
        assert answer.grounding_score == pytest.approx(1.0)
        assert answer.grounded
        expected_text = (planted_corpus.corpus_dir / "doc00.txt").read_text()
        assert any(
            index.get(s.chunk_id).chunk.text == expected_text
            for s in answer.sources
        )
        assert len(answer.sources) <= 4
        assert [s.rank for s in answer.sources] == list(range(1, len(answer.sources) + 1))

    def test_k_zero_mock_abstains(self, planted_corpus, tmp_path):
        _, index, _ = build_index(planted_corpus.corpus_dir, tmp_path)
        answer = ask("In which year was the Velmora Foundry founded?", 0, index,
                     EmbedderProfile(), ModelProfile(),
                     chat_backend=MockChatBackend(corpus_aware=True))
        assert answer.text == ABSTENTION
        assert answer.sources == ()
        assert answer.grounding_score == 0.0

    def test_empty_index_no_sources(self):
        answer = ask("anything?", 8, VectorIndex(384), EmbedderProfile(),
                     ModelProfile(), chat_backend=MockChatBackend(corpus_aware=True))
        assert answer.sources == ()

    def test_empty_question_is_validation_error(self):
        with pytest.raises(PipelineError) as err:
            ask("  ", 4, VectorIndex(384), EmbedderProfile(), ModelProfile())
        assert err.value.stage == "validation"

    def test_source_fidelity(self, planted_corpus, tmp_path):
        _, index, _ = build_index(planted_corpus.corpus_dir, tmp_path)
        name, verb, _ = planted_corpus.facts[3]
        answer = ask(planted_question(name, verb), 6, index, EmbedderProfile(),
                     ModelProfile(), chat_backend=MockChatBackend(corpus_aware=True))
        for source in answer.sources:
            entry = index.get(source.chunk_id)
            assert entry is not None
            assert entry.eligible()


class TestQuestionsCsv:
    def test_reads_rows_in_order(self, planted_corpus):
        rows = read_questions_csv(planted_corpus.questions_csv)
        assert len(rows) == 20
        assert rows[0].id == "q00"
        assert rows[0].category == "factual"

    def test_missing_header(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("one,two\n1,2\n")
        with pytest.raises(InputCsvMalformed):
            read_questions_csv(bad)

    def test_rfc4180_quoting(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text(
            'id,category,question\n'
            'q1,factual,"What, pray tell, is a ""chunk""?\nReally?"\n'
        )
        rows = read_questions_csv(path)
        assert rows[0].question == 'What, pray tell, is a "chunk"?\nReally?'


class TestRunBatch:
    def test_end_to_end_planted(self, planted_corpus, tmp_path):
        _, index, _ = build_index(planted_corpus.corpus_dir, tmp_path)
        out = tmp_path / "report.csv"
        summary = run_batch(
            planted_corpus.questions_csv, 4, index, EmbedderProfile(),
            ModelProfile(), out,
            chat_backend=MockChatBackend(corpus_aware=True),
        )
        assert summary.rows_processed == 20
        assert summary.row_errors == ()
        rows, k = read_report_csv(out)
        assert k == 4
        assert len(rows) == 20
        for row, (name, verb, year) in zip(rows, planted_corpus.facts):
            assert row.answer == planted_sentence(name, verb, year)
            assert row.grounding_score == pytest.approx(1.0)

    def test_row_isolation(self, planted_corpus, tmp_path):
        _, index, _ = build_index(planted_corpus.corpus_dir, tmp_path)
        questions = tmp_path / "q.csv"
        questions.write_text(
            "id,category,question\n"
            "q1,factual,In which year was the Velmora Foundry founded?\n"
            "q2,factual,\n"
            "q3,weird,Is this category valid?\n"
        )
        out = tmp_path / "r.csv"
        summary = run_batch(questions, 4, index, EmbedderProfile(), ModelProfile(),
                            out, chat_backend=MockChatBackend(corpus_aware=True))
        assert summary.rows_processed == 3
        assert dict(summary.row_errors) == {"q2": "validation", "q3": "validation"}
        rows, _ = read_report_csv(out)
        assert rows[1].answer == "ERROR: validation"
        assert rows[2].answer == "ERROR: validation"
        assert "Velmora" in rows[0].answer

    def test_byte_identical_across_runs(self, planted_corpus, tmp_path):
        _, index, _ = build_index(planted_corpus.corpus_dir, tmp_path)
        first = tmp_path / "r1.csv"
        second = tmp_path / "r2.csv"
        for out in (first, second):
            run_batch(planted_corpus.questions_csv, 4, index, EmbedderProfile(),
                      ModelProfile(), out,
                      chat_backend=MockChatBackend(corpus_aware=True))
        assert first.read_bytes() == second.read_bytes()

    def test_input_order_preserved(self, planted_corpus, tmp_path):
        _, index, _ = build_index(planted_corpus.corpus_dir, tmp_path)
        out = tmp_path / "r.csv"
        run_batch(planted_corpus.questions_csv, 2, index, EmbedderProfile(),
                  ModelProfile(), out,
                  chat_backend=MockChatBackend(corpus_aware=True))
        rows, _ = read_report_csv(out)
        assert [r.id for r in rows] == [f"q{i:02d}" for i in range(20)]

    def test_parallel_mode_preserves_order(self, planted_corpus, tmp_path):
        _, index, _ = build_index(planted_corpus.corpus_dir, tmp_path)
        sequential = tmp_path / "seq.csv"
        parallel = tmp_path / "par.csv"
        run_batch(planted_corpus.questions_csv, 4, index, EmbedderProfile(),
                  ModelProfile(), sequential,
                  chat_backend=MockChatBackend(corpus_aware=True))
        run_batch(planted_corpus.questions_csv, 4, index, EmbedderProfile(),
                  ModelProfile(), parallel,
                  chat_backend=MockChatBackend(corpus_aware=True), parallel=4)
        assert sequential.read_bytes() == parallel.read_bytes()


class TestReportCsv:
    def sample_rows(self):
        source = SourceAttribution(
            chunk_id="doc1:0", doc_id="doc1", doc_title='Tricky|Title, "quoted"',
            score=0.912345, rank=1, snippet='snippet with | pipe, comma and "quote"',
            char_start=0, char_end=80,
        )
        return [
            ReportRow(
                id="q1", category="factual",
                question='What, a "question"?\nwith newline',
                answer='An answer, with commas and "quotes"\nand a newline',
                model_id="m", k=2, grounding_score=0.5,
                sources=(format_source_cell(source),),
            ),
            ReportRow(
                id="q2", category="integrative", question="plain", answer="plain",
                model_id="m", k=2, grounding_score=1.0, sources=(),
            ),
        ]

    def test_round_trip_equality(self, tmp_path):
        path = tmp_path / "report.csv"
        rows = self.sample_rows()
        write_report_csv(rows, path, k=2)
        parsed, k = read_report_csv(path)
        assert k == 2
        for original, restored in zip(rows, parsed):
            assert restored.id == original.id
            assert restored.category == original.category
            assert restored.question == original.question
            assert restored.answer == original.answer
            assert restored.model_id == original.model_id
            assert restored.k == original.k
            assert restored.grounding_score == pytest.approx(original.grounding_score)
            padded = list(original.sources) + [""] * (2 - len(original.sources))
            assert list(restored.sources) == padded

    def test_column_count_fixed_by_k(self, tmp_path):
        path = tmp_path / "report.csv"
        write_report_csv(self.sample_rows(), path, k=2)
        header = path.read_text().splitlines()[0]
        assert header == ("id,category,question,answer,model_id,k,"
                          "grounding_score,source_1,source_2")

    def test_pipes_escaped_in_source_cells(self):
        source = SourceAttribution(
            chunk_id="c:0", doc_id="c", doc_title="A|B", score=1.0, rank=1,
            snippet="x|y", char_start=0, char_end=3,
        )
        cell = format_source_cell(source)
        title, chunk_id, score, snippet = cell.replace("\\|", "\x00").split("|")
        assert title.replace("\x00", "|") == "A|B"
        assert chunk_id == "c:0"
        assert snippet.replace("\x00", "|") == "x|y"

    def test_lf_line_endings(self, tmp_path):
        path = tmp_path / "report.csv"
        write_report_csv(self.sample_rows(), path, k=2)
        raw = path.read_bytes()
        # CRLF only inside quoted fields (none here); rows end with bare LF
        assert not raw.replace(b"\n", b"").endswith(b"\r")
        assert raw.count(b"\r\n") == 0
