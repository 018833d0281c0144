import json

import pytest

from deskqa.adh import AbbreviationDictionary, AbbreviationEntry
from deskqa.dense import HashingEmbedder
from deskqa.errors import DatasetError
from deskqa.evaluate import (
    QaExample,
    load_dataset,
    render_report,
    report_from_dict,
    report_to_dict,
    run_eval,
)
from deskqa.fusion import HybridRetriever
from deskqa.llm import GenerationConfig
from deskqa.pipeline import AnswerPipeline

from conftest import make_chunk


@pytest.fixture
def small_pipeline():
    chunks = [
        make_chunk("doc_a#0000", "torque specs cover spindle presets."),
        make_chunk("doc_b#0000", "gasket seating uses the press jig."),
        make_chunk("doc_c#0000", "free text about nothing relevant."),
    ]
    retriever = HybridRetriever(provider=HashingEmbedder(dimension=64)).fit(chunks)
    return AnswerPipeline(
        retriever=retriever,
        dictionary=AbbreviationDictionary(
            entries=(AbbreviationEntry("TQS", "Torque Qualification Sheet"),)
        ),
        generation=GenerationConfig(backend="stub_extractive"),
    )


EXAMPLES = [
    QaExample("torque specs spindle?", "torque specs cover spindle presets."),
    QaExample("gasket seating jig?", "gasket seating uses the press jig."),
]


class TestLoadDataset:
    def test_jsonl_rows(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text(
            '{"question": "q1", "answer": "a1"}\n\n{"question": "q2", "answer": "a2"}\n'
        )
        examples = load_dataset(path)
        assert [e.question for e in examples] == ["q1", "q2"]

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text("")
        with pytest.raises(DatasetError, match="empty"):
            load_dataset(path)

    def test_bad_row(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"question": "q"}\n')
        with pytest.raises(DatasetError, match="bad dataset row"):
            load_dataset(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="cannot read"):
            load_dataset(tmp_path / "nope.jsonl")

    def test_blank_fields_rejected(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"question": "", "answer": "a"}\n')
        with pytest.raises(DatasetError):
            load_dataset(path)


class TestRunEval:
    def test_empty_arms_no_pipeline_calls(self, small_pipeline):
        calls = []
        original = small_pipeline.ask
        small_pipeline.ask = lambda *a, **k: calls.append(1) or original(*a, **k)
        report = run_eval(EXAMPLES, small_pipeline, arms=[])
        assert report.arms == []
        assert calls == []

    def test_extractive_answers_score_one(self, small_pipeline):
        report = run_eval(EXAMPLES, small_pipeline, [("hybrid", True)])
        arm = report.arms[0]
        assert arm.mean.recall == 1.0
        assert arm.errors == 0
        assert len(arm.records) == 2

    def test_mode_none_scores_zero(self, small_pipeline):
        report = run_eval(EXAMPLES, small_pipeline, [("none", True)])
        assert report.arms[0].mean.recall == 0.0

    def test_mean_is_arithmetic_average(self, small_pipeline):
        mixed = EXAMPLES + [QaExample("совершенно unrelated zzz", "qqq www eee")]
        report = run_eval(mixed, small_pipeline, [("hybrid", True)])
        arm = report.arms[0]
        expected = sum(r.score.recall for r in arm.records) / len(arm.records)
        assert arm.mean.recall == pytest.approx(expected, abs=1e-12)

    def test_errors_scored_zero_without_aborting(self, small_pipeline):
        class Flaky:
            def __init__(self, inner):
                self.inner = inner

            def ask(self, question, **kwargs):
                if "gasket" in question:
                    raise RuntimeError("backend exploded")
                return self.inner.ask(question, **kwargs)

        report = run_eval(EXAMPLES, Flaky(small_pipeline), [("hybrid", True)])
        arm = report.arms[0]
        assert arm.errors == 1
        failed = next(r for r in arm.records if r.error)
        assert failed.score.recall == 0.0
        assert failed.generated == ""
        ok = next(r for r in arm.records if not r.error)
        assert ok.score.recall == 1.0

    def test_parallel_matches_serial(self, small_pipeline):
        serial = run_eval(EXAMPLES * 3, small_pipeline, [("hybrid", True)])
        parallel = run_eval(EXAMPLES * 3, small_pipeline, [("hybrid", True)], parallelism=4)
        assert report_to_dict(serial) == report_to_dict(parallel)

    def test_deterministic_reruns(self, small_pipeline):
        arms = [("hybrid", True), ("sparse", False), ("none", True)]
        a = run_eval(EXAMPLES, small_pipeline, arms, dataset_name="d")
        b = run_eval(EXAMPLES, small_pipeline, arms, dataset_name="d")
        assert render_report(a, "json") == render_report(b, "json")


class TestRenderReport:
    @pytest.fixture
    def report(self, small_pipeline):
        return run_eval(
            EXAMPLES, small_pipeline, [("hybrid", True), ("none", False)], dataset_name="unit"
        )

    def test_single_perfect_row_in_markdown(self, report):
        table = render_report(report, "markdown")
        assert "| hybrid | on | 1.0000 | 1.0000 |" in table

    def test_json_roundtrip(self, report):
        parsed = report_from_dict(json.loads(render_report(report, "json")))
        assert report_to_dict(parsed) == report_to_dict(report)

    def test_csv_column_order(self, report):
        lines = render_report(report, "csv").splitlines()
        assert lines[0] == "dataset,mode,adh,f1,recall"
        assert lines[1].startswith("unit,hybrid,on,")
        assert lines[2].startswith("unit,none,off,")

    def test_unknown_format(self, report):
        with pytest.raises(ValueError):
            render_report(report, "xml")
