import hashlib
import json
import subprocess
import sys

import httpx
import numpy as np
import pytest
from PIL import Image

from scriptstress.backends import BackendClient, BackendDescriptor, BackendKind
from scriptstress.cli import main
from scriptstress.errors import ConfigError
from scriptstress.pipeline import PipelineConfig, load_config, run_pipeline

from conftest import PAGE_TEXTS, make_pdf, write_corpus


def snapshot(out_dir):
    return {p.relative_to(out_dir).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(out_dir.rglob("*")) if p.is_file()}


class TestRun:
    def test_hermetic_outputs(self, fixture_corpus, tmp_path):
        inputs, corpus = fixture_corpus
        out = tmp_path / "out"
        summary, code = run_pipeline(PipelineConfig(inputs, out, mock_corpus=corpus))
        assert code == 0 and summary.errors == []
        assert summary.pages_total == 3
        assert sorted(snapshot(out)) == [
            "run_summary.json", "student1_neg_vs_stress.csv", "student1_page_1.json",
            "student1_page_2.json", "student1_page_3.json", "student1_progression.csv",
            "student1_summary.json",
        ]
        stresses = [json.loads((out / f"student1_page_{k}.json").read_text())["stress_index"] for k in (1, 2, 3)]
        assert stresses[0] < stresses[1] < stresses[2]

    def test_page_texts_flow_through(self, fixture_corpus, tmp_path):
        inputs, corpus = fixture_corpus
        out = tmp_path / "out"
        run_pipeline(PipelineConfig(inputs, out, mock_corpus=corpus, keep_intermediates=True))
        inter = out / "intermediates"
        for k, text in enumerate(PAGE_TEXTS, 1):
            assert (inter / f"student1_page_{k}.txt").read_text() == text
            assert (inter / f"student1_page_{k}.png").is_file()
            binimg = np.asarray(Image.open(inter / f"student1_page_{k}_bin.png"))
            assert set(np.unique(binimg)) <= {0, 255}

    def test_empty_input(self, tmp_path):
        (tmp_path / "in").mkdir()
        summary, code = run_pipeline(PipelineConfig(tmp_path / "in", tmp_path / "out", mock_corpus=tmp_path))
        assert code == 0 and summary.pages_total == 0
        assert any("no input documents" in w for w in summary.warnings)
        assert json.loads((tmp_path / "out" / "run_summary.json").read_text())["pages_total"] == 0

    def test_missing_input_dir_fatal(self, tmp_path):
        summary, code = run_pipeline(PipelineConfig(tmp_path / "nope", tmp_path / "out", mock_corpus=tmp_path))
        assert code == 2 and summary.errors

    def test_corrupt_pdf_isolated(self, fixture_corpus, tmp_path):
        inputs, corpus = fixture_corpus
        make_pdf(inputs / "student2.pdf", n_pages=2, width=200, height=200)
        write_corpus(corpus, "student2", ["fine", "also fine"])
        (inputs / "student0.pdf").write_bytes(b"%PDF-1.4 garbage")
        summary, code = run_pipeline(PipelineConfig(inputs, tmp_path / "out", mock_corpus=corpus))
        assert code == 1
        assert [s.student_id for s in summary.students] == ["student1", "student2"]
        assert len(summary.errors) == 1 and "student0" in summary.errors[0]
        assert (tmp_path / "out" / "student2_page_2.json").is_file()

    def test_backend_partial_failure_warns(self, fixture_corpus, tmp_path):
        inputs, corpus = fixture_corpus
        backends = [
            BackendDescriptor("good", "mock", BackendKind.OCR, priority=0),
            BackendDescriptor("down", "http://ocr.invalid", BackendKind.OCR, priority=1),
            BackendDescriptor("sent", "mock", BackendKind.SENTIMENT),
        ]

        def refuse(request):
            raise httpx.ConnectError("refused", request=request)

        client = BackendClient(mock_corpus=corpus, transport=httpx.MockTransport(refuse))
        summary, code = run_pipeline(PipelineConfig(inputs, tmp_path / "out", backends=backends,
                                                    mock_corpus=corpus), client=client)
        assert code == 0 and summary.pages_total == 3
        assert sum("down" in w for w in summary.warnings) == 3

    def test_all_ocr_down_is_page_error(self, fixture_corpus, tmp_path):
        inputs, corpus = fixture_corpus
        backends = [BackendDescriptor("down", "http://ocr.invalid", BackendKind.OCR),
                    BackendDescriptor("sent", "mock", BackendKind.SENTIMENT)]
        client = BackendClient(transport=httpx.MockTransport(lambda r: httpx.Response(503)))
        summary, code = run_pipeline(PipelineConfig(inputs, tmp_path / "out", backends=backends), client=client)
        assert code == 1 and len(summary.errors) == 3
        assert all("student1_page_" in e for e in summary.errors)
        assert summary.students == []

    def test_wire_backends_end_to_end(self, fixture_corpus, tmp_path):
        inputs, _ = fixture_corpus

        def app(request):
            body = json.loads(request.content)
            if request.url.path == "/ocr":
                assert body["params"] == {"beam_width": 4, "max_tokens": 256} and body["dpi"] == 300
                return httpx.Response(200, json={"text": "this is hard", "confidence": 0.8})
            return httpx.Response(200, json={"negative": 0.6, "neutral": 0.3, "positive": 0.1})

        backends = [BackendDescriptor("trocr", "http://ocr.test", BackendKind.OCR),
                    BackendDescriptor("roberta", "http://sent.test", BackendKind.SENTIMENT)]
        client = BackendClient(transport=httpx.MockTransport(app))
        summary, code = run_pipeline(PipelineConfig(inputs, tmp_path / "out", backends=backends), client=client)
        assert code == 0 and summary.pages_total == 3
        data = json.loads((tmp_path / "out" / "student1_page_1.json").read_text())
        assert data["sentiment"]["negative"] == pytest.approx(0.6)

    def test_ground_truth_accuracy(self, fixture_corpus, tmp_path):
        inputs, corpus = fixture_corpus
        (inputs / "student1_page_1.gt.txt").write_text(PAGE_TEXTS[0])
        (inputs / "student1_page_2.gt.txt").write_text("completely different words here")
        summary, code = run_pipeline(PipelineConfig(inputs, tmp_path / "out", mock_corpus=corpus))
        assert code == 0 and summary.warnings == []
        assert summary.accuracy["pages_evaluated"] == 2
        per_page = json.loads((tmp_path / "out" / "student1_summary.json").read_text())["accuracy"]
        assert per_page[0] == {"page_index": 1, "char_accuracy": 1.0, "word_accuracy": 1.0}
        assert per_page[1]["word_accuracy"] == 0.0

    def test_float32_precision_option(self, fixture_corpus, tmp_path):
        inputs, corpus = fixture_corpus
        summary, _ = run_pipeline(PipelineConfig(inputs, tmp_path / "o", mock_corpus=corpus,
                                                 entropy_precision="float32"))
        assert summary.pages_total == 3


class TestConfig:
    def test_needs_sentiment(self, tmp_path):
        cfg = PipelineConfig(tmp_path, tmp_path / "o",
                             backends=[BackendDescriptor("o", "mock", BackendKind.OCR)], mock_corpus=tmp_path)
        with pytest.raises(ConfigError, match="sentiment"):
            cfg.validate()

    def test_needs_ocr(self, tmp_path):
        cfg = PipelineConfig(tmp_path, tmp_path / "o")
        with pytest.raises(ConfigError, match="OCR"):
            cfg.validate()

    def test_duplicate_priorities(self, tmp_path):
        cfg = PipelineConfig(tmp_path, tmp_path / "o", mock_corpus=tmp_path, backends=[
            BackendDescriptor("a", "mock", BackendKind.OCR), BackendDescriptor("b", "mock", BackendKind.OCR),
            BackendDescriptor("s", "mock", BackendKind.SENTIMENT)])
        with pytest.raises(ConfigError, match="priorities"):
            cfg.validate()

    def test_file_and_overrides(self, tmp_path):
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({
            "dpi": 150, "threshold": 0.4, "anomaly_cutoff": 3.0,
            "weights": {"w_neg": 0.5, "w_entropy": 0.4, "w_posdef": 0.1},
            "preprocess": {"median_kernel": 5, "dilation_iterations": 2},
            "backends": [
                {"id": "t", "kind": "ocr", "endpoint": "http://a", "priority": 0, "timeout_ms": 1000},
                {"id": "s", "kind": "sentiment", "endpoint": "mock"},
            ],
        }))
        cfg = load_config(tmp_path, tmp_path / "o", conf, dpi=200, threshold=None)
        assert cfg.dpi == 200 and cfg.threshold == 0.4 and cfg.anomaly_cutoff == 3.0
        assert cfg.weights.w_neg == 0.5 and cfg.preprocess.median_kernel == 5
        assert [b.backend_id for b in cfg.ocr_backends] == ["t"] and cfg.ocr_backends[0].timeout_ms == 1000
        cfg.validate()

    def test_cli_backends_replace_file(self, tmp_path):
        from scriptstress.pipeline import parse_backend_flag
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"backends": [
            {"id": "t", "kind": "ocr", "endpoint": "http://a"},
            {"id": "s", "kind": "sentiment", "endpoint": "mock"}]}))
        ocr = [parse_backend_flag("x=http://x", BackendKind.OCR, 0)]
        cfg = load_config(tmp_path, tmp_path / "o", conf, ocr_backends=ocr)
        assert [b.backend_id for b in cfg.backends] == ["s", "x"]

    @pytest.mark.parametrize("bad", ['{"dpi": "abc"}', '[1]', '{"preprocess": {"median_kernel": 4}}', "{oops"])
    def test_bad_file(self, tmp_path, bad):
        conf = tmp_path / "c.json"
        conf.write_text(bad)
        with pytest.raises(ConfigError):
            load_config(tmp_path, tmp_path / "o", conf)

    def test_bad_backend_flag(self):
        from scriptstress.pipeline import parse_backend_flag
        with pytest.raises(ConfigError):
            parse_backend_flag("novalue", BackendKind.OCR, 0)


class TestCli:
    def test_analyze(self, fixture_corpus, tmp_path, capsys):
        inputs, corpus = fixture_corpus
        out = tmp_path / "out"
        code = main(["analyze", str(inputs), "--out", str(out), "--mock-corpus", str(corpus),
                     "--threshold", "0.5", "--dpi", "100", "--timing"])
        assert code == 0
        assert "3 pages from 1 students" in capsys.readouterr().out
        run = json.loads((out / "run_summary.json").read_text())
        assert run["config"]["threshold"] == 0.5 and run["config"]["dpi"] == 100
        assert run["images_per_second"] > 0

    def test_explicit_mock_backends(self, fixture_corpus, tmp_path):
        inputs, corpus = fixture_corpus
        code = main(["analyze", str(inputs), "--out", str(tmp_path / "o"), "--mock-corpus", str(corpus),
                     "--ocr-backend", "a=mock", "--ocr-backend", "b=mock", "--sentiment-backend", "s=mock"])
        assert code == 0

    def test_config_error_exit_2(self, tmp_path, capsys):
        code = main(["analyze", str(tmp_path), "--out", str(tmp_path / "o"), "--ocr-backend", "broken"])
        assert code == 2 and "error" in capsys.readouterr().err

    def test_no_backends_exit_2(self, tmp_path):
        assert main(["analyze", str(tmp_path), "--out", str(tmp_path / "o")]) == 2

    def test_module_entry(self, fixture_corpus, tmp_path):
        inputs, corpus = fixture_corpus
        proc = subprocess.run([sys.executable, "-m", "scriptstress.cli", "analyze", str(inputs),
                               "--out", str(tmp_path / "o"), "--mock-corpus", str(corpus)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
