import json

from click.testing import CliRunner

from llmke import __version__
from llmke.cli import main


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


def run_args(mini, out, *extra):
    return ["run", "--input", mini / "test.jsonl", "--train", mini / "train.jsonl", "--truth",
            mini / "test_truth.jsonl", "--fixtures", mini, "--out", out, *extra]


def test_version():
    assert __version__ in invoke("--version").output


def test_run_evaluate_compare(mini, tmp_path):
    r = invoke(*run_args(mini, tmp_path / "base", "--disambiguation", "baseline"))
    assert r.exit_code == 0, r.output
    assert "wrote 105 predictions" in r.output and "Average" in r.output
    r = invoke(*run_args(mini, tmp_path / "impr", "--setting", "question"))
    assert r.exit_code == 0
    r = invoke("evaluate", "--predictions", tmp_path / "impr" / "predictions.jsonl", "--truth",
               mini / "test_truth.jsonl", "--out", tmp_path / "ev")
    assert r.exit_code == 0
    assert (tmp_path / "ev" / "report.json").read_text() == (tmp_path / "impr" / "report.json").read_text()
    r = invoke("compare", tmp_path / "base" / "report.json", tmp_path / "impr" / "report.json")
    assert r.exit_code == 0
    assert r.output.splitlines()[0].split()[1:] == ["base", "impr", "dF1"]
    r = invoke("evaluate", "--labels", "--predictions", tmp_path / "impr" / "predictions.jsonl", "--truth",
               mini / "test_truth.jsonl")
    assert r.exit_code == 0 and "Average" in r.output


def test_run_from_manifest(mini, tmp_path):
    invoke(*run_args(mini, tmp_path / "a", "--setting", "triple"))
    r = invoke("run", "--manifest", tmp_path / "a" / "manifest.json", "--out", tmp_path / "b")
    assert r.exit_code == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_missing_fixture_exit_code(mini, tmp_path):
    empty = tmp_path / "fx"
    empty.mkdir()
    r = CliRunner().invoke(main, [str(a) for a in run_args(mini, tmp_path / "o")[:-2]]
                           + ["--fixtures", str(empty), "--out", str(tmp_path / "o")])
    assert r.exit_code == 2
    assert "error:" in r.output


def test_usage_error_without_input(tmp_path):
    r = CliRunner().invoke(main, ["run", "--out", str(tmp_path)])
    assert r.exit_code == 2 and "required" in r.output


def test_audit_against_snapshot(mini, tmp_path):
    invoke(*run_args(mini, tmp_path / "ctx", "--setting", "context"))
    r = invoke("audit", "--predictions", tmp_path / "ctx" / "predictions.jsonl", "--snapshot",
               mini / "test_truth.jsonl", "--contexts", tmp_path / "ctx" / "contexts.jsonl",
               "--out", tmp_path / "audit")
    assert r.exit_code == 0
    findings = [json.loads(x) for x in (tmp_path / "audit" / "findings.jsonl").read_text().splitlines()]
    assert len(findings) == 105
    divs = [f["Divergence"] for f in findings]
    assert divs == sorted(divs, reverse=True)
    ferrari = next(f for f in findings if f["SubjectEntity"] == "Ferrari S.p.A.")
    assert ferrari["Classification"] == "kb_gap_candidate"
    assert ferrari["Divergence"] == 1.0
