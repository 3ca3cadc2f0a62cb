import json
import shutil
import subprocess
import sys

import pytest

from symtee.bench import bundled_corpus_root
from symtee.cli import main

from conftest import CASES, DATA, FIXTURES


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_scan_vulnerable_exits_one(capsys):
    code, out, _ = run(capsys, "scan", str(CASES / "real" / "pbkdf2_vuln"), "--format", "json")
    doc = json.loads(out)
    assert code == 1 and len(doc["findings"]) == 1
    assert doc["findings"][0]["witness"] == {"dkLen": 513}


def test_scan_fixed_exits_zero(capsys):
    code, out, _ = run(capsys, "scan", str(CASES / "real" / "pbkdf2_fixed"), "--format", "json")
    assert code == 0 and json.loads(out)["findings"] == []


def test_scan_missing_dir_exits_two(capsys, tmp_path):
    code, _, err = run(capsys, "scan", str(tmp_path / "missing_dir"))
    assert code == 2 and "missing_dir" in err


def test_scan_text_and_out_file(capsys, tmp_path):
    target = tmp_path / "r.txt"
    code, out, _ = run(capsys, "scan", str(CASES / "real" / "pbkdf2_vuln"), "--out", str(target))
    assert code == 1 and out == ""
    assert "if (dkLen > 512) return TEE_ERROR_BAD_PARAMETERS;" in target.read_text()


def test_bench_defaults_pass(capsys):
    code, out, _ = run(capsys, "bench")
    assert code == 0 and "100.0 / 92.3" in out


def test_bench_recall_threshold_fails(capsys):
    code, out, _ = run(capsys, "bench", "--min-recall", "99")
    assert code == 1 and "92.3" in out


def test_bench_broken_label_exits_two(capsys, tmp_path):
    case = tmp_path / "cases" / "real" / "pbkdf2_vuln"
    shutil.copytree(bundled_corpus_root() / "cases" / "real" / "pbkdf2_vuln", case)
    (case / "label.json").write_text("{not json")
    code, _, err = run(capsys, "bench", str(tmp_path))
    assert code == 2 and "pbkdf2_vuln" in err


def test_bench_json_and_llm_replay(capsys, tmp_path):
    out_json = tmp_path / "score.json"
    code, out, _ = run(capsys, "bench", "--generator", "llm", "--llm-fixtures", str(FIXTURES),
                       "--json-out", str(out_json), "--format", "json")
    doc = json.loads(out_json.read_text())
    assert code == 0 and (doc["vul"], doc["n"], doc["tp"]) == (26, 24, 24)
    assert json.loads(out) == doc


def test_bench_llm_without_endpoint_exits_two(capsys, monkeypatch):
    monkeypatch.delenv("SYMTEE_LLM_ENDPOINT", raising=False)
    code, _, err = run(capsys, "bench", "--generator", "llm")
    assert code == 2 and "SYMTEE_LLM_ENDPOINT" in err


def test_harness_prints_golden_text(capsys):
    code, out, _ = run(capsys, "harness", str(CASES / "synth" / "produce" / "producer.c"))
    assert code == 0
    assert out.split("\n", 1)[1] == (DATA / "produce_harness.c").read_text()


def test_harness_ir(capsys):
    code, out, _ = run(capsys, "harness", str(CASES / "synth" / "produce" / "producer.c"), "--emit", "ir")
    assert code == 0 and "sym size: u64" in out and "assume %main.size <= 4096" in out


def test_harness_no_match_exits_two(capsys):
    code, _, _ = run(capsys, "harness", str(CASES / "synth" / "produce" / "producer.c"), "--line", "1")
    assert code == 2


def test_exec_on_golden_harness(capsys):
    code, out, _ = run(capsys, "exec", str(DATA / "produce_harness.c"), "--format", "json")
    assert code == 1 and json.loads(out)["violations"][0]["witness"] == {"size": 513}


def test_exec_external_unavailable_notes_and_falls_back(capsys, monkeypatch):
    monkeypatch.delenv("SYMTEE_ENGINE_PATH", raising=False)
    code, out, err = run(capsys, "exec", str(DATA / "produce_harness.c"), "--engine", "external")
    assert code == 1 and "size=513" in out and "note:" in err


def test_exec_without_oracle_exits_two(capsys, tmp_path):
    p = tmp_path / "h.c"
    p.write_text("int main(void) { return 0; }\n")
    code, _, err = run(capsys, "exec", str(p))
    assert code == 2 and "no oracle" in err


def test_report_rerender(capsys, tmp_path):
    saved = tmp_path / "r.json"
    main(["scan", str(CASES / "real" / "pbkdf2_vuln"), "--format", "json", "--out", str(saved)])
    capsys.readouterr()
    code, out, _ = run(capsys, "report", str(saved))
    assert code == 1 and "dkLen=513" in out
    code, out, _ = run(capsys, "report", str(saved), "--format", "json")
    assert out.encode() == saved.read_bytes()


def test_bad_flag_value_exits_two(capsys):
    assert run(capsys, "scan", ".", "--jobs", "0")[0] == 2


def test_help_lists_flags_and_environment(capsys):
    code, text, _ = run(capsys, "scan", "--help")
    assert code == 0
    for flag in ("--sinks", "--generator", "--engine", "--domain-bound", "--default-capacity", "--format",
                 "--jobs", "--out", "SYMTEE_ENGINE_PATH", "SYMTEE_LLM_API_KEY", "SYMTEE_LLM_ENDPOINT"):
        assert flag in text, flag


def test_module_entry_point():
    cp = subprocess.run([sys.executable, "-m", "symtee", "scan", str(CASES / "real" / "pbkdf2_fixed")],
                        capture_output=True, text=True)
    assert cp.returncode == 0 and cp.stdout == "No findings.\n"
