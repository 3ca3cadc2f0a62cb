import json
import shutil
import time
from fractions import Fraction

import pytest

from symtee.bench import (
    CorpusError, bundled_corpus_root, load_corpus, outcomes_json, percent_text, run_bench, run_case, score,
)
from symtee.llm import ReplayTransport, LlmClient
from symtee.pipeline import PipelineConfig
from symtee.report import Finding

from conftest import FIXTURES


@pytest.fixture(scope="module")
def outcomes(corpus):
    return run_bench(corpus)


def by_name(outcomes, name):
    return next(o for o in outcomes if o.case.name == name)


def test_bundled_corpus_layout(corpus):
    labeled = [c for c in corpus if not c.control]
    assert len(labeled) == 26
    assert sum(c.group == "synth" for c in labeled) == 15
    assert sum(c.group == "real" for c in labeled) == 11
    assert [c.name for c in corpus if c.control] == ["real/pbkdf2_fixed"]
    assert sum(len(c.vulnerable_sinks) for c in corpus) == 26


def test_empty_directory_is_empty_corpus(tmp_path):
    assert load_corpus(tmp_path) == []


def test_missing_root_is_corpus_error(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "nope")


def _copy_case(tmp_path, name="real/pbkdf2_vuln"):
    dst = tmp_path / "cases" / name
    shutil.copytree(bundled_corpus_root() / "cases" / name, dst)
    return dst


def test_label_on_non_sink_line_is_rejected(tmp_path):
    case = _copy_case(tmp_path)
    label = json.loads((case / "label.json").read_text())
    label["vulnerable_sinks"][0]["line"] = 3
    (case / "label.json").write_text(json.dumps(label))
    with pytest.raises(CorpusError, match="pbkdf2_vuln"):
        load_corpus(tmp_path)


def test_malformed_label_is_rejected(tmp_path):
    case = _copy_case(tmp_path)
    (case / "label.json").write_text('{"vulnerable_sinks": [{"file": "x.c"}]}')
    with pytest.raises(CorpusError):
        load_corpus(tmp_path)


def test_vulnerable_pbkdf2_matches_its_label(outcomes):
    o = by_name(outcomes, "real/pbkdf2_vuln")
    assert len(o.findings) == 1 and len(o.matched) == 1 and o.false_positives == []


def test_fixed_pbkdf2_has_no_findings(outcomes):
    o = by_name(outcomes, "real/pbkdf2_fixed")
    assert o.findings == [] and o.candidates == 1


def test_slicer_evasion_cases_are_the_only_misses(outcomes):
    missed = sorted(o.case.name for o in outcomes if o.missed)
    assert missed == ["synth/extern_len", "synth/fn_alias"]
    for name in missed:
        o = by_name(outcomes, name)
        assert o.case.expect_slicer_failure and o.slicer_failure and o.findings == []


def test_table_counts(outcomes):
    s = score(outcomes)
    assert (s.vul, s.n, s.tp) == (26, 24, 24)
    assert s.precision == 1 and s.recall == Fraction(12, 13)
    assert percent_text(s.precision) == "100.0" and percent_text(s.recall) == "92.3"
    assert (s.per_project["real"].vul, s.per_project["real"].tp) == (11, 11)
    assert (s.per_project["synth"].vul, s.per_project["synth"].tp) == (15, 13)
    assert "Detected 24/26; P / R = 100.0 / 92.3" in s.render_text()


def test_zero_outcomes_render_dashes():
    s = score([])
    assert (s.vul, s.n, s.tp) == (0, 0, 0)
    assert percent_text(s.precision) == percent_text(s.recall) == "—"
    assert not s.meets(Fraction(0), Fraction(0))


def test_injected_false_positive_lowers_precision(outcomes):
    fixed = by_name(outcomes, "real/pbkdf2_fixed")
    fp = Finding("x", "crypto_ta_pbkdf2.c", "g_CryptoTaPbkdf_PBKDF2", 32, "TEE_MemMove", 512, "dkLen",
                 {"dkLen": 513}, "return_value", "builtin", "template", "")
    fixed.findings.append(fp)
    try:
        s = score(outcomes)
        assert (s.n, s.tp) == (25, 24) and percent_text(s.precision) == "96.0"
    finally:
        fixed.findings.remove(fp)


def test_percent_rounds_half_up():
    assert percent_text(Fraction(1, 8)) == "12.5"
    assert percent_text(Fraction(2, 3)) == "66.7"
    assert percent_text(Fraction(1, 2000)) == "0.1"


def test_thresholds(outcomes):
    s = score(outcomes)
    assert s.meets(Fraction(100), Fraction(92))
    assert not s.meets(Fraction(100), Fraction(99))


def test_reproducible_and_fast(corpus):
    start = time.perf_counter()
    a = outcomes_json(run_bench(corpus))
    elapsed = time.perf_counter() - start
    b = outcomes_json(run_bench(corpus, PipelineConfig(jobs=4)))
    assert a == b
    assert elapsed < 60


def test_llm_replay_bench_matches_template(corpus):
    cfg = PipelineConfig(generator="llm", llm_client=LlmClient(ReplayTransport(FIXTURES)))
    s = score(run_bench(corpus, cfg))
    assert (s.vul, s.n, s.tp) == (26, 24, 24)
    assert s.usage.average_tokens is not None and len(s.usage.per_case) == 24
    assert s.usage.average_tokens == Fraction(s.usage.total_tokens, 24)


def test_run_case_reports_pipeline_errors_without_raising(corpus):
    from symtee.llm import LlmClient
    case = next(c for c in corpus if c.name == "synth/produce")
    empty = LlmClient(ReplayTransport())
    o = run_case(case, PipelineConfig(generator="llm", llm_client=empty))
    assert o.errors and "FixtureMiss" in o.errors[0]
