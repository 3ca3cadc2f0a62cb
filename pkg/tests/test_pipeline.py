import pytest

from symtee.llm import LlmClient, ReplayTransport
from symtee.pipeline import PipelineConfig, collect_sources, harness_line_map, scan_paths, scan_source
from symtee.harness.model import build_model
from symtee.harness.render import render_source
from symtee.symexec.external import EngineConfig

from conftest import CASES, DATA, make_fake_engine, needs_clang

PRODUCE = CASES / "synth" / "produce" / "producer.c"


def test_template_scan_of_produce():
    res = scan_source(PRODUCE.read_bytes(), "producer.c")
    (c,) = res.candidates
    assert c.stage == "confirmed" and c.generator == "template"
    assert c.finding.witness == {"size": 513}


def test_guarded_sink_stops_at_slicer():
    data = (CASES / "real" / "pbkdf2_fixed" / "crypto_ta_pbkdf2.c").read_bytes()
    (c,) = scan_source(data, "f.c").candidates
    assert c.stage == "slicer" and c.dropped == "guarded" and c.finding is None


def test_llm_failure_falls_back_to_template():
    cfg = PipelineConfig(generator="llm", llm_client=LlmClient(ReplayTransport(DATA / "fixtures" / "garbage_produce.json")))
    (c,) = scan_source(PRODUCE.read_bytes(), "producer.c", cfg).candidates
    assert c.generator == "llm_fallback_template" and c.finding.generator == "llm_fallback_template"
    assert c.notes and "template" in c.notes[0]
    assert c.usage[0].total > 0


def test_unavailable_external_engine_keeps_builtin_verdict():
    cfg = PipelineConfig(engine="external", engine_cfg=EngineConfig())
    (c,) = scan_source(PRODUCE.read_bytes(), "producer.c", cfg).candidates
    assert c.finding.engine == "builtin" and "unavailable" in c.notes[0]


@needs_clang
def test_external_engine_verdict_is_used(tmp_path):
    cfg = PipelineConfig(engine="external", engine_cfg=make_fake_engine(tmp_path))
    (c,) = scan_source(PRODUCE.read_bytes(), "producer.c", cfg).candidates
    assert c.finding.engine == "external" and c.finding.witness == {"size": 513}
    assert c.finding.path[0].span == "artifact:test000001.ktest"


@needs_clang
def test_engines_disagreeing_is_an_error(tmp_path):
    cfg = PipelineConfig(engine="both", engine_cfg=make_fake_engine(tmp_path, size=None))
    (c,) = scan_source(PRODUCE.read_bytes(), "producer.c", cfg).candidates
    assert c.stage == "error" and c.error.startswith("DiscrepancyError")


@needs_clang
def test_failing_external_engine_is_an_error(tmp_path):
    cfg = PipelineConfig(engine="external", engine_cfg=make_fake_engine(tmp_path, exit_status=1))
    res = scan_source(PRODUCE.read_bytes(), "producer.c", cfg)
    assert res.errors and "external engine failed" in res.errors[0]


def test_unparseable_file_is_a_file_error():
    res = scan_source(b"int f( {\n", "bad.c")
    assert res.error.startswith("ParseError") and res.errors


def test_line_map_points_into_original_source(produce_slice):
    src = render_source(build_model(produce_slice))
    to_source = harness_line_map(src, produce_slice)
    harness_lines = src.decode().splitlines()
    sink_h = next(i for i, l in enumerate(harness_lines, 1) if "TEE_MemMove(str" in l)
    assert to_source(sink_h) == produce_slice.origin.line
    assert to_source(1) is None


def test_collect_sources(tmp_path):
    (tmp_path / "a.c").write_text("int a;\n")
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "b.c").write_text("int b;\n")
    (tmp_path / "notes.txt").write_text("x")
    got = collect_sources([tmp_path, tmp_path / "a.c"])
    assert [p.name for p in got] == ["a.c", "b.c"]
    with pytest.raises(FileNotFoundError):
        collect_sources([tmp_path / "missing"])


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(generator="llm")
    with pytest.raises(ValueError):
        PipelineConfig(engine="klee")
    with pytest.raises(ValueError):
        PipelineConfig(jobs=0)


def test_parallel_scan_matches_serial():
    a = scan_paths([CASES]).findings
    b = scan_paths([CASES], PipelineConfig(jobs=3)).findings
    assert a == b and len(a) == 24
