import os

import pytest

from symtee.harness.render import render_source
from symtee.symexec.engine import find_violations
from symtee.harness.lower import render_hir
from symtee.symexec.external import (
    EngineConfig, KTest, KTestObject, MalformedOutput, RawEngineOutput, external_engine_run, parse_engine_output,
    parse_ktest, write_ktest,
)

from conftest import DATA, ERR_TEXT, ktest_bytes, make_fake_engine, needs_clang

def test_ktest_decodes_little_endian_values():
    kt = parse_ktest(ktest_bytes([("size", (513).to_bytes(8, "little"))]))
    assert kt.args == ("harness.bc",)
    assert [(o.name, o.as_unsigned()) for o in kt.objects] == [("size", 513)]


def test_ktest_round_trip():
    kt = KTest(("a.bc",), (KTestObject("n", b"\x01\x02"), KTestObject("m", b"")))
    assert parse_ktest(write_ktest(kt)) == kt
    assert write_ktest(kt) == ktest_bytes([("n", b"\x01\x02"), ("m", b"")], args=("a.bc",))


def test_legacy_version_one_has_no_sym_argv_fields():
    kt = parse_ktest(ktest_bytes([("x", b"\x05")], version=1))
    assert kt.objects[0].as_unsigned() == 5


@pytest.mark.parametrize("cut", [3, 9, 20, -1])
def test_truncated_ktest_is_malformed(cut):
    with pytest.raises(MalformedOutput):
        parse_ktest(ktest_bytes([("size", b"\x01" * 8)])[:cut])


def test_trailing_bytes_are_malformed():
    with pytest.raises(MalformedOutput):
        parse_ktest(ktest_bytes([("size", b"\x01" * 8)]) + b"\x00")


def test_bad_magic_is_malformed():
    with pytest.raises(MalformedOutput):
        parse_ktest(b"NOTKT" + b"\x00" * 20)


def test_assertion_log_gives_one_violation():
    raw = RawEngineOutput(err_files={"test000002": ERR_TEXT},
                          ktests={"test000002": ktest_bytes([("size", (513).to_bytes(8, "little"))])})
    (v,) = parse_engine_output(raw, ["size"])
    assert v.engine == "external" and v.message == "Missing input validation"
    assert v.assert_site == 31 and v.artifact == "test000002"
    assert v.witness.inputs() == {"size": 513}


def test_no_error_files_means_no_violations():
    assert parse_engine_output(RawEngineOutput(ktests={"test000001": ktest_bytes([])})) == []


def test_error_file_without_ktest_is_malformed():
    with pytest.raises(MalformedOutput):
        parse_engine_output(RawEngineOutput(err_files={"test000001": ERR_TEXT}))


def test_error_file_without_assertion_line_is_malformed():
    raw = RawEngineOutput(err_files={"test000001": "Error: memory error\n"}, ktests={"test000001": ktest_bytes([])})
    with pytest.raises(MalformedOutput):
        parse_engine_output(raw)


def test_unset_engine_is_unavailable():
    out = external_engine_run(b"int main(void){return 0;}\n", EngineConfig.from_env({}))
    assert out.status == "unavailable" and "SYMTEE_ENGINE_PATH" in out.log


def test_env_configuration():
    cfg = EngineConfig.from_env({"SYMTEE_ENGINE_PATH": "/opt/klee", "SYMTEE_ENGINE_CC": "clang-14",
                                 "SYMTEE_ENGINE_TIMEOUT_SECS": "5"})
    assert (cfg.engine_path, cfg.cc_path, cfg.timeout_secs) == ("/opt/klee", "clang-14", 5.0)


# ---- fake engine: exercises the subprocess contract without KLEE -----------

@needs_clang
def test_fake_engine_run_reports_violation(fake_engine, produce_model):
    out = external_engine_run(render_source(produce_model), fake_engine, ["size"])
    assert out.status == "violations"
    assert [v.witness.inputs() for v in out.violations] == [{"size": 513}]
    assert "generated tests = 1" in out.log


@needs_clang
def test_compile_failure_is_engine_failure(fake_engine):
    out = external_engine_run(b"int main(void) { return }\n", fake_engine)
    assert out.status == "failure" and "error" in out.log


@needs_clang
def test_engine_crash_is_engine_failure(tmp_path, produce_model):
    cfg = make_fake_engine(tmp_path, exit_status=3)
    out = external_engine_run(render_source(produce_model), cfg)
    assert out.status == "failure" and "generated tests" in out.log


@needs_clang
def test_clean_engine_run(tmp_path, produce_model):
    out = external_engine_run(render_source(produce_model), make_fake_engine(tmp_path, size=None))
    assert out.status == "clean" and out.violations == []


@pytest.mark.skipif(not os.environ.get("SYMTEE_ENGINE_PATH"), reason="SYMTEE_ENGINE_PATH not configured")
def test_real_engine_agrees_with_builtin(produce_model):
    out = external_engine_run((DATA / "produce_harness.c").read_bytes(), EngineConfig.from_env(), ["size"])
    assert out.status in ("violations", "clean"), out.log
    builtin = find_violations(render_hir(produce_model))
    assert (out.status == "violations") == bool(builtin)
    assert all(v.witness.inputs()["size"] > 512 for v in out.violations)


@needs_clang
def test_every_corpus_harness_compiles(tmp_path, fake_engine, corpus_slices):
    import subprocess
    from symtee.harness.model import build_model
    for name, sl in corpus_slices:
        src = tmp_path / "h.c"
        src.write_bytes(render_source(build_model(sl)))
        cp = subprocess.run(["clang", "-fsyntax-only", "-Werror=implicit-function-declaration",
                             f"-I{fake_engine.include_dir}", str(src)], capture_output=True, text=True)
        assert cp.returncode == 0, (name, cp.stderr)
