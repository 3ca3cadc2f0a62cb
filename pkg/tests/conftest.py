import shutil
import struct
import sys
import textwrap
from pathlib import Path

import pytest

from symtee.symexec.external import EngineConfig
from symtee.bench import bundled_corpus_root, load_corpus
from symtee.harness.model import build_model
from symtee.cparse import parse_unit
from symtee.cparse.semantics import UnitIndex
from symtee.slicer import (DEFAULT_SINKS, extract_slice, find_sink_calls, has_dominating_guard,
                           resolve_dest_capacity, slice_source, trace_length_source)

DATA = Path(__file__).parent / "data"
CORPUS = bundled_corpus_root()
CASES = CORPUS / "cases"
FIXTURES = Path(__file__).resolve().parents[1] / "src" / "symtee" / "data" / "fixtures"


def candidate(src: bytes, line=None, file_id="t.c"):
    """First (or the given line's) sink candidate with all analyses filled in."""
    unit = parse_unit(src, file_id)
    index = UnitIndex(unit)
    cands = find_sink_calls(unit, DEFAULT_SINKS)
    cand = cands[0] if line is None else next(c for c in cands if c.line == line)
    cand.capacity = resolve_dest_capacity(cand, unit, index)
    cand.length = trace_length_source(cand, unit, index)
    cand.guard = has_dominating_guard(cand, unit, index)
    return unit, index, cand


def forced_slice(path: Path, line=None):
    """Slice a sink even when the slicer would drop it as guarded."""
    unit, index, cand = candidate(path.read_bytes(), line, path.name)
    return extract_slice(cand, unit, index)


def only_slice(path: Path, function: str | None = None):
    outcomes = [o for o in slice_source(path.read_bytes(), path.name)
                if o.slice is not None and (function is None or o.slice.function_name == function)]
    assert len(outcomes) == 1, [o.candidate.line for o in outcomes]
    return outcomes[0].slice


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(CORPUS)


@pytest.fixture(scope="session")
def corpus_slices(corpus):
    out = []
    for case in corpus:
        for fname, data in case.sources.items():
            for o in slice_source(data, fname):
                if o.slice is not None:
                    out.append((case.name, o.slice))
    return out


@pytest.fixture
def produce_slice():
    return only_slice(CASES / "synth" / "produce" / "producer.c")


@pytest.fixture
def pbkdf2_slice():
    return only_slice(CASES / "real" / "pbkdf2_vuln" / "crypto_ta_pbkdf2.c")


@pytest.fixture
def fixed_slice():
    return forced_slice(CASES / "real" / "pbkdf2_fixed" / "crypto_ta_pbkdf2.c")


@pytest.fixture
def produce_model(produce_slice):
    return build_model(produce_slice)


# ---- stand-in for an external engine ---------------------------------------

needs_clang = pytest.mark.skipif(shutil.which("clang") is None, reason="clang not installed")

ERR_TEXT = ('Error: ASSERTION FAIL: g_checked && "Missing input validation"\n'
            "File: harness.c\nLine: 31\nassembly.ll line: 88\nStack:\n\t#000 in main\n")


def ktest_bytes(objects, version=3, args=("harness.bc",)):
    """Independent encoder following the published ktest layout."""
    out = b"KTEST" + struct.pack(">I", version) + struct.pack(">I", len(args))
    for a in args:
        out += struct.pack(">I", len(a)) + a.encode()
    if version >= 2:
        out += struct.pack(">II", 0, 0)
    out += struct.pack(">I", len(objects))
    for name, data in objects:
        out += struct.pack(">I", len(name)) + name.encode() + struct.pack(">I", len(data)) + data
    return out


def make_fake_engine(tmp_path: Path, size=513, exit_status=0) -> EngineConfig:
    """Engine stand-in: reports one failing test with the given size, or none when size is None."""
    inc = tmp_path / "include" / "klee"
    inc.mkdir(parents=True, exist_ok=True)
    (inc / "klee.h").write_text(
        "#include <stddef.h>\n#include <stdint.h>\n"
        "void klee_make_symbolic(void *, unsigned long, const char *);\n"
        "void klee_assume(unsigned long);\nvoid klee_assert(int);\n")
    writes = ""
    if size is not None:
        blob = ktest_bytes([("size", size.to_bytes(8, "little"))])
        writes = (f"(out / 'test000001.ktest').write_bytes({blob!r})\n"
                  f"(out / 'test000001.assert.err').write_text({ERR_TEXT!r})\n")
    else:
        writes = f"(out / 'test000001.ktest').write_bytes({ktest_bytes([('size', bytes(8))])!r})\n"
    script = tmp_path / f"fake-engine-{size}-{exit_status}"
    script.write_text(f"#!{sys.executable}\n" + textwrap.dedent("""\
        import pathlib, sys
        out = pathlib.Path(next(a.split("=", 1)[1] for a in sys.argv if a.startswith("--output-dir=")))
        assert pathlib.Path(sys.argv[-1]).read_bytes()[:2] == b"BC"
        out.mkdir()
        """) + writes + f"print('KLEE: done: generated tests = 1')\nsys.exit({exit_status})\n")
    script.chmod(0o755)
    return EngineConfig(engine_path=str(script), include_dir=str(tmp_path / "include"), timeout_secs=30)


@pytest.fixture
def fake_engine(tmp_path):
    return make_fake_engine(tmp_path)


# ---- acceptance summary ------------------------------------------------------

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criterion")
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion metadata")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        _criteria[number] = (status, title)
    elif rep.failed:
        _criteria[number] = ("FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, title = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
