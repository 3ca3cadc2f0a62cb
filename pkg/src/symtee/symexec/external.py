"""Adapter for an external KLEE-compatible symbolic execution engine.

The artifact layout and message grammar are described in docs/engine-adapter.md.
"""

from __future__ import annotations

import os
import re
import shutil
import struct
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .solver import PathCondition
from .types import EngineOutcome, Violation, Witness

DEFAULT_TIMEOUT_SECS = 60
LOG_EXCERPT = 4000


class EngineUnavailable(Exception):
    pass


class EngineFailure(Exception):
    def __init__(self, message: str, log: str = ""):
        super().__init__(message)
        self.log = log


class MalformedOutput(Exception):
    pass


@dataclass(frozen=True)
class EngineConfig:
    engine_path: Optional[str] = None
    cc_path: Optional[str] = None
    timeout_secs: float = DEFAULT_TIMEOUT_SECS
    include_dir: Optional[str] = None
    extra_args: tuple[str, ...] = ()

    @classmethod
    def from_env(cls, environ=None) -> "EngineConfig":
        env = os.environ if environ is None else environ
        timeout = env.get("SYMTEE_ENGINE_TIMEOUT_SECS")
        return cls(
            engine_path=env.get("SYMTEE_ENGINE_PATH") or None,
            cc_path=env.get("SYMTEE_ENGINE_CC") or None,
            timeout_secs=float(timeout) if timeout else DEFAULT_TIMEOUT_SECS,
        )


def _resolve(path: Optional[str]) -> Optional[str]:
    if not path:
        return None
    if os.path.sep in path:
        return path if os.access(path, os.X_OK) else None
    return shutil.which(path)


def probe(cfg: EngineConfig) -> tuple[str, str]:
    engine, cc = _resolve(cfg.engine_path), _resolve(cfg.cc_path or "clang")
    if engine is None:
        raise EngineUnavailable("engine executable not configured or not found (SYMTEE_ENGINE_PATH)")
    if cc is None:
        raise EngineUnavailable("bitcode compiler not found (SYMTEE_ENGINE_CC)")
    return engine, cc


# ---- ktest artifacts ------------------------------------------------------

@dataclass(frozen=True)
class KTestObject:
    name: str
    data: bytes

    def as_unsigned(self) -> int:
        return int.from_bytes(self.data, "little")


@dataclass(frozen=True)
class KTest:
    args: tuple[str, ...]
    objects: tuple[KTestObject, ...]


def parse_ktest(blob: bytes) -> KTest:
    """Decode a .ktest file (big-endian length-prefixed records)."""
    pos = 0

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(blob):
            raise MalformedOutput(f"ktest truncated at byte {pos}")
        chunk = blob[pos:pos + n]
        pos += n
        return chunk

    def u32() -> int:
        return struct.unpack(">I", take(4))[0]

    magic = take(5)
    if magic not in (b"KTEST", b"BOUT\n"):
        raise MalformedOutput("bad ktest magic")
    version = u32()
    args = tuple(take(u32()).decode("utf-8", "replace") for _ in range(u32()))
    if version >= 2:
        u32(), u32()  # sym_argvs, sym_argv_len
    objects = []
    for _ in range(u32()):
        name = take(u32()).decode("utf-8", "replace")
        objects.append(KTestObject(name, take(u32())))
    if pos != len(blob):
        raise MalformedOutput("trailing bytes after ktest objects")
    return KTest(args, tuple(objects))


def write_ktest(test: KTest, version: int = 3) -> bytes:
    out = [b"KTEST", struct.pack(">I", version), struct.pack(">I", len(test.args))]
    for a in test.args:
        raw = a.encode()
        out += [struct.pack(">I", len(raw)), raw]
    if version >= 2:
        out.append(struct.pack(">II", 0, 0))
    out.append(struct.pack(">I", len(test.objects)))
    for o in test.objects:
        raw = o.name.encode()
        out += [struct.pack(">I", len(raw)), raw, struct.pack(">I", len(o.data)), o.data]
    return b"".join(out)


# ---- output parsing -------------------------------------------------------

_ERR_HEAD = re.compile(r"^Error:\s*ASSERTION FAIL:\s*(?P<expr>.*)$", re.M)
_ERR_LINE = re.compile(r"^Line:\s*(?P<line>\d+)\s*$", re.M)
_MSG = re.compile(r'"([^"]*)"')


@dataclass
class RawEngineOutput:
    log: str = ""
    err_files: dict[str, str] = field(default_factory=dict)  # test id -> .assert.err text
    ktests: dict[str, bytes] = field(default_factory=dict)  # test id -> .ktest bytes


def collect_artifacts(out_dir: Path, log: str = "") -> RawEngineOutput:
    raw = RawEngineOutput(log=log)
    for p in sorted(out_dir.glob("test*.ktest")):
        raw.ktests[p.stem] = p.read_bytes()
    for p in sorted(out_dir.glob("test*.assert.err")):
        raw.err_files[p.name.split(".")[0]] = p.read_text(errors="replace")
    return raw


def parse_engine_output(raw: RawEngineOutput, symbol_order: Optional[list[str]] = None) -> list[Violation]:
    """Assertion failures from the engine's artifacts, as external violations."""
    found = []
    for test_id, text in sorted(raw.err_files.items()):
        head = _ERR_HEAD.search(text)
        if head is None:
            raise MalformedOutput(f"{test_id}: no assertion-failure line")
        if test_id not in raw.ktests:
            raise MalformedOutput(f"{test_id}: error report without a test artifact")
        kt = parse_ktest(raw.ktests[test_id])
        values = {o.name: o.as_unsigned() for o in kt.objects}
        if symbol_order:
            values = {n: values[n] for n in symbol_order if n in values} | {
                n: v for n, v in values.items() if n not in symbol_order}
        msg = _MSG.search(head.group("expr"))
        line = _ERR_LINE.search(text)
        domains = {n: (0, (1 << (8 * len(o.data))) - 1) for n, o in ((o.name, o) for o in kt.objects)}
        found.append(Violation(
            assert_site=int(line.group("line")) if line else -1,
            path=PathCondition([], domains, list(values)),
            witness=Witness(values),
            engine="external",
            message=msg.group(1) if msg else head.group("expr").strip(),
            artifact=test_id,
        ))
    return found


# ---- running --------------------------------------------------------------

def _excerpt(text: str) -> str:
    return text if len(text) <= LOG_EXCERPT else "..." + text[-LOG_EXCERPT:]


def external_engine_run(harness_source: bytes, cfg: Optional[EngineConfig] = None,
                        symbol_order: Optional[list[str]] = None) -> EngineOutcome:
    cfg = cfg or EngineConfig.from_env()
    try:
        engine, cc = probe(cfg)
    except EngineUnavailable as e:
        return EngineOutcome("unavailable", log=str(e))
    with tempfile.TemporaryDirectory(prefix="symtee-engine-") as tmp:
        work = Path(tmp)
        src, bc, out_dir = work / "harness.c", work / "harness.bc", work / "klee-out"
        src.write_bytes(harness_source)
        compile_cmd = [cc, "-emit-llvm", "-c", "-g", "-O0", "-Xclang", "-disable-O0-optnone"]
        if cfg.include_dir:
            compile_cmd.append(f"-I{cfg.include_dir}")
        compile_cmd += ["-o", str(bc), str(src)]
        try:
            cp = subprocess.run(compile_cmd, capture_output=True, text=True, timeout=cfg.timeout_secs)
        except subprocess.TimeoutExpired:
            return EngineOutcome("failure", log="compiler timed out")
        if cp.returncode != 0:
            return EngineOutcome("failure", log=_excerpt(cp.stderr or cp.stdout))
        run_cmd = [engine, f"--output-dir={out_dir}", f"--max-time={int(cfg.timeout_secs)}s",
                   *cfg.extra_args, str(bc)]
        try:
            rp = subprocess.run(run_cmd, capture_output=True, text=True, timeout=cfg.timeout_secs + 10)
        except subprocess.TimeoutExpired:
            return EngineOutcome("failure", log="engine exceeded its wall-clock budget")
        log = (rp.stdout or "") + (rp.stderr or "")
        if rp.returncode != 0 or not out_dir.is_dir():
            return EngineOutcome("failure", log=_excerpt(log))
        try:
            violations = parse_engine_output(collect_artifacts(out_dir, log), symbol_order)
        except MalformedOutput as e:
            return EngineOutcome("failure", log=f"{e}\n{_excerpt(log)}")
        return EngineOutcome.from_violations(violations, _excerpt(log))
