import json

import pytest

from symtee.cparse import parse_unit
from symtee.cparse.semantics import UnitIndex
from symtee.report import suggested_guard
from symtee.harness.model import build_model
from symtee.slicer import (
    DEFAULT_SINKS, SinkSpec, analyze_candidates, extract_slice, find_sink_calls, has_dominating_guard,
    load_sink_specs, resolve_dest_capacity, slice_source, trace_length_source,
)

from conftest import CASES, candidate


PBKDF2 = (CASES / "real" / "pbkdf2_vuln" / "crypto_ta_pbkdf2.c").read_bytes()
PBKDF2_FIXED = (CASES / "real" / "pbkdf2_fixed" / "crypto_ta_pbkdf2.c").read_bytes()
PRODUCE = (CASES / "synth" / "produce" / "producer.c").read_bytes()


def test_pbkdf2_has_one_sink_at_the_copy():
    cands = find_sink_calls(parse_unit(PBKDF2, "p.c"), DEFAULT_SINKS)
    assert [(c.spec.api_name, c.line) for c in cands] == [("TEE_MemMove", 30)]


def test_no_calls_no_candidates():
    assert find_sink_calls(parse_unit(b"int f(int x) { return x + 1; }\n"), DEFAULT_SINKS) == []


def test_function_pointer_alias_is_not_matched():
    src = (CASES / "synth" / "fn_alias" / "token_cache.c").read_bytes()
    assert find_sink_calls(parse_unit(src), DEFAULT_SINKS) == []


def test_capacity_of_local_array():
    _, _, cand = candidate(PRODUCE)
    assert cand.capacity.fixed and cand.capacity.bytes == 512


def test_capacity_4096_buffer():
    _, _, cand = candidate(b"void f(const char *s, unsigned n) { char buf[4096]; memcpy(buf, s, n); }\n")
    assert cand.capacity.bytes == 4096


def test_capacity_of_void_pointer_param_is_unresolved():
    _, _, cand = candidate(b"void f(void *d, const char *s, unsigned n) { memcpy(d, s, n); }\n")
    assert not cand.capacity.fixed


def test_capacity_through_address_of_first_element():
    _, _, cand = candidate(b"static char g[300];\nvoid f(const char *s, unsigned n) { memcpy(&g[0], s, n); }\n")
    assert cand.capacity.bytes == 300


def test_length_param_field():
    _, _, cand = candidate(PRODUCE)
    assert cand.length.kind == "param_field"
    assert (cand.length.param_index, cand.length.field_path) == (0, ("memref", "size"))


def test_length_constant():
    _, _, cand = candidate(b"void f(const char *s) { char b[512]; memcpy(b, s, 256); }\n")
    assert (cand.length.kind, cand.length.value) == ("constant", 256)


def test_length_local_derived_chain():
    src = (CASES / "synth" / "local_chain" / "record_store.c").read_bytes()
    _, _, cand = candidate(src)
    assert cand.length.kind == "local_derived"
    assert cand.length.base.kind == "param_field"
    assert cand.length.base.param_index == 1
    assert cand.length.base.field_path == ("memref", "size")


def test_length_from_call_result_is_opaque():
    _, _, cand = candidate(b"int g(void);\nvoid f(const char *s) { char b[8]; memcpy(b, s, g()); }\n")
    assert cand.length.kind == "opaque"


def test_fixed_pbkdf2_is_guarded_and_original_is_not():
    assert candidate(PBKDF2_FIXED)[2].guard.guarded
    assert not candidate(PBKDF2)[2].guard.guarded


def test_guard_on_unrelated_variable_does_not_count():
    src = (CASES / "synth" / "unrelated_guard" / "mixed_check.c").read_bytes()
    assert not candidate(src)[2].guard.guarded


def test_guard_looser_than_capacity_does_not_count():
    src = (CASES / "synth" / "loose_guard" / "loose_guard.c").read_bytes()
    assert not candidate(src)[2].guard.guarded


def test_guard_against_sizeof_dest():
    src = (CASES / "synth" / "multi_sink" / "multi_sink.c").read_bytes()
    assert candidate(src, line=11)[2].guard.guarded
    assert not candidate(src, line=13)[2].guard.guarded


def test_sink_nested_under_checking_branch_is_guarded():
    src = b"void f(const char *s, unsigned n) { char b[64]; if (n <= 64) { memcpy(b, s, n); } }\n"
    assert candidate(src)[2].guard.guarded


def test_produce_slice_carries_its_typedefs():
    out = slice_source(PRODUCE, "producer.c")
    sl = out[0].slice
    assert b"memref_t" in b"".join(sl.required_decls)
    assert b"TEE_Param" in b"".join(sl.required_decls)
    parse_unit(sl.text())


def test_builtin_only_function_has_no_required_decls():
    out = slice_source(b"void f(const char *s, unsigned n) { char b[16]; memcpy(b, s, n); }\n")
    assert out[0].slice.required_decls == []


def test_missing_external_declaration_drops_candidate():
    src = (CASES / "synth" / "extern_len" / "session_blob.c").read_bytes()
    (out,) = slice_source(src, "session_blob.c")
    assert out.slice is None and out.dropped.startswith("slice error")


def test_opaque_length_with_unresolved_capacity_is_dropped():
    src = b"int g(void);\nvoid f(void *d, const char *s) { memcpy(d, s, g()); }\n"
    (out,) = slice_source(src)
    assert out.slice is None


def test_sink_spec_rejects_shared_roles():
    with pytest.raises(ValueError):
        SinkSpec("x", 0, 0, 2)


def test_load_sink_specs(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"sinks": [{"name": "my_copy", "dest": 1, "src": 2, "len": 0}]}))
    (spec,) = load_sink_specs(p)
    assert (spec.api_name, spec.dest_arg, spec.len_arg) == ("my_copy", 1, 0)
    src = b"void f(const char *s, unsigned n) { char b[8]; my_copy(n, b, s); }\n"
    assert len(find_sink_calls(parse_unit(src), (spec,))) == 1


def test_candidates_point_at_sink_calls(corpus):
    for case in corpus:
        for fname, data in case.sources.items():
            for c in find_sink_calls(parse_unit(data, fname), DEFAULT_SINKS):
                assert c.call_span.text(data).startswith(c.spec.api_name.encode())
                assert c.function.span.contains(c.call_span)


def _insert_guard(src: bytes, line: int, guard: str) -> bytes:
    lines = src.split(b"\n")
    indent = lines[line - 1][: len(lines[line - 1]) - len(lines[line - 1].lstrip())]
    lines.insert(line - 1, indent + guard.encode())
    return b"\n".join(lines)


def test_guard_monotonicity_on_every_corpus_sink(corpus):
    flipped = 0
    for case in corpus:
        for fname, data in case.sources.items():
            for o in slice_source(data, fname):
                if o.candidate.guard.guarded:
                    continue
                model = build_model(o.slice) if o.slice is not None else None
                guard = suggested_guard(o.candidate, model) if model else \
                    f"if ({o.candidate.call_span.text(data).split(b',')[-1].rstrip(b')').decode().strip()} > 512) return 0;"
                patched = _insert_guard(data, o.candidate.line, guard)
                again = [x for x in slice_source(patched, fname) if x.candidate.line == o.candidate.line + 1]
                assert again and again[0].candidate.guard.guarded, (case.name, o.candidate.line, guard)
                flipped += 1
    assert flipped == 25  # 24 sliced sinks plus the unsliceable extern_len sink


def test_every_slice_parses_standalone(corpus_slices):
    assert len(corpus_slices) == 24
    for _, sl in corpus_slices:
        parse_unit(sl.text(), sl.file_id)
