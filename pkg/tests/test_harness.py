import dataclasses

import pytest

from symtee import hir
from symtee.cparse import parse_unit, walk
from symtee.cparse.nodes import Call, FunctionDef
from symtee.harness.lower import LoweringError, lift_source_to_hir, render_hir
from symtee.harness.model import HarnessConfig, build_model
from symtee.harness.render import render_source
from symtee.slicer import slice_source
from symtee.symexec.engine import find_violations

from conftest import DATA

INTRINSICS = {"klee_make_symbolic", "klee_assume", "klee_assert"}


def test_produce_harness_matches_golden_text(produce_model):
    assert render_source(produce_model) == (DATA / "produce_harness.c").read_bytes()


def test_produce_model_shape(produce_model):
    m = produce_model
    assert [s.name for s in m.symbolic_inputs] == ["size"]
    assert m.symbolic_inputs[0].domain_upper_bound == 4096
    assert [a.c_text() for a in m.assumptions] == ["size <= 4096UL"]
    assert m.oracle.kind == "flag" and m.oracle.flag_name == "g_checked"
    assert m.oracle.trigger_text() == "size > 512UL"
    assert m.capacity_bytes == 512
    assert m.stub_kinds() == {"TEE_MemMove": "function", "g_checked": "flag"}


def test_produce_ir_has_assume_sink_and_guarded_assert(produce_model):
    ir = render_hir(produce_model)
    ir.validate()
    assert ir.symbol_names() == ["size"]
    stmts = list(hir.iter_stmts(ir.body))
    assumes = [s for s in stmts if isinstance(s, hir.Assume)]
    assert len(assumes) == 1 and "<= 4096" in str(assumes[0].cond)
    assert any(isinstance(s, hir.NoOp) and s.label == "sink TEE_MemMove" for s in stmts)
    (guard,) = [s for s in ir.body if isinstance(s, hir.If)]
    assert str(guard.cond).endswith("> 512")
    assert isinstance(guard.then[0], hir.Assert)


def test_fixed_pbkdf2_returns_error_before_sink(fixed_slice):
    model = build_model(fixed_slice)
    assert model.oracle.kind == "return_value"
    assert model.oracle.expected_error == "TEE_ERROR_BAD_PARAMETERS"
    ir = render_hir(model)
    (call,) = [s for s in ir.body if isinstance(s, hir.Call)]
    body = list(call.body)
    sink = next(i for i, s in enumerate(body) if isinstance(s, hir.NoOp) and s.label.startswith("sink"))
    guard = body[sink - 1]
    assert isinstance(guard, hir.If) and str(guard.cond).endswith("> 512")
    assert isinstance(guard.then[0], hir.Return)
    assert find_violations(ir) == []


def test_golden_text_lifts_to_the_same_verdict(produce_model):
    lifted = lift_source_to_hir((DATA / "produce_harness.c").read_bytes())
    rendered = render_hir(produce_model)
    a, b = find_violations(lifted), find_violations(rendered)
    assert [v.witness.inputs() for v in a] == [v.witness.inputs() for v in b] == [{"size": 513}]


def test_golden_text_with_elided_tail_still_lowers():
    # the trailing "......" is kept as an opaque statement
    ir = lift_source_to_hir((DATA / "produce_harness_elided.c").read_bytes())
    assert [v.witness.inputs() for v in find_violations(ir)] == [{"size": 513}]


def _without_assert(text: bytes) -> bytes:
    return b"\n".join(l for l in text.split(b"\n") if b"klee_assert" not in l)


def test_missing_assert_is_no_oracle():
    src = _without_assert((DATA / "produce_harness.c").read_bytes())
    with pytest.raises(LoweringError, match="no oracle"):
        lift_source_to_hir(src)


def test_assume_only_harness_is_no_oracle():
    src = (b"#include <klee/klee.h>\nint main(void) {\n    unsigned long size;\n"
           b"    klee_make_symbolic(&size, sizeof(size), \"size\");\n"
           b"    klee_assume(size <= 4096UL);\n    return 0;\n}\n")
    with pytest.raises(LoweringError, match="no oracle"):
        lift_source_to_hir(src)


def test_loop_with_symbolic_bound_is_rejected():
    src = b"""#include <klee/klee.h>
int g_checked = 0;
void copy(unsigned long n) {
    unsigned long i;
    for (i = 0; i < n; i++) {
        if (n > 16) { g_checked = 1; return; }
    }
}
int main(void) {
    unsigned long n;
    klee_make_symbolic(&n, sizeof(n), "n");
    copy(n);
    if (n > 16UL) {
        klee_assert(g_checked && "Missing input validation");
    }
    return 0;
}
"""
    with pytest.raises(LoweringError, match="symbolic bound"):
        lift_source_to_hir(src)


def test_missing_main_is_rejected():
    with pytest.raises(LoweringError, match="no main"):
        lift_source_to_hir(b"int f(void) { return 0; }\n")


def test_render_is_deterministic(corpus_slices):
    for _, sl in corpus_slices:
        m1, m2 = build_model(sl), build_model(sl)
        assert render_source(m1) == render_source(m2)
        assert str(render_hir(m1)) == str(render_hir(m2))


def test_every_corpus_harness_parses_lowers_and_is_stub_complete(corpus_slices):
    for name, sl in corpus_slices:
        src = render_source(build_model(sl))
        unit = parse_unit(src, name)
        defined = {f.name for f in unit.functions()}
        called = {n.callee for n in walk(unit) if isinstance(n, Call) and n.callee}
        assert called - defined - INTRINSICS == set(), name
        ir = lift_source_to_hir(src)
        ir.validate()
        assert ir.asserts(), name


def test_empty_trigger_region_has_no_violations(produce_slice):
    cfg = HarnessConfig(domain_bound=512)
    model = build_model(produce_slice, cfg)
    ir = render_hir(model, cfg)
    assert find_violations(ir) == []


def test_domain_bound_below_capacity_is_also_clean(produce_slice):
    cfg = HarnessConfig(domain_bound=100)
    assert find_violations(render_hir(build_model(produce_slice, cfg), cfg)) == []


def test_unresolved_capacity_uses_configured_default():
    src = b"void f(void *d, const char *s, unsigned long n) {\n    memcpy(d, s, n);\n}\n"
    (o,) = slice_source(src, "d.c")
    assert build_model(o.slice).capacity_bytes == 512
    assert build_model(o.slice, HarnessConfig(default_capacity=64)).capacity_bytes == 64


def test_flag_is_set_on_validating_exit():
    src = (b"void f(const char *s, unsigned long n) {\n    char b[32];\n    if (n > 40) {\n        return;\n    }\n"
           b"    memcpy(b, s, n);\n}\n")
    (o,) = slice_source(src, "f.c")
    model = build_model(o.slice)
    assert model.oracle.kind == "flag"
    assert b"g_checked = 1;" in model.instrumented_text
    # instrumentation keeps line numbers
    assert model.instrumented_text.count(b"\n") == o.slice.function_text.count(b"\n")
    (v,) = find_violations(render_hir(model))
    assert v.witness.inputs() == {"n": 33}


def test_config_rejects_nonpositive_capacity():
    with pytest.raises(ValueError):
        HarnessConfig(default_capacity=0)
