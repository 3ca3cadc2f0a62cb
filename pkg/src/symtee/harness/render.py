"""Emit a harness model as one self-contained C file."""

from __future__ import annotations

from .model import ORACLE_MESSAGE, HarnessModel

INTRINSICS_INCLUDE = "#include <klee/klee.h>"


def render_source(model: HarnessModel) -> bytes:
    blocks = [INTRINSICS_INCLUDE]
    head = [s.text for s in model.stubs if s.kind in ("type", "constant")]
    head += [d.decode() for d in model.slice.required_decls]
    head += [s.text for s in model.stubs if s.kind == "flag"]
    if head:
        blocks.append("\n".join(head))
    blocks += [s.text for s in model.stubs if s.kind == "function"]
    blocks.append(model.instrumented_text.decode())
    blocks.append(_main(model))
    return ("\n\n".join(blocks) + "\n").encode()


def _main(model: HarnessModel) -> str:
    objects, buffers, setup = [], [], []
    for plan in model.args:
        for d in plan.decls:
            if d.startswith("char ") and d not in buffers:
                buffers.append(d)
            elif d not in objects:
                objects.append(d)
        setup += [s for s in plan.setup if s not in setup]
    if any("= buf;" in s for s in setup):
        buffers.insert(0, f"char buf[{model.domain_bound}];")
    sym = []
    for s in model.symbolic_inputs:
        sym.append(f"{s.c_type} {s.name};")
        sym.append(f'klee_make_symbolic(&{s.name}, sizeof({s.name}), "{s.name}");')
    sym += [f"klee_assume({a.c_text()});" for a in model.assumptions]

    call = f"{model.function_name}({', '.join(p.expr for p in model.args)});"
    oracle = model.oracle
    if oracle.kind == "return_value":
        call = "TEE_Result res = " + call
        check = f'klee_assert(res == {oracle.expected_error} && "{ORACLE_MESSAGE}");'
    else:
        check = f'klee_assert({oracle.flag_name} && "{ORACLE_MESSAGE}");'

    groups = [objects, buffers + sym, setup, [call]]
    lines = ["int main(void) {"]
    for g in groups:
        if g:
            lines += ["    " + x for x in g]
            lines.append("")
    lines.append(f"    if ({oracle.trigger_text()}) {{")
    lines.append("        " + check)
    lines.append("    }")
    lines.append("    return 0;")
    lines.append("}")
    return "\n".join(lines)
