"""Walk one vulnerable sink through every stage, then scan its fixed twin.

    python3 demos/pbkdf2_walkthrough.py
"""

from symtee.bench import bundled_corpus_root
from symtee.harness.lower import render_hir
from symtee.harness.model import build_model
from symtee.harness.render import render_source
from symtee.pipeline import scan_paths
from symtee.report import render_report
from symtee.slicer import slice_source
from symtee.symexec.engine import explore, find_violations

cases = bundled_corpus_root() / "cases" / "real"
vuln = cases / "pbkdf2_vuln" / "crypto_ta_pbkdf2.c"

(outcome,) = slice_source(vuln.read_bytes(), vuln.name)
cand = outcome.candidate
print(f"sink: {cand.spec.api_name} at line {cand.line} in {cand.function_name}")
print(f"  destination capacity: {cand.capacity.bytes} bytes")
print(f"  length origin: {cand.length.kind}, guarded: {cand.guard.guarded}")

model = build_model(outcome.slice)
print("\nharness main():")
src = render_source(model).decode()
print(src[src.index("int main(void)"):])

ir = render_hir(model)
for i, path in enumerate(explore(ir), 1):
    print(f"path {i}: {path.condition}  asserts reached: {len(path.reached_asserts)}")
(v,) = find_violations(ir)
print(f"violation witness: {v.witness.inputs()}")

print("\nreport for the vulnerable copy:")
print(render_report(scan_paths([vuln.parent]).findings, "text").decode())
print("report for the fixed copy:")
print(render_report(scan_paths([cases / "pbkdf2_fixed"]).findings, "text").decode())
