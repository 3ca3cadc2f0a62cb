"""Score the bundled corpus and list what each case contributed.

    python3 demos/bench_table.py
"""

from symtee.bench import bundled_corpus_root, load_corpus, run_bench, score

outcomes = run_bench(load_corpus(bundled_corpus_root()))
print(score(outcomes).render_text())
for o in outcomes:
    if o.missed:
        reasons = {c.dropped for f in o.files for c in f.candidates} or {"no sink call visible"}
        print(f"missed {o.case.name}: {o.slices} slices ({', '.join(sorted(reasons))})")
