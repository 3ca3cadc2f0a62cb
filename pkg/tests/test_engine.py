import pytest

from symtee.hir import Assert, Assign, Assume, Cmp, HarnessIR, If, LinExpr, NoOp, SetFlag, SymDecl
from symtee.harness.lower import render_hir
from symtee.harness.model import build_model
from symtee.symexec.concrete import OracleScopeExceeded, brute_force_oracle, failing_assignments, replay
from symtee.symexec.engine import ExecConfig, PathBudgetExceeded, explore, find_violations, minimal_by_site

S = LinExpr.var("size")
K = LinExpr.of


def single_branch_ir(assume_max=4096, capacity=512, flag_guard=None):
    body = [Assume(Cmp("<=", S, K(assume_max))), NoOp("sink")]
    if flag_guard is not None:
        body.insert(1, If(Cmp(">", S, K(flag_guard)), (SetFlag("%flag"),)))
    body.append(If(Cmp(">", S, K(capacity)), (Assert(Cmp("!=", LinExpr.var("%flag"), K(0)), 0, "m"),)))
    return HarnessIR((SymDecl("size"),), (Assign("%flag", K(0)),) + tuple(body))


def test_single_branch_has_two_paths():
    paths = explore(single_branch_ir())
    assert [str(p.condition) for p in paths] == ["size <= 4096 && size > 512", "size <= 4096 && size <= 512"]
    assert [len(p.reached_asserts) for p in paths] == [1, 0]


def test_straight_line_ir_has_one_path():
    ir = HarnessIR((SymDecl("size"),), (Assume(Cmp("<=", S, K(10))), NoOp("sink")))
    assert len(explore(ir)) == 1


def test_single_branch_violation_at_513():
    (v,) = find_violations(single_branch_ir())
    assert v.witness.inputs() == {"size": 513} and v.engine == "builtin"


def test_fixed_model_paths(fixed_slice):
    ir = render_hir(build_model(fixed_slice))
    paths = explore(ir)
    conds = sorted(str(p.condition) for p in paths)
    assert len(paths) == 2
    assert any("dkLen > 512" in c for c in conds) and any("dkLen <= 512" in c for c in conds)
    assert find_violations(ir) == []


def test_trigger_infeasible_under_assumption():
    assert find_violations(single_branch_ir(assume_max=512)) == []


def test_brute_force_on_single_branch():
    rows = failing_assignments(single_branch_ir(), 4096)[0]
    assert rows[:, 0].tolist() == list(range(513, 4097))
    (v,) = brute_force_oracle(single_branch_ir(), 4096)
    assert v.witness.inputs() == {"size": 513} and v.engine == "oracle"


def test_brute_force_guarded_is_empty():
    assert brute_force_oracle(single_branch_ir(flag_guard=512), 4096) == []


def test_brute_force_scope_limits():
    three = HarnessIR(tuple(SymDecl(n) for n in "abc"), (Assert(Cmp("==", K(0), K(0)), 0),))
    with pytest.raises(OracleScopeExceeded):
        brute_force_oracle(three, 10)
    with pytest.raises(OracleScopeExceeded):
        brute_force_oracle(single_branch_ir(), 1 << 20)


def test_path_budget_is_reported():
    body = tuple(If(Cmp(">", S, K(i)), (NoOp(),), (NoOp(),)) for i in range(0, 40, 2))
    ir = HarnessIR((SymDecl("size"),), body)
    with pytest.raises(PathBudgetExceeded):
        explore(ir, ExecConfig(path_budget=4))


def test_paths_partition_the_domain(corpus_slices):
    """Every input in range satisfies exactly one explored path condition."""
    for name, sl in corpus_slices:
        ir = render_hir(build_model(sl))
        if len(ir.decls) > 2:
            continue
        paths = explore(ir)
        names = ir.symbol_names()
        for value in (0, 1, 511, 512, 513, 1024, 4096):
            point = {n: value for n in names}
            hits = [p for p in paths if p.condition.holds(point)]
            assert len(hits) == 1, (name, value)


def test_witnesses_replay_to_their_assert(corpus_slices):
    count = 0
    for name, sl in corpus_slices:
        ir = render_hir(build_model(sl))
        for v in find_violations(ir):
            assert v.path.holds(v.witness.assignment), name
            assert v.assert_site in replay(ir, v.witness.assignment), name
            count += 1
    assert count >= 24


def test_prepended_length_assumption_removes_every_violation(corpus_slices):
    for name, sl in corpus_slices:
        model = build_model(sl)
        ir = render_hir(model)
        # every harness has one symbolic length; bound it by the capacity up front
        length = model.symbolic_inputs[0].name
        guard = Assume(Cmp("<=", LinExpr.var(length), K(model.capacity_bytes)))
        guarded = HarnessIR(ir.decls, (guard,) + ir.body, ir.flags)
        assert find_violations(ir), name
        assert find_violations(guarded) == [], name


def test_builtin_matches_brute_force_on_small_harnesses(corpus_slices):
    compared = 0
    for name, sl in corpus_slices:
        ir = render_hir(build_model(sl))
        if len(ir.decls) > 2:
            continue
        got = minimal_by_site(find_violations(ir))
        want = minimal_by_site(brute_force_oracle(ir, 4096))
        assert {k: w.inputs() for k, w in got.items()} == {k: w.inputs() for k, w in want.items()}, name
        compared += 1
    assert compared >= 20


def test_exploration_is_deterministic(corpus_slices):
    for _, sl in corpus_slices[:6]:
        ir = render_hir(build_model(sl))
        a, b = find_violations(ir), find_violations(ir)
        assert [(v.assert_site, v.witness, v.decisions) for v in a] == \
               [(v.assert_site, v.witness, v.decisions) for v in b]
