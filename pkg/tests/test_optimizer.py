from hypothesis import given, settings, strategies as st

from juliette.core import (
    TOP, UNIT, BoolTag, Call, EvalGlobal, IntTag, MethodDef, MethodTable, Seq, Val, Var, call,
    lit, mdef, prim,
)
from juliette.evaluator import MachineState
from juliette.fuzz import opt_case
from juliette.harness import freeze, optdiff_frozen
from juliette.optimizer import (
    OptEntry, OptResult, certify, check_expr_opt, check_md_opt, check_method_valid,
    check_table_opt, format_phi, optimize, parse_phi,
)
from juliette.parser import parse_program
from programs import DIRECT_CASE, INLINE_CASE

G1 = mdef("g", [("x", TOP)], prim("+", Var("x"), Var("x")))
G2 = mdef("g", [("x", BoolTag)], Var("x"))
F = mdef("f", [("x", IntTag)], prim("*", Var("x"), call("g", Var("x"))))
M = MethodTable((G1, G2, F))
PRINT_X = Seq(prim("print", Var("x")), Var("x"))
F_DIRECT = mdef("f", [("x", IntTag)], prim("*", Var("x"), call("g", PRINT_X)))
MD = MethodTable((G1, G2, F_DIRECT))
INT_X = {"x": IntTag}


def test_inline_judgment():
    inlined = Seq(Val(UNIT), prim("+", Var("x"), Var("x")))
    assert check_expr_opt((), INT_X, M, call("g", Var("x")), M, inlined)
    # without a concrete type for x nothing is known about dispatch
    assert not check_expr_opt((), {"x": TOP}, M, call("g", Var("x")), M, inlined)
    # the Bool method would be the wrong body
    assert not check_expr_opt((), INT_X, M, call("g", Var("x")), M, Seq(Val(UNIT), Var("x")))


def test_value_reflexivity():
    for v in (lit(1), lit("s"), lit(None), lit(2.5)):
        assert check_expr_opt((), {}, M, v, M, v)


def test_direct_judgment():
    h = mdef("h", [("x", TOP)], prim("+", Var("x"), Var("x")))
    M2 = MethodTable(M.entries + (h,))
    phi = (OptEntry((IntTag,), "g", "h"),)
    e, e2 = call("g", PRINT_X), call("h", PRINT_X)
    assert check_expr_opt(phi, INT_X, M, e, M2, e2)
    assert check_method_valid(phi, M, M2, phi[0])
    assert not check_expr_opt((), INT_X, M, e, M2, e2)
    assert not check_expr_opt(phi, {"x": TOP}, M, e, M2, e2)
    # inlining a non-near-value argument would duplicate the print
    dup = Seq(Val(UNIT), prim("+", PRINT_X, PRINT_X))
    assert not check_expr_opt((), INT_X, M, e, M, dup)


def test_table_judgment():
    assert check_table_opt((), call("f", lit(5)), M, M)
    f2 = mdef("f", [("x", IntTag)], prim("*", Var("x"), Seq(Val(UNIT), prim("+", Var("x"), Var("x")))))
    M2 = MethodTable((G1, G2, f2))
    assert check_table_opt((), call("f", lit(5)), M, M2)
    clash = MethodTable(M.entries + (mdef("g", [("x", IntTag)], lit(0)),))
    assert not check_table_opt((), call("f", lit(5)), M, clash)
    assert not check_table_opt((), call("f", lit(5)), M, MethodTable((G1, G2)))
    # name compatibility for the expression: a name M lacks must stay undefined
    extra = MethodTable(M.entries + (mdef("q", [], lit(0)),))
    assert check_table_opt((), call("f", lit(5)), M, extra)
    assert not check_table_opt((), call("q"), M, extra)


def test_method_def_allows_positional_renaming():
    renamed = mdef("f", [("y", IntTag)], prim("*", Var("y"), call("g", Var("y"))))
    assert check_md_opt((), M, M, F, renamed)
    assert not check_md_opt((), M, M, F, mdef("f", [("y", TOP)], renamed.body))


def test_no_rewriting_under_evalg():
    e = EvalGlobal(call("g", lit(1)))
    assert check_expr_opt((), {}, M, e, M, e)
    assert not check_expr_opt((), {}, M, e, M, EvalGlobal(Seq(Val(UNIT), prim("+", lit(1), lit(1)))))


def test_named_inline():
    res = optimize(M, call("f", lit(5)), 1, 1)
    assert res.table.entries[2].body == prim(
        "*", Var("x"), Seq(Val(UNIT), prim("+", Var("x"), Var("x"))))
    assert res.phi == () and certify(res, M, call("f", lit(5)))


def test_named_direct():
    e = call("f", lit(5))
    res = optimize(MD, e, 1, 1)
    assert [md.name for md in res.table.entries] == ["g", "g", "f", "%opt0"]
    assert res.table.entries[3] == mdef("%opt0", [("x", IntTag)], G1.body)
    assert format_phi(res.phi) == "(Int) g -> %opt0\n"
    assert certify(res, MD, e)
    direct = optimize(MD, e, 1, 0)
    assert direct.table.entries[3] == mdef("%opt0", [("x", TOP)], G1.body)
    assert direct.table.entries[2].body == prim("*", Var("x"), call("%opt0", PRINT_X))
    assert certify(direct, MD, e)


def test_zero_budgets_leave_near_value_calls_alone():
    res = optimize(M, call("f", lit(5)), 0, 0)
    assert res.table == M and res.expr == call("f", lit(5)) and not res.changed
    assert certify(res, M, call("f", lit(5)))


def _seq_unit_depth(e):
    n = 0
    while isinstance(e, Seq) and e.first == Val(UNIT):
        n, e = n + 1, e.second
    return n, e


def test_recursive_inline_is_bounded():
    m = mdef("m", [("x", IntTag)], call("m", Var("x")))
    table = MethodTable((m,))
    for limit in (0, 1, 2, 3):
        res = optimize(table, call("m", lit(1)), limit, 0)
        depth, rest = _seq_unit_depth(res.table.entries[0].body)
        assert depth == limit and rest == call("m", Var("x"))
        assert certify(res, table, call("m", lit(1)))


def test_tampered_results_rejected():
    e = call("f", lit(5))
    res = optimize(MD, e, 1, 1)
    added = res.table.entries[3]
    clash = MethodTable(res.table.entries[:3] + (MethodDef("f", added.params, added.body),))
    assert not certify(OptResult(clash, res.expr, res.phi), MD, e)
    wrong = MethodTable(res.table.entries[:3] + (MethodDef(added.name, added.params, Var("x")),))
    assert not certify(OptResult(wrong, res.expr, res.phi), MD, e)
    assert not certify(OptResult(res.table, res.expr, ()), MD, e)
    assert certify(OptResult(MD, e, ()), MD, e)


def test_fresh_names_avoid_program_names():
    res = optimize(MD, call("f", lit(5)), 1, 1, avoid={"%opt0"})
    assert res.fresh[0].name == "%opt1"


def test_phi_roundtrip():
    phi = (OptEntry((IntTag, TOP), "g", "%opt0"), OptEntry((), "k", "h"))
    assert parse_phi(format_phi(phi) + "\n; note\n") == phi


def test_var_callee_is_left_alone():
    body = prim("*", Var("x"), Call(Var("g"), (Var("x"),)))
    table = MethodTable((G1, G2, mdef("f", [("x", IntTag)], body)))
    res = optimize(table, call("f", lit(5)))
    assert res.table.entries[2].body == body


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 3), st.integers(0, 3))
def test_generated_workloads_certify_and_agree(i, inline_limit, spec_limit):
    p, skip = opt_case(13, i)
    fz = freeze(MachineState(MethodTable(), p), skip, 2000)
    if fz is None:
        return
    rep = optdiff_frozen(fz, inline_limit, spec_limit, 2000)
    assert rep.certified and rep.equal and rep.equal_rewritten


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2), st.integers(0, 2))
def test_budget_monotone(i, inline_limit, spec_limit):
    p, skip = opt_case(17, i)
    fz = freeze(MachineState(MethodTable(), p), skip, 2000)
    if fz is None:
        return
    for a, b in ((inline_limit, spec_limit), (inline_limit + 1, spec_limit),
                 (inline_limit, spec_limit + 1)):
        assert certify(optimize(fz.table, fz.body, a, b), fz.table, fz.body)


def test_named_programs_end_to_end():
    fz = freeze(MachineState(MethodTable(), parse_program(INLINE_CASE)))
    assert [md.name for md in fz.table] == ["g", "g", "f"]
    rep = optdiff_frozen(fz)
    # g(x) inside f, and the call f(5) itself
    assert rep.ok and rep.result.rewrites == {"inline": 2}
    assert rep.original.value == lit(50).value and rep.rewritten.value == lit(50).value

    fz = freeze(MachineState(MethodTable(), parse_program(DIRECT_CASE)))
    rep = optdiff_frozen(fz)
    assert rep.ok and rep.result.rewrites == {
        "specialize-new": 1, "inline": 1, "specialize-existing": 1}
    assert rep.original.output == rep.rewritten.output == "5\n"
