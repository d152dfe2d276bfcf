import random

import pytest
from hypothesis import given, settings, strategies as st

from juliette.core import (
    TOP, UNIT, BoolVal, Call, EvalGlobal, EvalTable, FloatVal, IntTag, IntVal,
    MethodTable, Seq, StrVal, Val, Var, call, fn, lit, mdef, prim,
)
from juliette.fuzz import FuzzConfig, Gen, check_roundtrip
from juliette.parser import (
    ParseError, parse_expr, parse_program, parse_table, print_expr, print_value,
)

LISTING = """
(evalg (seq (seq
  (mdef "r2" () (mcall r1)) # r2() = r1()
  (mdef "m"  () (seq
                  (evalg (mdef "r1" () 2)) # eval(:(r1() = 2))
                  (mcall r2))))            # r2()
  (mcall m))) # m()
"""


def test_redex_listing():
    p = parse_program(LISTING)
    r2 = mdef("r2", [], Call(Var("r1"), ()))
    m = mdef("m", [], Seq(EvalGlobal(mdef("r1", [], lit(2))), Call(Var("r2"), ())))
    assert p == EvalGlobal(Seq(Seq(r2, m), Call(Var("m"), ())))


def test_litmus_d_shape():
    text = '(evalg (seq (mdef "m" () (seq (evalg (mdef "r1" () 2)) (mcall r2))) (mcall m)))'
    p = parse_program(text)
    assert isinstance(p, EvalGlobal) and isinstance(p.body, Seq)
    assert p.body.first.name == "m"
    assert p.body.first.body.first == EvalGlobal(mdef("r1", [], lit(2)))


def test_smallest_program():
    assert parse_program("(evalg 5)") == EvalGlobal(Val(IntVal(5)))
    assert print_expr(EvalGlobal(Val(IntVal(5)))) == "(evalg 5)"


def test_literals():
    assert parse_expr("unit") == Val(UNIT)
    assert parse_expr("true") == Val(BoolVal(True))
    assert parse_expr("-3") == Val(IntVal(-3))
    assert parse_expr("2.0") == Val(FloatVal(2.0))
    assert parse_expr('"a\\"b"') == Val(StrVal('a"b'))
    assert parse_expr("(mval g)") == fn("g")
    assert print_expr(fn("g")) == "(mval g)"
    assert parse_expr("x") == Var("x")


def test_params_and_types():
    md = parse_expr('(mdef "f" ((x Int) (y) (z Any) (w (Fn g))) x)')
    assert md.params[0] == ("x", IntTag)
    assert md.params[1][1] == TOP and md.params[2][1] == TOP


def test_evalt_preserves_table_order():
    text = '(evalt ((mdef "g" () 2) (mdef "f" ((x)) x) (mdef "g" () 42)) (mcall f 1))'
    e = parse_expr(text)
    assert isinstance(e, EvalTable)
    assert [md.name for md in e.table.entries] == ["g", "f", "g"]
    assert e.table.entries[2].body == lit(42)
    assert parse_expr(print_expr(e)) == e


def test_parse_table():
    t = parse_table('((mdef "g" () 2))')
    assert t == MethodTable((mdef("g", [], lit(2)),))


@pytest.mark.parametrize("text", [
    "(evalg (mcall f 1)",
    "(evalg 1))",
    "(frob 1)",
    '(mdef "f" ((x) (x)) x)',
    '(mdef f () x)',
    "(seq 1)",
    '"open',
    "(mval)",
    "",
])
def test_errors_carry_span(text):
    with pytest.raises(ParseError) as info:
        parse_expr(text)
    span = info.value.span
    assert 0 <= span.begin <= span.end <= max(len(text), 1)


def test_program_root_must_be_evalg():
    with pytest.raises(ParseError):
        parse_program("5")


def test_comments_ignored():
    assert parse_expr("; lead\n(pcall + 1 ; mid\n 2)") == prim("+", lit(1), lit(2))


def test_special_floats_and_strings_roundtrip():
    for v in (FloatVal(-0.0), FloatVal(float("inf")), FloatVal(float("-inf")),
              FloatVal(1e-300), StrVal("tab\tnl\n\\ \"q\" ü")):
        e = Val(v)
        assert parse_expr(print_expr(e)) == e, print_value(v)
    nan = parse_expr(print_expr(Val(FloatVal(float("nan")))))
    assert nan.value.value != nan.value.value


def test_internal_names_roundtrip():
    e = EvalTable(MethodTable((mdef("%opt0", [("x", IntTag)], Var("x")),)), call("%opt0", lit(1)))
    assert parse_expr(print_expr(e)) == e


@settings(max_examples=300)
@given(st.integers(0, 10**9))
def test_roundtrip_generated(seed):
    g = Gen(random.Random(seed), FuzzConfig())
    e = g.ast(4)
    assert check_roundtrip(e) is None


@given(st.integers(-2**63, 2**63 - 1))
def test_int_literal_roundtrip(n):
    assert parse_expr(print_expr(Val(IntVal(n)))) == Val(IntVal(n))


@given(st.floats())
def test_float_literal_roundtrip(x):
    back = parse_expr(print_expr(Val(FloatVal(x)))).value.value
    assert back == x or (x != x and back != back)


@given(st.text())
def test_string_literal_roundtrip(s):
    assert parse_expr(print_expr(Val(StrVal(s)))) == Val(StrVal(s))
