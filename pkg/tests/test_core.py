import itertools

import pytest
from hypothesis import given, strategies as st

from juliette.core import (
    INT_MAX, INT_MIN, SIGNATURES, TOP, UNIT, BoolTag, BoolVal, FloatTag, FloatVal, FnTag,
    FnVal, IntTag, IntVal, MethodDef, MethodTable, lit, PrimopError, StrTag, StrVal, UnitTag,
    mdef, primop_apply, primop_return_type, subtype, typeof, wrap_int,
)

SMALL = [UNIT, IntVal(0), IntVal(1), IntVal(-3), IntVal(INT_MAX), IntVal(INT_MIN),
         FloatVal(0.0), FloatVal(-2.5), FloatVal(1e308), BoolVal(True), BoolVal(False),
         StrVal(""), StrVal("hi"), FnVal("g")]
ANNS = [TOP, UnitTag, IntTag, FloatTag, BoolTag, StrTag, FnTag("g"), FnTag("h")]


def test_typeof():
    assert typeof(UNIT) == UnitTag
    assert typeof(FnVal("g")) == FnTag("g")
    assert typeof(IntVal(42)) == IntTag
    assert typeof(FloatVal(1.0)) == FloatTag
    assert typeof(StrVal("s")) == StrTag
    assert typeof(BoolVal(True)) == BoolTag


def test_subtype_examples():
    assert subtype(IntTag, TOP)
    assert subtype(IntTag, IntTag)
    assert not subtype(IntTag, BoolTag)
    assert not subtype(TOP, IntTag)
    assert not subtype(FnTag("g"), FnTag("h"))


def test_subtype_is_partial_order():
    for a in ANNS:
        assert subtype(a, a)
    for a, b in itertools.product(ANNS, repeat=2):
        if subtype(a, b) and subtype(b, a):
            assert a == b
    for a, b, c in itertools.product(ANNS, repeat=3):
        if subtype(a, b) and subtype(b, c):
            assert subtype(a, c)


def test_tags_are_incomparable():
    tags = [t for t in ANNS if t != TOP]
    for a, b in itertools.product(tags, repeat=2):
        assert subtype(a, b) == (a == b)


def test_primop_examples():
    assert primop_apply("*", [IntVal(42), IntVal(2)]) == IntVal(84)
    assert primop_apply("+", [IntVal(0), IntVal(7)]) == IntVal(7)
    with pytest.raises(PrimopError):
        primop_apply("/", [IntVal(1), IntVal(0)])
    with pytest.raises(PrimopError):
        primop_apply("+", [IntVal(1), FloatVal(1.0)])
    with pytest.raises(PrimopError):
        primop_apply("+", [IntVal(1)])
    with pytest.raises(PrimopError):
        primop_apply("frob", [])


def test_primop_return_type():
    assert primop_return_type("*", [IntTag, IntTag]) == IntTag
    assert primop_return_type("*", [IntTag, BoolTag]) is None
    assert primop_return_type("print", [StrTag]) == UnitTag
    assert primop_return_type("==", [StrTag, StrTag]) == BoolTag


def test_print_appends_to_stream():
    out = []
    assert primop_apply("print", [StrVal("a")], out) == UNIT
    primop_apply("print", [IntVal(3)], out)
    assert out == ["a\n", "3\n"]


def test_signatures_agree_exhaustively():
    # every admitted small-value combination returns the declared tag
    checked = 0
    for sig in SIGNATURES:
        for args in itertools.product(SMALL, repeat=sig.arity):
            tags = [typeof(a) for a in args]
            want = primop_return_type(sig.label, tags)
            try:
                v = primop_apply(sig.label, list(args))
            except PrimopError:
                continue
            assert want is not None and typeof(v) == want
            checked += 1
    assert checked > 200


def test_int_division_truncates_and_traps_overflow():
    assert primop_apply("/", [IntVal(-7), IntVal(2)]) == IntVal(-3)
    assert primop_apply("/", [IntVal(7), IntVal(-2)]) == IntVal(-3)
    with pytest.raises(PrimopError):
        primop_apply("/", [IntVal(INT_MIN), IntVal(-1)])
    with pytest.raises(PrimopError):
        primop_apply("/", [FloatVal(1.0), FloatVal(0.0)])


@given(st.integers(INT_MIN, INT_MAX), st.integers(INT_MIN, INT_MAX))
def test_int_arith_wraps_like_twos_complement(a, b):
    for op, f in (("+", a + b), ("-", a - b), ("*", a * b)):
        r = primop_apply(op, [IntVal(a), IntVal(b)]).value
        assert INT_MIN <= r <= INT_MAX
        assert (r - f) % (2**64) == 0


@given(st.integers())
def test_wrap_int_fixes_range(n):
    assert wrap_int(wrap_int(n)) == wrap_int(n)
    assert (wrap_int(n) - n) % 2**64 == 0


def test_table_is_persistent():
    m0 = MethodTable()
    m1 = m0.extend(mdef("f", ["x"], lit(1)))
    m2 = m1.extend(mdef("g", [], lit(2)))
    assert len(m0) == 0 and len(m1) == 1 and len(m2) == 2
    assert m2.entries[:1] == m1.entries


def test_duplicate_params_rejected():
    with pytest.raises(ValueError):
        MethodDef("f", (("x", TOP), ("x", IntTag)), UNIT)
