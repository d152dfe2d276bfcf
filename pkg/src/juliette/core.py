"""Values, tags, annotations, expressions, method tables and the primop kernel."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

# ---------------------------------------------------------------- values


@dataclass(frozen=True)
class UnitVal:
    def __repr__(self):
        return "UnitVal()"


@dataclass(frozen=True)
class IntVal:
    value: int


@dataclass(frozen=True, eq=False)
class FloatVal:
    value: float

    # bitwise identity so nan and -0.0 survive round-trips and replay checks
    def _bits(self):
        return struct.pack("<d", self.value)

    def __eq__(self, other):
        return isinstance(other, FloatVal) and self._bits() == other._bits()

    def __hash__(self):
        return hash(("FloatVal", self._bits()))


@dataclass(frozen=True)
class BoolVal:
    value: bool


@dataclass(frozen=True)
class StrVal:
    value: str


@dataclass(frozen=True)
class FnVal:
    name: str


Value = Union[UnitVal, IntVal, FloatVal, BoolVal, StrVal, FnVal]
VALUE_TYPES = (UnitVal, IntVal, FloatVal, BoolVal, StrVal, FnVal)
UNIT = UnitVal()

# ---------------------------------------------------------------- tags


@dataclass(frozen=True)
class ScalarTag:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class FnTag:
    name: str


Tag = Union[ScalarTag, FnTag]

UnitTag = ScalarTag("Nothing")
IntTag = ScalarTag("Int")
FloatTag = ScalarTag("Float")
BoolTag = ScalarTag("Bool")
StrTag = ScalarTag("String")
SCALAR_TAGS = (UnitTag, IntTag, FloatTag, BoolTag, StrTag)


@dataclass(frozen=True)
class TopType:
    def __repr__(self):
        return "Top"


TOP = TopType()
TypeAnn = Union[TopType, ScalarTag, FnTag]


def typeof(v: Value) -> Tag:
    if isinstance(v, UnitVal):
        return UnitTag
    if isinstance(v, FnVal):
        return FnTag(v.name)
    if isinstance(v, BoolVal):
        return BoolTag
    if isinstance(v, IntVal):
        return IntTag
    if isinstance(v, FloatVal):
        return FloatTag
    if isinstance(v, StrVal):
        return StrTag
    raise TypeError(f"not a value: {v!r}")


def subtype(t1: TypeAnn, t2: TypeAnn) -> bool:
    """Tags are final: the only proper supertype of anything is Top."""
    return isinstance(t2, TopType) or t1 == t2


def subtypes(ts1: Sequence[TypeAnn], ts2: Sequence[TypeAnn]) -> bool:
    return len(ts1) == len(ts2) and all(subtype(a, b) for a, b in zip(ts1, ts2))


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Val:
    value: Value


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Seq:
    first: "Expr"
    second: "Expr"


@dataclass(frozen=True)
class PrimCall:
    op: str
    args: tuple


@dataclass(frozen=True)
class Call:
    callee: "Expr"
    args: tuple


@dataclass(frozen=True)
class MethodDef:
    name: str
    params: tuple  # ((ident, TypeAnn), ...)
    body: "Expr"

    def __post_init__(self):
        names = [p for p, _ in self.params]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in method {self.name}")

    @property
    def param_names(self):
        return tuple(p for p, _ in self.params)

    @property
    def annotations(self):
        return tuple(t for _, t in self.params)


@dataclass(frozen=True)
class EvalGlobal:
    body: "Expr"


@dataclass(frozen=True)
class EvalTable:
    table: "MethodTable"
    body: "Expr"


Expr = Union[Val, Var, Seq, PrimCall, Call, MethodDef, EvalGlobal, EvalTable]


@dataclass(frozen=True)
class MethodTable:
    """Method definitions, oldest first. Extension returns a new table."""

    entries: tuple = ()

    def extend(self, md: MethodDef) -> "MethodTable":
        return MethodTable(self.entries + (md,))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def names(self) -> frozenset:
        return frozenset(md.name for md in self.entries)


EMPTY_TABLE = MethodTable()


def fn(name: str) -> Val:
    return Val(FnVal(name))


def lit(x) -> Val:
    """Python scalar -> literal expression; convenience for tests and fixtures."""
    if x is None:
        return Val(UNIT)
    if isinstance(x, bool):
        return Val(BoolVal(x))
    if isinstance(x, int):
        return Val(IntVal(x))
    if isinstance(x, float):
        return Val(FloatVal(x))
    if isinstance(x, str):
        return Val(StrVal(x))
    raise TypeError(x)


def call(name: str, *args) -> Call:
    return Call(fn(name), tuple(args))


def mdef(name: str, params, body: Expr) -> MethodDef:
    ps = []
    for p in params:
        if isinstance(p, str):
            ps.append((p, TOP))
        else:
            ps.append(tuple(p))
    return MethodDef(name, tuple(ps), body)


def prim(op: str, *args) -> PrimCall:
    return PrimCall(op, tuple(args))


def is_value(e: Expr) -> bool:
    return isinstance(e, Val)


def is_near_value(e: Expr) -> bool:
    return isinstance(e, (Val, Var))


# ---------------------------------------------------------------- primops

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


class PrimopError(Exception):
    pass


def wrap_int(n: int) -> int:
    return (n + 2**63) % 2**64 - 2**63


def render_value(v: Value) -> str:
    """Display form used by print (not the source form)."""
    if isinstance(v, UnitVal):
        return "nothing"
    if isinstance(v, BoolVal):
        return "true" if v.value else "false"
    if isinstance(v, IntVal):
        return str(v.value)
    if isinstance(v, FloatVal):
        return repr(v.value)
    if isinstance(v, StrVal):
        return v.value
    if isinstance(v, FnVal):
        return v.name
    raise TypeError(v)


def _int_div(a: int, b: int) -> int:
    if b == 0:
        raise PrimopError("DivideError: integer division by zero")
    if a == INT_MIN and b == -1:
        raise PrimopError("DivideError: integer overflow")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _float_div(a: float, b: float) -> float:
    if b == 0.0:
        raise PrimopError("DivideError: float division by zero")
    return a / b


ANY = None  # wildcard argument tag in a signature


@dataclass(frozen=True)
class PrimopSig:
    label: str
    arg_tags: tuple
    result: Tag
    fn: Callable = field(compare=False)

    @property
    def arity(self):
        return len(self.arg_tags)

    def matches(self, tags) -> bool:
        return len(tags) == self.arity and all(
            want is ANY or want == got for want, got in zip(self.arg_tags, tags)
        )


def _arith(label, int_op, float_op):
    return [
        PrimopSig(label, (IntTag, IntTag), IntTag,
                  lambda a, b: IntVal(wrap_int(int_op(a.value, b.value)))),
        PrimopSig(label, (FloatTag, FloatTag), FloatTag,
                  lambda a, b: FloatVal(float_op(a.value, b.value))),
    ]


def _eq_sig(tag):
    return PrimopSig("==", (tag, tag), BoolTag, lambda a, b: BoolVal(a.value == b.value))


SIGNATURES: tuple = tuple(
    _arith("+", lambda a, b: a + b, lambda a, b: a + b)
    + _arith("-", lambda a, b: a - b, lambda a, b: a - b)
    + _arith("*", lambda a, b: a * b, lambda a, b: a * b)
    + _arith("/", _int_div, _float_div)
    + [_eq_sig(t) for t in (IntTag, FloatTag, BoolTag, StrTag)]
    + [PrimopSig("print", (ANY,), UnitTag, lambda a: UNIT)]
)
PRIMOPS = frozenset(s.label for s in SIGNATURES)


def _lookup(label, tags) -> Optional[PrimopSig]:
    for sig in SIGNATURES:
        if sig.label == label and sig.matches(tags):
            return sig
    return None


def primop_return_type(label: str, tags: Sequence[Tag]) -> Optional[Tag]:
    sig = _lookup(label, tuple(tags))
    return sig.result if sig else None


def primop_apply(label: str, args: Sequence[Value], out: Optional[list] = None) -> Value:
    """Evaluate a primop. print appends to `out` when given. Raises PrimopError."""
    if label not in PRIMOPS:
        raise PrimopError(f"unknown primop {label}")
    tags = tuple(typeof(a) for a in args)
    sig = _lookup(label, tags)
    if sig is None:
        shown = ", ".join(repr(t) for t in tags)
        raise PrimopError(f"no primop {label}({shown})")
    try:
        result = sig.fn(*args)
    except (OverflowError, ZeroDivisionError) as exc:
        raise PrimopError(str(exc)) from exc
    if label == "print" and out is not None:
        out.append(render_value(args[0]) + "\n")
    return result
