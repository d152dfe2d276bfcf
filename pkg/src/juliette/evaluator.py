"""Small-step abstract machine over canonical decompositions.

An expression is split into a world context (a tuple of frames, outermost first)
and a redex base; exactly one rule is then selected from the redex base alone.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .core import (
    EMPTY_TABLE, Call, EvalGlobal, EvalTable, FnVal, MethodDef, MethodTable, PrimCall,
    PrimopError, Seq, VALUE_TYPES, Val, Var, primop_apply, typeof,
)
from .dispatch import DispatchError, DispatchErrorKind, getmd, table_defines

DEFAULT_FUEL = 100_000

# ---------------------------------------------------------------- contexts


@dataclass(frozen=True)
class SeqL:
    second: object


@dataclass(frozen=True)
class PrimArg:
    op: str
    done: tuple  # values already computed
    rest: tuple  # expressions still to evaluate


@dataclass(frozen=True)
class CallCallee:
    args: tuple


@dataclass(frozen=True)
class CallArg:
    callee: object  # a Value
    done: tuple
    rest: tuple


@dataclass(frozen=True)
class GlobalFrame:
    pass


@dataclass(frozen=True)
class TableFrame:
    table: MethodTable


SIMPLE_FRAMES = (SeqL, PrimArg, CallCallee, CallArg)
WORLD_FRAMES = (GlobalFrame, TableFrame)
HOLE = ()


def is_simple_ctx(ctx: tuple) -> bool:
    return all(isinstance(f, SIMPLE_FRAMES) for f in ctx)


def plug_frame(frame, e):
    if isinstance(frame, SeqL):
        return Seq(e, frame.second)
    if isinstance(frame, PrimArg):
        return PrimCall(frame.op, tuple(Val(v) for v in frame.done) + (e,) + frame.rest)
    if isinstance(frame, CallCallee):
        return Call(e, frame.args)
    if isinstance(frame, CallArg):
        return Call(Val(frame.callee),
                    tuple(Val(v) for v in frame.done) + (e,) + frame.rest)
    if isinstance(frame, GlobalFrame):
        return EvalGlobal(e)
    if isinstance(frame, TableFrame):
        return EvalTable(frame.table, e)
    raise TypeError(frame)


def plug(ctx: tuple, e):
    for frame in reversed(ctx):
        e = plug_frame(frame, e)
    return e


# ---------------------------------------------------------------- redex bases


@dataclass(frozen=True)
class VarRdx:
    name: str


@dataclass(frozen=True)
class SeqRdx:
    value: object
    rest: object


@dataclass(frozen=True)
class PrimRdx:
    op: str
    args: tuple


@dataclass(frozen=True)
class NonFnCallRdx:
    callee: object
    args: tuple


@dataclass(frozen=True)
class MDefRdx:
    md: MethodDef


@dataclass(frozen=True)
class GlobalVal:
    value: object


@dataclass(frozen=True)
class TableVal:
    table: MethodTable
    value: object


@dataclass(frozen=True)
class GlobalCall:
    ctx: tuple  # simple context between evalg and the call
    name: str
    args: tuple


@dataclass(frozen=True)
class TableCall:
    table: MethodTable
    ctx: tuple
    name: str
    args: tuple


RedexBase = Union[VarRdx, SeqRdx, PrimRdx, NonFnCallRdx, MDefRdx, GlobalVal, TableVal,
                  GlobalCall, TableCall]


def call_expr(name: str, args: tuple) -> Call:
    return Call(Val(FnVal(name)), tuple(Val(v) for v in args))


def rdx_expr(rdx: RedexBase):
    """Rebuild the expression a redex base stands for."""
    if isinstance(rdx, VarRdx):
        return Var(rdx.name)
    if isinstance(rdx, SeqRdx):
        return Seq(Val(rdx.value), rdx.rest)
    if isinstance(rdx, PrimRdx):
        return PrimCall(rdx.op, tuple(Val(v) for v in rdx.args))
    if isinstance(rdx, NonFnCallRdx):
        return Call(Val(rdx.callee), tuple(Val(v) for v in rdx.args))
    if isinstance(rdx, MDefRdx):
        return rdx.md
    if isinstance(rdx, GlobalVal):
        return EvalGlobal(Val(rdx.value))
    if isinstance(rdx, TableVal):
        return EvalTable(rdx.table, Val(rdx.value))
    if isinstance(rdx, GlobalCall):
        return EvalGlobal(plug(rdx.ctx, call_expr(rdx.name, rdx.args)))
    if isinstance(rdx, TableCall):
        return EvalTable(rdx.table, plug(rdx.ctx, call_expr(rdx.name, rdx.args)))
    raise TypeError(rdx)


# ---------------------------------------------------------------- canonical forms


@dataclass(frozen=True)
class IsValue:
    value: object


@dataclass(frozen=True)
class CallUnderX:
    ctx: tuple
    name: str
    args: tuple


@dataclass(frozen=True)
class RedexUnderC:
    ctx: tuple
    rdx: RedexBase


CanonicalForm = Union[IsValue, CallUnderX, RedexUnderC]


def first_non_value(es) -> int:
    for i, a in enumerate(es):
        if not isinstance(a, Val):
            return i
    return -1


def decompose(e) -> CanonicalForm:
    """Unique canonical form of `e`; iterative so deep run-time states are fine."""
    if isinstance(e, Val):
        return IsValue(e.value)
    frames: list = []
    while True:
        if isinstance(e, Var):
            return RedexUnderC(tuple(frames), VarRdx(e.name))
        if isinstance(e, MethodDef):
            return RedexUnderC(tuple(frames), MDefRdx(e))
        if isinstance(e, Seq):
            if isinstance(e.first, Val):
                return RedexUnderC(tuple(frames), SeqRdx(e.first.value, e.second))
            frames.append(SeqL(e.second))
            e = e.first
            continue
        if isinstance(e, PrimCall):
            i = first_non_value(e.args)
            if i < 0:
                return RedexUnderC(tuple(frames), PrimRdx(e.op, tuple(a.value for a in e.args)))
            frames.append(PrimArg(e.op, tuple(a.value for a in e.args[:i]), e.args[i + 1:]))
            e = e.args[i]
            continue
        if isinstance(e, Call):
            if not isinstance(e.callee, Val):
                frames.append(CallCallee(e.args))
                e = e.callee
                continue
            i = first_non_value(e.args)
            if i >= 0:
                frames.append(CallArg(e.callee.value, tuple(a.value for a in e.args[:i]),
                                      e.args[i + 1:]))
                e = e.args[i]
                continue
            vals = tuple(a.value for a in e.args)
            if not isinstance(e.callee.value, FnVal):
                return RedexUnderC(tuple(frames), NonFnCallRdx(e.callee.value, vals))
            return _close_call(frames, e.callee.value.name, vals)
        if isinstance(e, EvalGlobal):
            if isinstance(e.body, Val):
                return RedexUnderC(tuple(frames), GlobalVal(e.body.value))
            frames.append(GlobalFrame())
            e = e.body
            continue
        if isinstance(e, EvalTable):
            if isinstance(e.body, Val):
                return RedexUnderC(tuple(frames), TableVal(e.table, e.body.value))
            frames.append(TableFrame(e.table))
            e = e.body
            continue
        raise TypeError(f"not an expression: {e!r}")


def _refocus(ctx: tuple, e) -> CanonicalForm:
    """decompose(plug(ctx, e)), given that ctx is a valid context path.

    Frames above a non-value never change their choice of hole, so only the
    focus (or, for a value, the frame it lands in) needs walking.
    """
    if isinstance(e, Val):
        if not ctx:
            return IsValue(e.value)
        ctx, e = ctx[:-1], plug_frame(ctx[-1], e)
    sub = decompose(e)
    if isinstance(sub, RedexUnderC):
        return RedexUnderC(ctx + sub.ctx, sub.rdx)
    return _close_call(ctx + sub.ctx, sub.name, sub.args)


def _close_call(frames, name: str, vals: tuple) -> CanonicalForm:
    """A call m(v...) found under `frames`: the innermost world frame owns it."""
    for k in range(len(frames) - 1, -1, -1):
        frame = frames[k]
        if isinstance(frame, WORLD_FRAMES):
            outer, inner = tuple(frames[:k]), tuple(frames[k + 1:])
            if isinstance(frame, GlobalFrame):
                return RedexUnderC(outer, GlobalCall(inner, name, vals))
            return RedexUnderC(outer, TableCall(frame.table, inner, name, vals))
    return CallUnderX(tuple(frames), name, vals)


def recompose(cf: CanonicalForm):
    if isinstance(cf, IsValue):
        return Val(cf.value)
    if isinstance(cf, CallUnderX):
        return plug(cf.ctx, call_expr(cf.name, cf.args))
    return plug(cf.ctx, rdx_expr(cf.rdx))


# ---------------------------------------------------------------- substitution


def substitute(body, params, args):
    """Simultaneous replacement of free `params` by `args` (values or expressions).

    Method-definition parameters shadow. Tables inside evalt are closed and left alone.
    """
    mapping = {x: Val(a) if isinstance(a, VALUE_TYPES) else a
               for x, a in zip(params, args, strict=True)}
    return subst_map(body, mapping)


def subst_map(e, mapping: dict):
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Val):
        return e
    if isinstance(e, Seq):
        return Seq(subst_map(e.first, mapping), subst_map(e.second, mapping))
    if isinstance(e, PrimCall):
        return PrimCall(e.op, tuple(subst_map(a, mapping) for a in e.args))
    if isinstance(e, Call):
        return Call(subst_map(e.callee, mapping), tuple(subst_map(a, mapping) for a in e.args))
    if isinstance(e, MethodDef):
        inner = {k: v for k, v in mapping.items() if k not in e.param_names}
        return MethodDef(e.name, e.params, subst_map(e.body, inner))
    if isinstance(e, EvalGlobal):
        return EvalGlobal(subst_map(e.body, mapping))
    if isinstance(e, EvalTable):
        return EvalTable(e.table, subst_map(e.body, mapping))
    raise TypeError(e)


# ---------------------------------------------------------------- machine


class ErrKind(Enum):
    UNDEF_VAR = "UndefVar"
    PRIMOP = "PrimopError"
    CALLEE_NOT_FUNCTION = "CalleeNotFunction"
    NO_METHOD = "NoMethod"
    AMBIGUOUS = "Ambiguous"


_DISPATCH_KIND = {
    DispatchErrorKind.NO_METHOD: ErrKind.NO_METHOD,
    DispatchErrorKind.AMBIGUOUS: ErrKind.AMBIGUOUS,
}


class MachineState:
    """⟨M, e⟩ plus the run's output stream.

    States built by `step` hold the program as (context, focus) and plug it only
    when someone asks for it; the decomposition is resumed from the context, so a
    step deep inside a large term does not rewalk the whole term. Equality and
    hashing are on (table, program, output), as for a plain record.
    """

    __slots__ = ("table", "output", "_program", "_zip", "_cf")

    def __init__(self, table: MethodTable, program, output: tuple = ()):
        self.table = table
        self.output = output
        self._program = program
        self._zip = None
        self._cf = None

    @classmethod
    def _focused(cls, table, ctx: tuple, focus, output) -> "MachineState":
        s = cls.__new__(cls)
        s.table, s.output = table, output
        s._program, s._zip, s._cf = None, (ctx, focus), None
        return s

    @property
    def program(self):
        if self._program is None:
            self._program = plug(*self._zip)
        return self._program

    def canonical(self) -> "CanonicalForm":
        if self._cf is None:
            self._cf = _refocus(*self._zip) if self._zip else decompose(self._program)
        return self._cf

    @property
    def output_text(self) -> str:
        return "".join(self.output)

    def _key(self):
        return (self.table, self.program, self.output)

    def __eq__(self, other):
        if not isinstance(other, MachineState):
            return NotImplemented
        return self is other or self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"MachineState(table={self.table!r}, program={self.program!r}, output={self.output!r})"


@dataclass(frozen=True)
class Stepped:
    state: MachineState
    rule: str


@dataclass(frozen=True)
class Finished:
    value: object


@dataclass(frozen=True)
class Errored:
    kind: ErrKind
    detail: str

    def __eq__(self, other):
        # diagnostics are informational; outcomes compare by kind
        return isinstance(other, Errored) and self.kind == other.kind

    def __hash__(self):
        return hash(self.kind)


StepResult = Union[Stepped, Finished, Errored]


class StuckState(Exception):
    """Raised only for states outside the calculus (a bare call with no table)."""


def _detail(rdx) -> str:
    from .parser import print_expr
    return print_expr(rdx_expr(rdx))


def step(s: MachineState) -> StepResult:
    cf = s.canonical()
    if isinstance(cf, IsValue):
        return Finished(cf.value)
    if isinstance(cf, CallUnderX):
        raise StuckState("call outside of any evaluation table")
    ctx, rdx = cf.ctx, cf.rdx
    table, out = s.table, s.output

    def to(e, rule, table=table, out=out, below=()):
        # `below`: frames between ctx and e, kept unplugged for the next decomposition
        return Stepped(MachineState._focused(table, ctx + below, e, out), rule)

    if isinstance(rdx, SeqRdx):
        return to(rdx.rest, "Seq")
    if isinstance(rdx, VarRdx):
        if table_defines(table, rdx.name):
            return to(Val(FnVal(rdx.name)), "VarMethod")
        return Errored(ErrKind.UNDEF_VAR, _detail(rdx))
    if isinstance(rdx, PrimRdx):
        emitted: list = []
        try:
            v = primop_apply(rdx.op, rdx.args, emitted)
        except PrimopError as exc:
            return Errored(ErrKind.PRIMOP, f"{_detail(rdx)}: {exc}")
        return to(Val(v), "Primop", out=out + tuple(emitted))
    if isinstance(rdx, NonFnCallRdx):
        return Errored(ErrKind.CALLEE_NOT_FUNCTION, _detail(rdx))
    if isinstance(rdx, MDefRdx):
        return to(Val(FnVal(rdx.md.name)), "MD", table=table.extend(rdx.md))
    if isinstance(rdx, GlobalVal):
        return to(Val(rdx.value), "ValGlobal")
    if isinstance(rdx, TableVal):
        return to(Val(rdx.value), "ValLocal")
    if isinstance(rdx, GlobalCall):
        # the snapshot is the (immutable) current global table itself
        frozen = EvalTable(table, call_expr(rdx.name, rdx.args))
        return to(frozen, "CallGlobal", below=(GlobalFrame(),) + rdx.ctx)
    if isinstance(rdx, TableCall):
        tags = tuple(typeof(v) for v in rdx.args)
        try:
            md = getmd(rdx.table, rdx.name, tags)
        except DispatchError as exc:
            return Errored(_DISPATCH_KIND[exc.kind], f"{_detail(rdx)}: {exc}")
        body = substitute(md.body, md.param_names, rdx.args)
        return to(body, "CallLocal", below=(TableFrame(rdx.table),) + rdx.ctx)
    raise TypeError(rdx)


# ---------------------------------------------------------------- runs


@dataclass(frozen=True)
class Outcome:
    status: str  # "value" | "error" | "fuel"
    state: MachineState
    steps: int
    value: object = None
    error: Optional[Errored] = None

    @property
    def table(self) -> MethodTable:
        return self.state.table

    @property
    def output(self) -> str:
        return self.state.output_text

    def summary(self):
        """Comparable digest: status, value or error kind, output, final table."""
        result = self.value if self.status == "value" else (
            self.error.kind if self.status == "error" else None)
        return (self.status, result, self.output, self.table)

    def render(self) -> str:
        from .parser import print_value
        if self.status == "value":
            return f"=> {print_value(self.value)}"
        if self.status == "error":
            return f"error: {self.error.kind.value}"
        return f"fuel exhausted after {self.steps} steps"


def run_state(s: MachineState, fuel: int = DEFAULT_FUEL, on_state=None) -> Outcome:
    steps = 0
    if on_state:
        on_state(s)
    while True:
        r = step(s)
        if isinstance(r, Finished):
            return Outcome("value", s, steps, value=r.value)
        if isinstance(r, Errored):
            return Outcome("error", s, steps, error=r)
        if steps >= fuel:
            return Outcome("fuel", s, steps)
        steps += 1
        s = r.state
        if on_state:
            on_state(s)


def initial_state(p, table: MethodTable = EMPTY_TABLE) -> MachineState:
    if not isinstance(p, EvalGlobal):
        raise ValueError("a program must have an evalg root")
    return MachineState(table, p, ())


def run(p, fuel: int = DEFAULT_FUEL, table: MethodTable = EMPTY_TABLE) -> Outcome:
    return run_state(initial_state(p, table), fuel)


def trace(p, fuel: int = DEFAULT_FUEL, table: MethodTable = EMPTY_TABLE):
    """Every state visited, initial state included, plus the outcome."""
    states: list = []
    outcome = run_state(initial_state(p, table), fuel, on_state=states.append)
    return states, outcome


def render_state(i: int, s: MachineState) -> str:
    from .parser import print_expr
    return f"{i}: {len(s.table)} ⊢ {print_expr(s.program)}"


def render_trace(states) -> list:
    return [render_state(i, s) for i, s in enumerate(states)]
