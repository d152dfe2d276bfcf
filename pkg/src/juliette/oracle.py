"""Brute-force decomposition: enumerate every (context, subterm) split and filter.

Deliberately shares nothing with the evaluator's decomposition beyond the
frame vocabulary, so agreement between the two is meaningful.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import Call, EvalGlobal, EvalTable, FnVal, MethodDef, PrimCall, Seq, Val, Var
from .evaluator import (
    CallArg, CallCallee, CallUnderX, GlobalFrame, IsValue, PrimArg, RedexUnderC, SeqL,
    TableFrame, decompose, recompose, rdx_expr,
)

SIMPLE = (SeqL, PrimArg, CallCallee, CallArg)


def positions(e):
    """Every subterm with the frame path leading to it (None: not an evaluation position)."""
    out = []
    stack = [((), e)]
    while stack:
        path, sub = stack.pop()
        out.append((path, sub))
        for frame, child in _children(sub):
            ok = path is not None and frame is not None
            stack.append((path + (frame,) if ok else None, child))
    return out


def _children(e):
    """(frame or None, child) for every immediate child; None if not a context position."""
    if isinstance(e, Seq):
        return [(SeqL(e.second), e.first), (None, e.second)]
    if isinstance(e, PrimCall):
        res = []
        for i, a in enumerate(e.args):
            ok = all(isinstance(b, Val) for b in e.args[:i])
            frame = PrimArg(e.op, tuple(b.value for b in e.args[:i]), e.args[i + 1:]) if ok else None
            res.append((frame, a))
        return res
    if isinstance(e, Call):
        res = [(CallCallee(e.args), e.callee)]
        for i, a in enumerate(e.args):
            ok = isinstance(e.callee, Val) and all(isinstance(b, Val) for b in e.args[:i])
            frame = (CallArg(e.callee.value, tuple(b.value for b in e.args[:i]), e.args[i + 1:])
                     if ok else None)
            res.append((frame, a))
        return res
    if isinstance(e, MethodDef):
        return [(None, e.body)]
    if isinstance(e, EvalGlobal):
        return [(GlobalFrame(), e.body)]
    if isinstance(e, EvalTable):
        return [(TableFrame(e.table), e.body)] + [(None, md) for md in e.table.entries]
    return []


def is_fn_call(e) -> bool:
    return (isinstance(e, Call) and isinstance(e.callee, Val)
            and isinstance(e.callee.value, FnVal)
            and all(isinstance(a, Val) for a in e.args))


def simple_call_splits(e):
    return [(path, sub) for path, sub in positions(e)
            if path is not None and all(isinstance(f, SIMPLE) for f in path) and is_fn_call(sub)]


def is_rdx(e) -> bool:
    if isinstance(e, (Var, MethodDef)):
        return True
    if isinstance(e, Seq):
        return isinstance(e.first, Val)
    if isinstance(e, PrimCall):
        return all(isinstance(a, Val) for a in e.args)
    if isinstance(e, Call):
        return (isinstance(e.callee, Val) and not isinstance(e.callee.value, FnVal)
                and all(isinstance(a, Val) for a in e.args))
    if isinstance(e, (EvalGlobal, EvalTable)):
        return isinstance(e.body, Val) or bool(simple_call_splits(e.body))
    return False


def rdx_splits(e):
    return [(path, sub) for path, sub in positions(e) if path is not None and is_rdx(sub)]


@dataclass(frozen=True)
class Agreement:
    ok: bool
    reason: str = ""


def check(e) -> Agreement:
    """Compare decompose(e) against the enumerated splits."""
    cf = decompose(e)
    if recompose(cf) != e:
        return Agreement(False, "recomposition differs")
    if isinstance(e, Val):
        return Agreement(isinstance(cf, IsValue), "value not classified as value")
    splits = rdx_splits(e)
    if len(splits) > 1:
        return Agreement(False, f"{len(splits)} redex splits")
    if splits:
        path, sub = splits[0]
        if not isinstance(cf, RedexUnderC):
            return Agreement(False, "oracle found a redex, decompose did not")
        if cf.ctx != path or rdx_expr(cf.rdx) != sub:
            return Agreement(False, "different redex split")
        return Agreement(True)
    calls = simple_call_splits(e)
    if len(calls) != 1:
        return Agreement(False, f"no redex and {len(calls)} bare calls")
    path, sub = calls[0]
    if not isinstance(cf, CallUnderX) or cf.ctx != path:
        return Agreement(False, "bare call split differs")
    return Agreement(True)
