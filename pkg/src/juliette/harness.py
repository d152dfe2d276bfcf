"""Differential driver: freeze a running program at a local table, optimize, compare."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import EvalTable, MethodTable, Val
from .evaluator import (
    DEFAULT_FUEL, MachineState, RedexUnderC, Stepped, TableCall, TableFrame, TableVal,
    call_expr, plug, rdx_expr, run_state, step,
)
from .optimizer import OptResult, certify, optimize, referenced_names, table_names


@dataclass(frozen=True)
class Frozen:
    """A state ⟨Mg, C[evalt M e]⟩ split at the outermost active local table."""

    state: MachineState
    ctx: tuple
    table: MethodTable
    body: object

    def rebuild(self, table: MethodTable, body) -> MachineState:
        return MachineState(self.state.table, plug(self.ctx, EvalTable(table, body)),
                            self.state.output)


def split_at_table(s: MachineState) -> Optional[Frozen]:
    cf = s.canonical()
    if not isinstance(cf, RedexUnderC):
        return None
    frames = cf.ctx
    for k, frame in enumerate(frames):
        if isinstance(frame, TableFrame):
            return Frozen(s, frames[:k], frame.table, plug(frames[k + 1:], rdx_expr(cf.rdx)))
    if isinstance(cf.rdx, TableVal):
        # the redex itself is the outermost evalt
        return Frozen(s, frames, cf.rdx.table, Val(cf.rdx.value))
    if isinstance(cf.rdx, TableCall):
        return Frozen(s, frames, cf.rdx.table,
                      plug(cf.rdx.ctx, call_expr(cf.rdx.name, cf.rdx.args)))
    return None


def freeze(s: MachineState, skip: int = 0, fuel: int = DEFAULT_FUEL) -> Optional[Frozen]:
    """Step until a local table is active; `skip` later such states are passed over."""
    for _ in range(fuel):
        fz = split_at_table(s)
        if fz is not None:
            if skip <= 0:
                return fz
            skip -= 1
        r = step(s)
        if not isinstance(r, Stepped):
            return None
        s = r.state
    return None


@dataclass
class OptDiffReport:
    certified: bool
    equal: bool  # original vs optimized table, same expression
    equal_rewritten: bool  # original vs optimized table and optimized expression
    original: object
    optimized: object
    rewritten: object
    result: OptResult
    frozen: Frozen
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.certified and self.equal and self.equal_rewritten


def program_names(s: MachineState) -> set:
    return referenced_names(s.program) | table_names(s.table)


def optdiff_frozen(fz: Frozen, inline_limit: int = 1, spec_limit: int = 1,
                   fuel: int = DEFAULT_FUEL) -> OptDiffReport:
    res = optimize(fz.table, fz.body, inline_limit, spec_limit, avoid=program_names(fz.state))
    ok = certify(res, fz.table, fz.body)
    a = run_state(fz.state, fuel)
    b = run_state(fz.rebuild(res.table, fz.body), fuel)
    c = run_state(fz.rebuild(res.table, res.expr), fuel)
    notes = []
    if a.steps != b.steps or a.steps != c.steps:
        notes.append(f"step counts differ: {a.steps} {b.steps} {c.steps}")
    return OptDiffReport(ok, a.summary() == b.summary(), a.summary() == c.summary(),
                         a, b, c, res, fz, notes)


def optdiff_state(s: MachineState, inline_limit: int = 1, spec_limit: int = 1,
                  fuel: int = DEFAULT_FUEL, skip: int = 0) -> Optional[OptDiffReport]:
    fz = freeze(s, skip, fuel)
    if fz is None:
        return None
    return optdiff_frozen(fz, inline_limit, spec_limit, fuel)
