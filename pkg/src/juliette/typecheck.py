"""Concrete typing: which tag an expression must have if it produces a value."""
from __future__ import annotations

from typing import Mapping, Optional

from .core import (
    Call, EvalGlobal, EvalTable, FnTag, MethodDef, PrimCall, ScalarTag, Seq, Val, Var,
    primop_return_type, typeof,
)

# Γ: a plain mapping; build it with dict(...) so later bindings win.
TypeEnv = Mapping

EMPTY_ENV: Mapping = {}


def env_of(params) -> dict:
    """Γ for a method body: x̄:τ̄ in parameter order."""
    return {x: t for x, t in params}


def concrete_type(env: Mapping, e) -> Optional[object]:
    """The tag σ with Γ ⊢ e : σ, or None. Iterative on the Seq/eval spine."""
    while True:
        if isinstance(e, Val):
            return typeof(e.value)
        if isinstance(e, Var):
            t = env.get(e.name)
            return t if isinstance(t, (ScalarTag, FnTag)) else None
        if isinstance(e, MethodDef):
            return FnTag(e.name)
        if isinstance(e, Seq):
            e = e.second
            continue
        if isinstance(e, (EvalGlobal, EvalTable)):
            e = e.body
            continue
        if isinstance(e, PrimCall):
            tags = []
            for a in e.args:
                t = concrete_type(env, a)
                if t is None:
                    return None
                tags.append(t)
            return primop_return_type(e.op, tags)
        if isinstance(e, Call):
            return None
        raise TypeError(e)
