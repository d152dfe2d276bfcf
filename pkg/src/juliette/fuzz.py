"""Seeded program generators, per-program property checks, and shrinking."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import (
    INT_MAX, INT_MIN, TOP, UNIT, BoolTag, BoolVal, Call, EvalGlobal, EvalTable, FloatTag,
    FloatVal, FnTag, FnVal, IntTag, IntVal, MethodDef, MethodTable, PrimCall, Seq, StrTag,
    StrVal, UnitTag, Val, Var, fn, typeof,
)
from .evaluator import (
    CallUnderX, Errored, Finished, Stepped, StuckState,
    initial_state, render_state, step,
)
from .parser import parse_expr, print_expr
from .typecheck import concrete_type


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 1
    cases: int = 1000
    max_depth: int = 4
    max_table: int = 4
    dangling_rate: float = 0.05
    fuel: int = 500
    decompose_every: int = 1  # oracle-check every n-th program (0: never)
    values: tuple = ()  # literal alphabet; empty means the built-in mix
    primops: tuple = ("+", "-", "*", "/", "==", "print")


# ---------------------------------------------------------------- generators

NAMES = ("f", "g", "h", "k")
PARAMS = ("x", "y", "z")
ANNOTATIONS = (TOP, TOP, IntTag, IntTag, BoolTag, FloatTag, StrTag)
ARITH = ("+", "-", "*", "/")


class Gen:
    """Well-scoped random programs: calls go to earlier names, plus a few dangling ones."""

    def __init__(self, rng: random.Random, cfg: FuzzConfig = FuzzConfig()):
        self.rng = rng
        self.cfg = cfg

    def literal(self) -> Val:
        r = self.rng
        if self.cfg.values:
            return Val(r.choice(self.cfg.values))
        kind = r.randrange(10)
        if kind < 5:
            return Val(IntVal(r.choice((0, 1, 2, 3, 5, -1, 7, 42))))
        if kind == 5:
            return Val(BoolVal(r.random() < 0.5))
        if kind == 6:
            return Val(FloatVal(r.choice((0.5, 2.0, -1.5, 0.0))))
        if kind == 7:
            return Val(StrVal(r.choice(("a", "hi", ""))))
        if kind == 8:
            return Val(UNIT)
        return Val(IntVal(r.choice((INT_MAX, INT_MIN, 10**6))))

    def dangling(self) -> str:
        return self.rng.choice(("nope", "q"))

    def fname(self, known) -> str:
        if not known or self.rng.random() < self.cfg.dangling_rate:
            return self.dangling()
        return self.rng.choice(known)

    def leaf(self, scope, known):
        r = self.rng.random()
        if scope and r < 0.35:
            return Var(self.rng.choice(scope))
        if r < 0.45:
            return fn(self.fname(known))
        if r < 0.5:
            return Var(self.fname(known))
        return self.literal()

    def expr(self, depth: int, scope=(), known=()):
        rng = self.rng
        if depth <= 0 or rng.random() < 0.25:
            return self.leaf(scope, known)
        d = depth - 1
        kind = rng.choices(("seq", "prim", "call", "mdef", "evalg", "evalt"),
                           (3, 4, 5, 1, 1, 1))[0]
        if kind == "seq":
            return Seq(self.expr(d, scope, known), self.expr(d, scope, known))
        if kind == "prim":
            ops = self.cfg.primops
            binary = [op for op in ops if op != "print"]
            if "print" in ops and (rng.random() < 0.2 or not binary):
                return PrimCall("print", (self.expr(d, scope, known),))
            if not binary:
                return self.leaf(scope, known)
            op = rng.choice(binary)
            n = 2 if rng.random() < 0.95 else rng.choice((1, 3))
            return PrimCall(op, tuple(self.expr(d, scope, known) for _ in range(n)))
        if kind == "call":
            r = rng.random()
            callee = (fn(self.fname(known)) if r < 0.7 else Var(self.fname(known)) if r < 0.9
                      else self.expr(d, scope, known))
            return Call(callee, tuple(self.expr(d, scope, known)
                                      for _ in range(rng.randrange(3))))
        if kind == "mdef":
            return self.mdef(d, known)
        if kind == "evalg":
            return EvalGlobal(self.expr(d, scope, known))
        table = MethodTable(tuple(self.mdef(min(d, 1), known) for _ in range(rng.randrange(3))))
        return EvalTable(table, self.expr(d, scope, known))

    def params(self):
        names = self.rng.sample(PARAMS, self.rng.randrange(3))
        return tuple((x, self.rng.choice(ANNOTATIONS)) for x in names)

    def mdef(self, depth: int, known=(), name: Optional[str] = None) -> MethodDef:
        name = name or self.rng.choice(NAMES)
        params = self.params()
        body = self.expr(depth, tuple(x for x, _ in params), known)
        return MethodDef(name, params, body)

    def program(self) -> EvalGlobal:
        rng, cfg = self.rng, self.cfg
        if cfg.max_depth <= 0:
            return EvalGlobal(self.literal())
        known: list = []
        stmts = []
        for _ in range(rng.randrange(cfg.max_table + 1)):
            name = rng.choice(NAMES)
            # self-recursion is allowed but rare; fuel bounds it
            visible = tuple(known) + ((name,) if rng.random() < 0.1 else ())
            stmts.append(self.mdef(rng.randrange(cfg.max_depth), visible, name))
            if name not in known:
                known.append(name)
        for _ in range(rng.randint(1, 2)):
            stmts.append(self.expr(rng.randrange(1, cfg.max_depth + 1), (), tuple(known)))
        return EvalGlobal(chain(stmts))

    # -- optimizer workloads: typed parameters and concretely-typed call sites

    def literal_of(self, ann) -> Val:
        """A literal matching an annotation (anything for Top)."""
        for _ in range(20):
            v = self.literal()
            if ann is TOP or typeof(v.value) == ann:
                return v
        return {IntTag: Val(IntVal(1)), BoolTag: Val(BoolVal(True)),
                FloatTag: Val(FloatVal(1.0)), StrTag: Val(StrVal("s"))}.get(ann, Val(UNIT))

    def typed_arg(self, depth: int, ann, scope: dict, sigs: dict):
        """An argument that is usually of the wanted tag, in one of several shapes."""
        rng = self.rng
        fitting = [x for x, t in scope.items() if ann is TOP or t == ann]
        r = rng.random()
        if fitting and r < 0.4:
            return Var(rng.choice(fitting))
        if fitting and r < 0.55:
            x = rng.choice(fitting)
            return Seq(PrimCall("print", (Var(x),)), Var(x))
        if r < 0.7 and ann in (IntTag, FloatTag) and depth > 0:
            return PrimCall(rng.choice(("+", "-", "*")),
                            (self.typed_arg(depth - 1, ann, scope, sigs),
                             self.typed_arg(depth - 1, ann, scope, sigs)))
        if r < 0.8 and depth > 0 and sigs:
            return self.typed_call(depth - 1, scope, sigs)
        if r < 0.85 and scope:
            return Var(rng.choice(list(scope)))
        return self.literal_of(ann)

    def typed_call(self, depth: int, scope: dict, sigs: dict):
        rng = self.rng
        name = rng.choice(list(sigs))
        anns = rng.choice(sigs[name])
        callee = fn(name) if rng.random() < 0.9 else Var(name)
        return Call(callee, tuple(self.typed_arg(depth, a, scope, sigs) for a in anns))

    def typed_expr(self, depth: int, scope: dict, sigs: dict):
        rng = self.rng
        if depth <= 0:
            if scope and rng.random() < 0.6:
                return Var(rng.choice(list(scope)))
            return self.literal()
        kind = rng.choices(("call", "prim", "seq", "leaf", "evalg"), (6, 3, 2, 2, 1))[0]
        d = depth - 1
        if kind == "call" and sigs:
            return self.typed_call(d, scope, sigs)
        if kind == "prim":
            if rng.random() < 0.25:
                return PrimCall("print", (self.typed_expr(d, scope, sigs),))
            ann = rng.choice((IntTag, IntTag, FloatTag))
            return PrimCall(rng.choice(ARITH[:3]), (self.typed_arg(d, ann, scope, sigs),
                                                     self.typed_arg(d, ann, scope, sigs)))
        if kind == "seq":
            return Seq(self.typed_expr(d, scope, sigs), self.typed_expr(d, scope, sigs))
        if kind == "evalg" and sigs:
            return EvalGlobal(self.typed_call(0, {}, sigs))
        return Var(rng.choice(list(scope))) if scope else self.literal()

    def opt_program(self) -> EvalGlobal:
        """Method definitions followed by well-typed top-level calls into them."""
        rng, cfg = self.rng, self.cfg
        sigs: dict = {}
        stmts = []
        for _ in range(rng.randint(2, cfg.max_table + 2)):
            name = rng.choice(("g", "h", "k", "m"))
            params = self.params()
            anns = tuple(t for _, t in params)
            # calls into the method's own name are rare: they usually recurse
            visible = {k: v for k, v in sigs.items() if k != name}
            if rng.random() < 0.1:
                visible[name] = sigs.get(name, []) + [anns]
            body = self.typed_expr(rng.randint(1, 3), dict(params), visible)
            stmts.append(MethodDef(name, params, body))
            sigs[name] = sigs.get(name, []) + [anns]
        for _ in range(rng.randint(1, 2)):
            stmts.append(self.typed_call(0, {}, sigs))
        return EvalGlobal(chain(stmts))

    # -- arbitrary ASTs for the printer/reader

    def ast(self, depth: int):
        rng = self.rng
        if depth <= 0 or rng.random() < 0.2:
            r = rng.random()
            if r < 0.3:
                return Var(rng.choice(PARAMS + NAMES + ("a_b", "p?", "q!", "x'")))
            if r < 0.4:
                return fn(rng.choice(NAMES + ("%opt0", "%opt12")))
            return self.any_literal()
        d = depth - 1
        kind = rng.randrange(7)
        if kind == 0:
            return Seq(self.ast(d), self.ast(d))
        if kind == 1:
            op = rng.choice(ARITH + ("==", "print"))
            return PrimCall(op, tuple(self.ast(d) for _ in range(rng.randrange(4))))
        if kind == 2:
            return Call(self.ast(d), tuple(self.ast(d) for _ in range(rng.randrange(3))))
        if kind == 3:
            names = rng.sample(PARAMS, rng.randrange(4))
            anns = (TOP, IntTag, FloatTag, BoolTag, StrTag, UnitTag, FnTag("g"), FnTag("%opt1"))
            return MethodDef(rng.choice(NAMES + ("%opt3",)),
                             tuple((x, rng.choice(anns)) for x in names), self.ast(d))
        if kind == 4:
            return EvalGlobal(self.ast(d))
        if kind == 5:
            entries = []
            for _ in range(rng.randrange(3)):
                md = self.ast(d)
                entries.append(md if isinstance(md, MethodDef) else MethodDef("g", (), md))
            return EvalTable(MethodTable(tuple(entries)), self.ast(d))
        return self.any_literal()

    def any_literal(self) -> Val:
        rng = self.rng
        kind = rng.randrange(6)
        if kind == 0:
            return Val(IntVal(rng.choice((0, -1, 17, INT_MAX, INT_MIN, rng.randrange(-999, 999)))))
        if kind == 1:
            return Val(FloatVal(rng.choice((0.0, -0.0, 1.5, -2.25, 1e300, 5e-324, 1e16,
                                            float("inf"), float("-inf"), float("nan"),
                                            rng.uniform(-1e6, 1e6)))))
        if kind == 2:
            return Val(BoolVal(rng.random() < 0.5))
        if kind == 3:
            return Val(StrVal(rng.choice(("", "a b", 'q"uote', "back\\slash", "tab\tnl\n",
                                          "; not a comment", "ünï", "(paren)"))))
        if kind == 4:
            return Val(UNIT)
        return Val(FnVal(rng.choice(NAMES)))


def chain(stmts):
    body = stmts[-1]
    for s in reversed(stmts[:-1]):
        body = Seq(s, body)
    return body


# ---------------------------------------------------------------- small exhaustive space

def small_exprs(depth: int):
    """Every expression up to `depth` over two values, one variable and one primop."""
    leaves = [Val(IntVal(1)), Val(FnVal("f")), Var("x"), MethodDef("f", (), Val(IntVal(1)))]
    table = MethodTable((MethodDef("f", (), Val(IntVal(1))),))
    levels = [leaves]
    for _ in range(depth - 1):
        prev = levels[-1]
        nxt = list(leaves)
        for a, b in itertools.product(prev, repeat=2):
            nxt += [Seq(a, b), PrimCall("+", (a, b)), Call(a, (b,))]
        for a in prev:
            nxt += [Call(a, ()), EvalGlobal(a), EvalTable(table, a)]
        levels.append(nxt)
    return levels[-1]


def sample_small(rng: random.Random, depth: int):
    table = MethodTable((MethodDef("f", (), Val(IntVal(1))),))
    if depth <= 1 or rng.random() < 0.15:
        return rng.choice((Val(IntVal(1)), Val(FnVal("f")), Var("x"),
                           MethodDef("f", (), Val(IntVal(1)))))
    d = depth - 1
    kind = rng.randrange(6)
    if kind == 0:
        return Seq(sample_small(rng, d), sample_small(rng, d))
    if kind == 1:
        return PrimCall("+", (sample_small(rng, d), sample_small(rng, d)))
    if kind == 2:
        return Call(sample_small(rng, d), (sample_small(rng, d),))
    if kind == 3:
        return Call(sample_small(rng, d), ())
    if kind == 4:
        return EvalGlobal(sample_small(rng, d))
    return EvalTable(table, sample_small(rng, d))


# ---------------------------------------------------------------- properties


@dataclass
class RunRecord:
    states: list
    rules: list
    end: object  # Finished | Errored | None (fuel)


def traced(p, fuel: int) -> RunRecord:
    s = initial_state(p)
    states, rules = [s], []
    for _ in range(fuel):
        r = step(s)
        if not isinstance(r, Stepped):
            return RunRecord(states, rules, r)
        s = r.state
        states.append(s)
        rules.append(r.rule)
    return RunRecord(states, rules, None)


def check_progress(p, fuel: int) -> Optional[str]:
    """Every visited state is a value, steps, or errs with a tag; nothing else escapes."""
    try:
        rec = traced(p, fuel)
    except StuckState as exc:
        return f"stuck: {exc}"
    except Exception as exc:  # noqa: BLE001 - any internal failure is the finding
        return f"internal failure: {type(exc).__name__}: {exc}"
    for s in rec.states:
        if isinstance(s.canonical(), CallUnderX):
            return "bare call outside any table"
    if rec.end is not None and not isinstance(rec.end, (Finished, Errored)):
        return f"unexpected result {rec.end!r}"
    for a, b in zip(rec.states, rec.states[1:]):
        if b.table.entries[:len(a.table)] != a.table.entries:
            return "global table shrank or changed"
    return None


def check_determinism(p, fuel: int) -> Optional[str]:
    """Two runs are identical state by state, and each state re-steps to its successor."""
    a, b = traced(p, fuel), traced(p, fuel)
    if a.states != b.states or a.rules != b.rules or a.end != b.end:
        return "replay diverged"
    if [render_state(i, s) for i, s in enumerate(a.states)] != \
            [render_state(i, s) for i, s in enumerate(b.states)]:
        return "rendered traces differ"
    for s, nxt in zip(a.states, a.states[1:]):
        r = step(s)
        if not isinstance(r, Stepped) or r.state != nxt:
            return "re-stepping a state gave a different successor"
    return None


def check_typing(p, fuel: int) -> Optional[str]:
    """Concrete typing is preserved by every step and agrees with the final value."""
    rec = traced(p, fuel)
    sigma = concrete_type({}, p)
    if sigma is None:
        return None
    for s in rec.states:
        t = concrete_type({}, s.program)
        if t != sigma:
            return f"type changed from {sigma!r} to {t!r}"
    if isinstance(rec.end, Finished) and typeof(rec.end.value) != sigma:
        return f"value of tag {typeof(rec.end.value)!r} for type {sigma!r}"
    return None


def check_roundtrip(e) -> Optional[str]:
    text = print_expr(e)
    try:
        back = parse_expr(text)
    except Exception as exc:  # noqa: BLE001
        return f"reparse failed: {exc}"
    if back != e:
        return "reparse differs"
    if print_expr(back) != text:
        return "reprint differs"
    return None


def check_decomposition(e) -> Optional[str]:
    from .oracle import check
    res = check(e)
    return None if res.ok else res.reason


# ---------------------------------------------------------------- shrinking


def subterm_candidates(e):
    """Smaller expressions to try in place of e: its children and trivial leaves."""
    out = []
    if isinstance(e, Seq):
        out += [e.first, e.second]
    elif isinstance(e, (PrimCall,)):
        out += list(e.args)
        out += [PrimCall(e.op, e.args[:i] + e.args[i + 1:]) for i in range(len(e.args))]
    elif isinstance(e, Call):
        out += [e.callee] + list(e.args)
        out += [Call(e.callee, e.args[:i] + e.args[i + 1:]) for i in range(len(e.args))]
    elif isinstance(e, MethodDef):
        out += [MethodDef(e.name, (), e.body) if e.params and not (
            set(e.param_names) & _vars(e.body)) else e, e.body]
    elif isinstance(e, (EvalGlobal, EvalTable)):
        out.append(e.body)
        if isinstance(e, EvalTable):
            out += [EvalTable(MethodTable(e.table.entries[:i] + e.table.entries[i + 1:]), e.body)
                    for i in range(len(e.table))]
    if not isinstance(e, Val) or e != Val(UNIT):
        out.append(Val(UNIT))
    return [c for c in out if c != e]


def _vars(e) -> set:
    from .optimizer import free_vars
    return free_vars(e)


def _replace_at(e, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(e, Seq):
        return Seq(_replace_at(e.first, rest, new), e.second) if i == 0 else \
            Seq(e.first, _replace_at(e.second, rest, new))
    if isinstance(e, PrimCall):
        args = list(e.args)
        args[i] = _replace_at(args[i], rest, new)
        return PrimCall(e.op, tuple(args))
    if isinstance(e, Call):
        if i == 0:
            return Call(_replace_at(e.callee, rest, new), e.args)
        args = list(e.args)
        args[i - 1] = _replace_at(args[i - 1], rest, new)
        return Call(e.callee, tuple(args))
    if isinstance(e, MethodDef):
        return MethodDef(e.name, e.params, _replace_at(e.body, rest, new))
    if isinstance(e, EvalGlobal):
        return EvalGlobal(_replace_at(e.body, rest, new))
    if isinstance(e, EvalTable):
        return EvalTable(e.table, _replace_at(e.body, rest, new))
    raise ValueError(path)


def _paths(e, prefix=()):
    yield prefix, e
    if isinstance(e, Seq):
        yield from _paths(e.first, prefix + (0,))
        yield from _paths(e.second, prefix + (1,))
    elif isinstance(e, PrimCall):
        for i, a in enumerate(e.args):
            yield from _paths(a, prefix + (i,))
    elif isinstance(e, Call):
        yield from _paths(e.callee, prefix + (0,))
        for i, a in enumerate(e.args):
            yield from _paths(a, prefix + (i + 1,))
    elif isinstance(e, (MethodDef, EvalGlobal, EvalTable)):
        yield from _paths(e.body, prefix + (0,))


def size(e) -> int:
    return sum(1 for _ in _paths(e))


def shrink(e, failing: Callable[[object], bool], budget: int = 2000):
    """Greedy subterm deletion: keep any smaller replacement that still fails."""
    improved = True
    while improved and budget > 0:
        improved = False
        for path, sub in list(_paths(e)):
            for cand in subterm_candidates(sub):
                budget -= 1
                trial = _replace_at(e, path, cand)
                if size(trial) < size(e) and _well_formed(trial) and failing(trial):
                    e, improved = trial, True
                    break
                if budget <= 0:
                    return e
            if improved:
                break
    return e


def _well_formed(e) -> bool:
    return isinstance(e, EvalGlobal)


# ---------------------------------------------------------------- campaign


CHECKS = {
    "progress": lambda p, cfg: check_progress(p, cfg.fuel),
    "determinism": lambda p, cfg: check_determinism(p, cfg.fuel),
    "typing": lambda p, cfg: check_typing(p, cfg.fuel),
    "roundtrip": lambda p, cfg: check_roundtrip(p),
}


@dataclass
class Failure:
    case: int
    prop: str
    reason: str
    program: str
    minimized: str


@dataclass
class FuzzReport:
    config: FuzzConfig
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    outcomes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def program_for(seed: int, index: int, cfg: FuzzConfig):
    """The index-th program of a campaign; independent of every other case."""
    rng = random.Random(f"{seed}:{index}")
    return Gen(rng, cfg).program()


OPT_FUZZ_FUEL = 2000


def opt_case(seed: int, index: int, cfg: FuzzConfig = FuzzConfig()):
    """The index-th optimizer workload: a program and how many table states to skip."""
    rng = random.Random(f"{seed}:opt:{index}")
    p = Gen(rng, cfg).opt_program()
    return p, rng.randrange(4)


def run_campaign(cfg: FuzzConfig, checks=None) -> FuzzReport:
    checks = tuple(CHECKS) if checks is None else tuple(checks)
    report = FuzzReport(cfg, counts={c: 0 for c in checks})
    for i in range(cfg.cases):
        p = program_for(cfg.seed, i, cfg)
        for name in checks:
            reason = CHECKS[name](p, cfg)
            report.counts[name] += 1
            if reason is not None:
                def still(q, name=name):
                    return CHECKS[name](q, cfg) is not None
                small = shrink(p, still)
                report.failures.append(Failure(i, name, reason, print_expr(p), print_expr(small)))
        if cfg.decompose_every and i % cfg.decompose_every == 0:
            # every visited state, not just the initial program
            rec = traced(p, min(cfg.fuel, 200))
            for s in rec.states:
                reason = check_decomposition(s.program)
                if reason is not None:
                    report.failures.append(Failure(i, "decomposition", reason,
                                                   print_expr(s.program), print_expr(s.program)))
                    break
            report.counts["decomposition"] = report.counts.get("decomposition", 0) + 1
        end = traced(p, cfg.fuel).end
        kind = ("value" if isinstance(end, Finished) else
                end.kind.value if isinstance(end, Errored) else "fuel")
        report.outcomes[kind] = report.outcomes.get(kind, 0) + 1
    return report
