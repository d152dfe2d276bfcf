"""Optimization judgments (checkers) and the bounded inline/specialize/direct-call rewriter."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .core import (
    UNIT, Call, EvalGlobal, EvalTable, FnVal, MethodDef, MethodTable, PrimCall, Seq, Val,
    Var, fn, is_near_value,
)
from .dispatch import try_getmd
from .evaluator import subst_map, substitute
from .typecheck import EMPTY_ENV, concrete_type, env_of

# ---------------------------------------------------------------- Φ


@dataclass(frozen=True)
class OptEntry:
    """⟨σ̄, m, m′⟩: calls to `source` with argument tags `tags` may go to `target`."""

    tags: tuple
    source: str
    target: str


def s_count(phi: Iterable[OptEntry], name: str) -> int:
    return sum(1 for ent in phi if ent.source == name)


def is_target(phi: Iterable[OptEntry], name: str) -> bool:
    return any(ent.target == name for ent in phi)


def format_phi(phi: Iterable[OptEntry]) -> str:
    from .parser import print_type
    lines = []
    for ent in phi:
        tags = " ".join(print_type(t) for t in ent.tags)
        lines.append(f"({tags}) {ent.source} -> {ent.target}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_phi(text: str) -> tuple:
    """One entry per line, ``(Int (Fn g)) g -> h``; blank and ``;``/``#`` lines skipped."""
    from .parser import NAME_RE, ParseError, SList, SourceSpan, form_to_type, read_forms
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in ";#":
            continue
        left, arrow, target = line.partition("->")
        close = left.rfind(")")
        if not arrow or close < 0:
            raise ParseError(f"line {lineno}: expected '(tags) name -> name'", SourceSpan(0, len(raw)))
        forms = read_forms(left[:close + 1])
        source, target = left[close + 1:].strip(), target.strip()
        if (len(forms) != 1 or not isinstance(forms[0], SList)
                or not NAME_RE.match(source) or not NAME_RE.match(target)):
            raise ParseError(f"line {lineno}: malformed entry", SourceSpan(0, len(raw)))
        out.append(OptEntry(tuple(form_to_type(f) for f in forms[0].items), source, target))
    return tuple(out)


# ---------------------------------------------------------------- syntax helpers


def _walk(e, into_tables: bool):
    stack = [e]
    while stack:
        e = stack.pop()
        yield e
        if isinstance(e, Seq):
            stack += [e.first, e.second]
        elif isinstance(e, PrimCall):
            stack += e.args
        elif isinstance(e, Call):
            stack.append(e.callee)
            stack += e.args
        elif isinstance(e, MethodDef):
            stack.append(e.body)
        elif isinstance(e, EvalGlobal):
            stack.append(e.body)
        elif isinstance(e, EvalTable):
            stack.append(e.body)
            if into_tables:
                stack += e.table.entries


def referenced_names(e) -> set:
    """Function names an expression mentions: function values and defined method names."""
    names = set()
    for sub in _walk(e, into_tables=True):
        if isinstance(sub, Val) and isinstance(sub.value, FnVal):
            names.add(sub.value.name)
        elif isinstance(sub, MethodDef):
            names.add(sub.name)
    return names


def table_names(table: MethodTable) -> set:
    """Every name occurring in a table, as a method or inside a body."""
    names = set()
    for md in table.entries:
        names |= referenced_names(md)
    return names


def free_vars(e) -> set:
    out = set()
    stack = [(e, frozenset())]
    while stack:
        e, bound = stack.pop()
        if isinstance(e, Var):
            if e.name not in bound:
                out.add(e.name)
        elif isinstance(e, Seq):
            stack += [(e.first, bound), (e.second, bound)]
        elif isinstance(e, PrimCall):
            stack += [(a, bound) for a in e.args]
        elif isinstance(e, Call):
            stack += [(e.callee, bound)] + [(a, bound) for a in e.args]
        elif isinstance(e, MethodDef):
            stack.append((e.body, bound | set(e.param_names)))
        elif isinstance(e, (EvalGlobal, EvalTable)):
            stack.append((e.body, bound))
    return out


def binders(e) -> set:
    out = set()
    for sub in _walk(e, into_tables=False):
        if isinstance(sub, MethodDef):
            out.update(sub.param_names)
    return out


def inline_safe(md: MethodDef, args, env: Mapping) -> bool:
    """Substituting near-values into md's body inside Γ captures nothing."""
    globals_used = free_vars(md.body) - set(md.param_names)
    if globals_used & set(env):
        return False
    var_args = {a.name for a in args if isinstance(a, Var)}
    return not (var_args & binders(md.body))


def names_compat(M: MethodTable, M2: MethodTable, e) -> bool:
    dom, dom2 = M.names(), M2.names()
    return all((n in dom) == (n in dom2) for n in referenced_names(e))


def rename_params(md2: MethodDef, names) -> object:
    """md2's body with its parameters renamed positionally to `names`."""
    if md2.param_names == tuple(names):
        return md2.body
    return subst_map(md2.body, {x2: Var(x) for x2, x in zip(md2.param_names, names)})


# ---------------------------------------------------------------- judgments


class _Checker:
    def __init__(self, phi, M: MethodTable, M2: MethodTable):
        self.phi = frozenset(phi)
        self.M, self.M2 = M, M2
        self.dom, self.dom2 = M.names(), M2.names()

    def compat(self, names) -> bool:
        return all((n in self.dom) == (n in self.dom2) for n in names)

    def expr(self, env, e, e2) -> bool:
        if isinstance(e, Val):
            if isinstance(e.value, FnVal):
                return e2 == e and self.compat((e.value.name,))
            return e2 == e
        if isinstance(e, Var):
            return e2 == e
        if isinstance(e, MethodDef):
            return e2 == e and self.compat((e.name,))
        if isinstance(e, (EvalGlobal, EvalTable)):
            return e2 == e and self.compat(referenced_names(e))
        if isinstance(e, Seq):
            return (isinstance(e2, Seq) and self.expr(env, e.first, e2.first)
                    and self.expr(env, e.second, e2.second))
        if isinstance(e, PrimCall):
            return (isinstance(e2, PrimCall) and e2.op == e.op and len(e2.args) == len(e.args)
                    and all(self.expr(env, a, a2) for a, a2 in zip(e.args, e2.args)))
        if isinstance(e, Call):
            return self.congruent_call(env, e, e2) or self.inline(env, e, e2) \
                or self.direct(env, e, e2)
        raise TypeError(e)

    def congruent_call(self, env, e, e2) -> bool:
        return (isinstance(e2, Call) and len(e2.args) == len(e.args)
                and self.expr(env, e.callee, e2.callee)
                and all(self.expr(env, a, a2) for a, a2 in zip(e.args, e2.args)))

    def inline(self, env, e, e2) -> bool:
        if not (isinstance(e2, Seq) and e2.first == Val(UNIT)):
            return False
        if not (isinstance(e.callee, Val) and isinstance(e.callee.value, FnVal)):
            return False
        if not all(is_near_value(a) for a in e.args):
            return False
        tags = tuple(concrete_type(env, a) for a in e.args)
        if None in tags:
            return False
        md = try_getmd(self.M, e.callee.value.name, tags)
        if md is None or not inline_safe(md, e.args, env):
            return False
        body = substitute(md.body, md.param_names, e.args)
        return self.expr(env, body, e2.second)

    def direct(self, env, e, e2) -> bool:
        if not (isinstance(e2, Call) and len(e2.args) == len(e.args)):
            return False
        if not (isinstance(e.callee, Val) and isinstance(e.callee.value, FnVal)
                and isinstance(e2.callee, Val) and isinstance(e2.callee.value, FnVal)):
            return False
        if not all(self.expr(env, a, a2) for a, a2 in zip(e.args, e2.args)):
            return False
        tags = tuple(concrete_type(env, a2) for a2 in e2.args)
        if None in tags:
            return False
        return OptEntry(tags, e.callee.value.name, e2.callee.value.name) in self.phi

    def method_valid(self, ent: OptEntry) -> bool:
        md = try_getmd(self.M, ent.source, ent.tags)
        md2 = try_getmd(self.M2, ent.target, ent.tags)
        if md is None or md2 is None or len(md.params) != len(md2.params):
            return False
        env = dict(zip(md.param_names, ent.tags))
        return self.expr(env, md.body, rename_params(md2, md.param_names))

    def method_def(self, md: MethodDef, md2: MethodDef) -> bool:
        if md.name != md2.name or md.annotations != md2.annotations:
            return False
        return self.expr(env_of(md.params), md.body, rename_params(md2, md.param_names))


def check_expr_opt(phi, env: Mapping, M: MethodTable, e, M2: MethodTable, e2) -> bool:
    """Φ; Γ ⊢ M, e ⊳ M2, e2."""
    return _Checker(phi, M, M2).expr(env, e, e2)


def check_method_valid(phi, M: MethodTable, M2: MethodTable, ent: OptEntry) -> bool:
    return _Checker(phi, M, M2).method_valid(ent)


def check_md_opt(phi, M: MethodTable, M2: MethodTable, md: MethodDef, md2: MethodDef) -> bool:
    return _Checker(phi, M, M2).method_def(md, md2)


def check_table_opt(phi, e, M: MethodTable, M2: MethodTable) -> bool:
    """Table optimization plus name compatibility for e."""
    n = len(M)
    if len(M2) < n:
        return False
    chk = _Checker(phi, M, M2)
    if not all(chk.method_def(md, md2) for md, md2 in zip(M.entries, M2.entries[:n])):
        return False
    used = table_names(M)
    if any(md2.name in used for md2 in M2.entries[n:]):
        return False
    # Φ is assumed while its own entries are checked
    if not all(chk.method_valid(ent) for ent in chk.phi):
        return False
    return chk.compat(referenced_names(e))


# ---------------------------------------------------------------- rewriting


@dataclass(frozen=True)
class OptConfig:
    inline_limit: int = 1
    spec_limit: int = 1
    prefix: str = "%opt"


@dataclass(frozen=True)
class FreshName:
    name: str
    kind: str  # "specialize" | "direct"
    source: str
    tags: tuple


@dataclass(frozen=True)
class OptResult:
    table: MethodTable
    expr: object
    phi: tuple
    fresh: tuple = ()
    inline_counts: Mapping = field(default_factory=dict)
    rewrites: Mapping = field(default_factory=dict)

    @property
    def changed(self) -> bool:
        return bool(sum(self.rewrites.values()))


class _Rewriter:
    def __init__(self, M: MethodTable, cfg: OptConfig, avoid):
        self.M, self.cfg = M, cfg
        self.omega: Counter = Counter()
        self.phi_tau: dict = {}
        self.phi: list = []
        self.targets: set = set()
        self.added: list = []
        self.fresh_log: list = []
        self.stats: Counter = Counter()
        self.taken = table_names(M) | set(avoid)
        self._next = 0

    def fresh(self) -> str:
        while True:
            name = f"{self.cfg.prefix}{self._next}"
            self._next += 1
            if name not in self.taken:
                self.taken.add(name)
                return name

    def expr(self, env, e):
        # the optimization context: seq, primop args, call callee and args
        if isinstance(e, Seq):
            return Seq(self.expr(env, e.first), self.expr(env, e.second))
        if isinstance(e, PrimCall):
            return PrimCall(e.op, tuple(self.expr(env, a) for a in e.args))
        if isinstance(e, Call):
            node = Call(self.expr(env, e.callee), tuple(self.expr(env, a) for a in e.args))
            return self.call(env, node)
        return e

    def _lookup_phi(self, tags, name) -> Optional[str]:
        for ent in self.phi:
            if ent.tags == tags and ent.source == name:
                return ent.target
        return None

    def call(self, env, node: Call):
        if not (isinstance(node.callee, Val) and isinstance(node.callee.value, FnVal)):
            return node
        m = node.callee.value.name
        if m in self.targets:
            return node
        tags = tuple(concrete_type(env, a) for a in node.args)
        if None in tags:
            return node
        md = try_getmd(self.M, m, tags)
        if md is None:
            return node
        key = (md.annotations, m)
        if (all(is_near_value(a) for a in node.args)
                and self.omega[key] < self.cfg.inline_limit
                and inline_safe(md, node.args, env)):
            self.omega[key] += 1
            self.stats["inline"] += 1
            body = substitute(md.body, md.param_names, node.args)
            return Seq(Val(UNIT), self.expr(env, body))
        # specialization and direct calls are for calls inlining cannot take
        if all(is_near_value(a) for a in node.args):
            return node
        target = self._lookup_phi(tags, m)
        if target is not None:
            self.stats["specialize-existing"] += 1
        elif s_count(self.phi, m) < self.cfg.spec_limit:
            target = self._generate(md, tuple(zip(md.param_names, tags)), "specialize", tags)
            self.stats["specialize-new"] += 1
        elif key in self.phi_tau:
            target = self.phi_tau[key]
            self.phi.append(OptEntry(tags, m, target))
            self.stats["direct-existing"] += 1
        else:
            target = self._generate(md, md.params, "direct", tags)
            self.phi_tau[key] = target
            self.stats["direct-new"] += 1
        return Call(fn(target), node.args)

    def _generate(self, md: MethodDef, params, kind: str, tags) -> str:
        name = self.fresh()
        self.added.append(MethodDef(name, tuple(params), md.body))
        self.phi.append(OptEntry(tags, md.name, name))
        self.targets.add(name)
        self.fresh_log.append(FreshName(name, kind, md.name, tags))
        return name


def optimize(M: MethodTable, e, inline_limit: int = 1, spec_limit: int = 1,
             env: Optional[Mapping] = None, avoid=()) -> OptResult:
    """Rewrite every method body of M (under its parameters) and then e (under env).

    Names in `avoid` are never chosen for generated methods; pass every name of the
    surrounding program so the result stays compatible with it.
    """
    cfg = OptConfig(inline_limit, spec_limit)
    rw = _Rewriter(M, cfg, set(avoid) | referenced_names(e))
    bodies = [MethodDef(md.name, md.params, rw.expr(env_of(md.params), md.body))
              for md in M.entries]
    e2 = rw.expr(EMPTY_ENV if env is None else env, e)
    table = MethodTable(tuple(bodies) + tuple(rw.added))
    return OptResult(table, e2, tuple(rw.phi), tuple(rw.fresh_log),
                     dict(rw.omega), dict(rw.stats))


def certify(res: OptResult, M: MethodTable, e, env: Optional[Mapping] = None) -> bool:
    env = EMPTY_ENV if env is None else env
    return (check_table_opt(res.phi, e, M, res.table)
            and check_expr_opt(res.phi, env, M, e, res.table, res.expr))
