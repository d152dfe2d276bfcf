"""S-expression reader and printer for .jlt programs.

Grammar (one form per line of the table):

    (evalg e)                         global evaluation
    (evalt ((mdef ...) ...) e)        evaluation in a table
    (seq e1 e2)
    (mdef "name" ((x Int) (y) z) e)   omitted annotation means Any
    (mcall callee e ...)
    (pcall op e ...)                  op is one of + - * / == print
    (mval name)                       function value
    42  -7  2.5  true  false  unit  "text"
    name                              variable

Type annotations: Any, Int, Float, Bool, String, Nothing, (Fn name).
Comments run from ``;`` (or ``#``) to end of line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .core import (
    INT_MAX, INT_MIN, PRIMOPS, TOP, UNIT, BoolTag, BoolVal, Call, EvalGlobal, EvalTable,
    FloatTag, FloatVal, FnTag, FnVal, IntTag, IntVal, MethodDef, MethodTable, PrimCall,
    ScalarTag, Seq, StrTag, StrVal, TopType, UnitTag, UnitVal, Val, Var,
)

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_!?']*\Z")
# % is never produced by the reader for variables; generated method names use it.
NAME_RE = re.compile(r"(%[A-Za-z0-9_]+|[A-Za-z_][A-Za-z0-9_!?']*)\Z")
INT_RE = re.compile(r"[+-]?[0-9]+\Z")
FLOAT_RE = re.compile(r"[+-]?([0-9]+\.[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?\Z")
SPECIAL_FLOATS = {"+inf.0": float("inf"), "-inf.0": float("-inf"), "+nan.0": float("nan")}
RESERVED = {"true", "false", "unit"}
KEYWORDS = {"evalg", "evalt", "seq", "mdef", "mcall", "pcall", "mval"}

TYPE_NAMES = {
    "Any": TOP, "Int": IntTag, "Float": FloatTag, "Bool": BoolTag,
    "String": StrTag, "Nothing": UnitTag,
}


@dataclass(frozen=True)
class SourceSpan:
    begin: int
    end: int


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{message} at {span.begin}..{span.end}")
        self.message = message
        self.span = span


# ---------------------------------------------------------------- reader


@dataclass
class Atom:
    text: str
    span: SourceSpan
    quoted: bool = False


@dataclass
class SList:
    items: list
    span: SourceSpan


_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\", "r": "\r"}


def _read_all(text: str) -> list:
    pos = 0
    n = len(text)
    stack: list = [([], 0)]
    while pos < n:
        c = text[pos]
        if c.isspace():
            pos += 1
        elif c in ";#":
            while pos < n and text[pos] != "\n":
                pos += 1
        elif c == "(":
            stack.append(([], pos))
            pos += 1
        elif c == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", SourceSpan(pos, pos + 1))
            items, start = stack.pop()
            stack[-1][0].append(SList(items, SourceSpan(start, pos + 1)))
            pos += 1
        elif c == '"':
            start = pos
            pos += 1
            buf = []
            while True:
                if pos >= n:
                    raise ParseError("unterminated string", SourceSpan(start, n))
                c = text[pos]
                if c == '"':
                    pos += 1
                    break
                if c == "\\":
                    if pos + 1 >= n or text[pos + 1] not in _ESCAPES:
                        raise ParseError("bad escape", SourceSpan(pos, min(pos + 2, n)))
                    buf.append(_ESCAPES[text[pos + 1]])
                    pos += 2
                else:
                    buf.append(c)
                    pos += 1
            stack[-1][0].append(Atom("".join(buf), SourceSpan(start, pos), quoted=True))
        else:
            start = pos
            while pos < n and not text[pos].isspace() and text[pos] not in '()";':
                pos += 1
            stack[-1][0].append(Atom(text[start:pos], SourceSpan(start, pos)))
    if len(stack) != 1:
        _, start = stack[-1]
        raise ParseError("unbalanced '(': missing ')'", SourceSpan(start, n))
    return stack[0][0]


def _read_one(text: str):
    forms = _read_all(text)
    if len(forms) != 1:
        span = forms[1].span if len(forms) > 1 else SourceSpan(0, len(text))
        raise ParseError(f"expected exactly one form, found {len(forms)}", span)
    return forms[0]


# ---------------------------------------------------------------- conversion


def _type(node):
    if isinstance(node, Atom) and not node.quoted:
        if node.text in TYPE_NAMES:
            return TYPE_NAMES[node.text]
    if isinstance(node, SList) and len(node.items) == 2:
        head, name = node.items
        if isinstance(head, Atom) and head.text == "Fn" and isinstance(name, Atom):
            if NAME_RE.match(name.text):
                return FnTag(name.text)
    raise ParseError("bad type annotation", node.span)


def _name(node, what="name"):
    if not isinstance(node, Atom) or not NAME_RE.match(node.text):
        raise ParseError(f"bad {what}", node.span)
    return node.text


def _params(node):
    if not isinstance(node, SList):
        raise ParseError("expected a parameter list", node.span)
    params, seen = [], set()
    for p in node.items:
        if isinstance(p, Atom) and not p.quoted:
            name, ann, span = p.text, TOP, p.span
        elif isinstance(p, SList) and len(p.items) in (1, 2):
            first = p.items[0]
            if not isinstance(first, Atom) or first.quoted:
                raise ParseError("bad parameter", p.span)
            name, span = first.text, p.span
            ann = _type(p.items[1]) if len(p.items) == 2 else TOP
        else:
            raise ParseError("bad parameter", p.span)
        if not IDENT_RE.match(name) or name in RESERVED:
            raise ParseError(f"bad parameter name {name!r}", span)
        if name in seen:
            raise ParseError(f"duplicate parameter {name!r}", span)
        seen.add(name)
        params.append((name, ann))
    return tuple(params)


def _atom_expr(a: Atom):
    t = a.text
    if a.quoted:
        return Val(StrVal(t))
    if t == "true":
        return Val(BoolVal(True))
    if t == "false":
        return Val(BoolVal(False))
    if t == "unit":
        return Val(UNIT)
    if INT_RE.match(t):
        n = int(t)
        if not INT_MIN <= n <= INT_MAX:
            raise ParseError("integer literal out of 64-bit range", a.span)
        return Val(IntVal(n))
    if FLOAT_RE.match(t):
        return Val(FloatVal(float(t)))
    if t in SPECIAL_FLOATS:
        return Val(FloatVal(SPECIAL_FLOATS[t]))
    if IDENT_RE.match(t):
        return Var(t)
    raise ParseError(f"bad token {t!r}", a.span)


def _arity(node, lo, hi=None):
    n = len(node.items) - 1
    if n < lo or (hi is not None and n > hi):
        head = node.items[0].text
        raise ParseError(f"wrong number of operands for {head}", node.span)


def _table(node):
    if not isinstance(node, SList):
        raise ParseError("expected a method table", node.span)
    mds = []
    for item in node.items:
        md = _expr(item)
        if not isinstance(md, MethodDef):
            raise ParseError("method table entries must be mdef forms", item.span)
        mds.append(md)
    return MethodTable(tuple(mds))


def _expr(node):
    if isinstance(node, Atom):
        return _atom_expr(node)
    if not node.items:
        raise ParseError("empty form", node.span)
    head = node.items[0]
    if not isinstance(head, Atom) or head.quoted or head.text not in KEYWORDS:
        raise ParseError("unknown keyword", head.span)
    kw, rest = head.text, node.items[1:]
    if kw == "evalg":
        _arity(node, 1, 1)
        return EvalGlobal(_expr(rest[0]))
    if kw == "evalt":
        _arity(node, 2, 2)
        return EvalTable(_table(rest[0]), _expr(rest[1]))
    if kw == "seq":
        _arity(node, 2, 2)
        return Seq(_expr(rest[0]), _expr(rest[1]))
    if kw == "mdef":
        _arity(node, 3, 3)
        if not (isinstance(rest[0], Atom) and rest[0].quoted):
            raise ParseError("method name must be a quoted string", rest[0].span)
        return MethodDef(_name(rest[0], "method name"), _params(rest[1]), _expr(rest[2]))
    if kw == "mcall":
        _arity(node, 1)
        return Call(_expr(rest[0]), tuple(_expr(a) for a in rest[1:]))
    if kw == "pcall":
        _arity(node, 1)
        op = rest[0]
        if not isinstance(op, Atom) or op.quoted or op.text not in PRIMOPS:
            raise ParseError("unknown primop", op.span)
        return PrimCall(op.text, tuple(_expr(a) for a in rest[1:]))
    # mval
    _arity(node, 1, 1)
    return Val(FnVal(_name(rest[0], "function name")))


def parse_expr(text: str):
    return _expr(_read_one(text))


def parse_program(text: str):
    form = _read_one(text)
    e = _expr(form)
    if not isinstance(e, EvalGlobal):
        raise ParseError("a program must be an (evalg ...) form", form.span)
    return e


def parse_table(text: str) -> MethodTable:
    """A bare table: ``((mdef ...) ...)``."""
    return _table(_read_one(text))


def parse_type(text: str):
    return _type(_read_one(text))


def read_forms(text: str) -> list:
    """Raw reader access, used by the Φ-file format."""
    return _read_all(text)


def form_to_type(node):
    return _type(node)


def read_form(text: str):
    """Exactly one raw form."""
    return _read_one(text)


def form_to_table(node) -> MethodTable:
    return _table(node)


def form_to_expr(node):
    return _expr(node)


# ---------------------------------------------------------------- printer


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def print_float(x: float) -> str:
    if x != x:
        return "+nan.0"
    if x in (float("inf"), float("-inf")):
        return "+inf.0" if x > 0 else "-inf.0"
    s = repr(x)
    if "." not in s:
        mant, _, exp = s.partition("e")
        s = mant + ".0" + ("e" + exp if exp else "")
    return s


def print_value(v) -> str:
    if isinstance(v, UnitVal):
        return "unit"
    if isinstance(v, BoolVal):
        return "true" if v.value else "false"
    if isinstance(v, IntVal):
        return str(v.value)
    if isinstance(v, FloatVal):
        return print_float(v.value)
    if isinstance(v, StrVal):
        return _escape(v.value)
    if isinstance(v, FnVal):
        return f"(mval {v.name})"
    raise TypeError(v)


def print_type(t) -> str:
    if isinstance(t, TopType):
        return "Any"
    if isinstance(t, FnTag):
        return f"(Fn {t.name})"
    if isinstance(t, ScalarTag):
        return t.name
    raise TypeError(t)


_TABLE_TEXT: dict = {}  # id -> (table, text); tables are immutable and heavily shared


def print_table(table: MethodTable) -> str:
    hit = _TABLE_TEXT.get(id(table))
    if hit is not None and hit[0] is table:
        return hit[1]
    text = "(" + " ".join(print_expr(md) for md in table.entries) + ")"
    if len(_TABLE_TEXT) >= 1024:
        _TABLE_TEXT.clear()
    _TABLE_TEXT[id(table)] = (table, text)
    return text


def print_expr(e) -> str:
    parts: list = []
    _emit(e, parts)
    return "".join(parts)


def _emit(e, out):
    # explicit stack keeps deep run-time states printable
    todo = [e]
    while todo:
        e = todo.pop()
        if isinstance(e, str):
            out.append(e)
        elif isinstance(e, Val):
            out.append(print_value(e.value))
        elif isinstance(e, Var):
            out.append(e.name)
        elif isinstance(e, Seq):
            out.append("(seq ")
            todo.extend([")", e.second, " ", e.first])
        elif isinstance(e, PrimCall):
            out.append(f"(pcall {e.op}")
            todo.append(")")
            for a in reversed(e.args):
                todo.extend([a, " "])
        elif isinstance(e, Call):
            out.append("(mcall ")
            todo.append(")")
            for a in reversed(e.args):
                todo.extend([a, " "])
            todo.append(e.callee)
        elif isinstance(e, MethodDef):
            params = " ".join(f"({x} {print_type(t)})" for x, t in e.params)
            out.append(f"(mdef {_escape(e.name)} ({params}) ")
            todo.extend([")", e.body])
        elif isinstance(e, EvalGlobal):
            out.append("(evalg ")
            todo.extend([")", e.body])
        elif isinstance(e, EvalTable):
            out.append("(evalt ")
            out.append(print_table(e.table))
            todo.extend([")", e.body, " "])
        else:
            raise TypeError(f"not an expression: {e!r}")
