"""Multiple-dispatch metafunctions over method tables."""
from __future__ import annotations

from enum import Enum

from .core import MethodDef, MethodTable, subtypes


class DispatchErrorKind(Enum):
    NO_METHOD = "NoMethod"
    AMBIGUOUS = "Ambiguous"


class DispatchError(Exception):
    def __init__(self, kind: DispatchErrorKind, name: str, tags=()):
        shown = ", ".join(repr(t) for t in tags)
        super().__init__(f"{kind.value}: {name}({shown})")
        self.kind = kind
        self.name = name
        self.tags = tuple(tags)


def table_extend(table: MethodTable, md: MethodDef) -> MethodTable:
    return table.extend(md)


def table_defines(table: MethodTable, name: str) -> bool:
    return any(md.name == name for md in table.entries)


def sig_equivalent(a: MethodDef, b: MethodDef) -> bool:
    return (a.name == b.name
            and subtypes(a.annotations, b.annotations)
            and subtypes(b.annotations, a.annotations))


def contains(mds, md: MethodDef) -> bool:
    return any(sig_equivalent(md, other) for other in mds)


def latest(table) -> list:
    """Newest-first scan keeping only methods not shadowed by a newer equivalent.

    Accepts a MethodTable or any oldest-first sequence of methods. The result is
    returned newest-first; callers treat it as a set.
    """
    entries = table.entries if isinstance(table, MethodTable) else tuple(table)
    kept: list = []
    for md in reversed(entries):
        if not contains(kept, md):
            kept.append(md)
    return kept


def applicable(mds, name: str, tags) -> list:
    tags = tuple(tags)
    return [md for md in mds if md.name == name and subtypes(tags, md.annotations)]


def min_method(mds, name: str = "?", tags=()) -> MethodDef:
    mds = list(mds)
    if not mds:
        raise DispatchError(DispatchErrorKind.NO_METHOD, name, tags)
    minimal = [md for md in mds
               if all(subtypes(md.annotations, other.annotations) for other in mds)]
    if len(minimal) != 1:
        raise DispatchError(DispatchErrorKind.AMBIGUOUS, mds[0].name, tags)
    return minimal[0]


def getmd(table: MethodTable, name: str, tags) -> MethodDef:
    tags = tuple(tags)
    return min_method(applicable(latest(table), name, tags), name, tags)


def try_getmd(table: MethodTable, name: str, tags):
    """getmd, but None instead of DispatchError."""
    try:
        return getmd(table, name, tags)
    except DispatchError:
        return None
